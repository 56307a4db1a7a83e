#pragma once

#include <cstdint>
#include <vector>

#include "oia/env.hpp"
#include "oia/mlp.hpp"
#include "oia/replay.hpp"
#include "oia/rng.hpp"

namespace oia {

/// Training-loop knobs. Slots per episode live in EnvConfig; total step
/// counts are derived as episodes * slots_per_episode.
struct DqnHyperparams {
    double discount = 0.5;            // return discount
    double greedy_start = 0.1;        // exploit probability at step 0
    double greedy_end = 1.0;          // exploit probability after annealing
    long anneal_steps = 0;            // 0 = first 80% of total steps
    int batch_size = 32;
    int target_sync_period = 4;       // gradient updates between target syncs
    double learning_rate = 1e-3;
    std::size_t replay_capacity = 100000;
    int warmup_min = 1000;            // effective warm-up is max(batch_size, warmup_min)
    int episodes = 500;
    std::vector<int> hidden_widths = {128, 128};

    void validate() const;
    long effective_anneal_steps(long total_steps) const;
    int warmup() const;
};

/// Exploit probability at a given global step under the linear schedule.
double greedy_probability(const DqnHyperparams& hyper, long step, long total_steps);

/// With probability greedy_prob the argmax of forward(theta, obs) (ties to
/// the lowest index), otherwise a uniformly random action.
int select_action(const MlpParameters& theta, const std::vector<double>& obs,
                  double greedy_prob, Rng& rng);

/// Lowest-index argmax of a Q row.
int greedy_action(const std::vector<double>& q_values);

/// y_b = r_b + discount * max_a' Q(x'_b, a'; theta_target).
std::vector<double> td_targets(const std::vector<Experience>& batch,
                               const MlpParameters& theta_target, double discount);

struct TrainResult {
    MlpParameters theta;
    std::vector<double> curve;             // per-episode undiscounted sum of rewards
    std::vector<long> sync_update_counts;  // gradient-update counts at each target sync
    long gradient_updates = 0;
};

/// Full deep Q-learning loop: per slot select_action -> env.step -> store;
/// after warm-up every slot also draws a minibatch, regresses on the target
/// network's TD values and applies one SGD step; the target network is
/// refreshed exactly every target_sync_period gradient updates.
TrainResult train(const EnvConfig& env_cfg, const DqnHyperparams& hyper, Rng& rng);

/// Same loop with the cache disabled (p_hit forced to 0).
TrainResult baseline_no_cache_train(const EnvConfig& env_cfg, const DqnHyperparams& hyper,
                                    Rng& rng);

/// One-shot selector that assumes the channel never changes: enumerates all
/// actions on the given frozen realization with cache bits forced to zero
/// and returns the index of the best (ties to the lowest index). Alignment
/// init randomness is derived from the inputs, so the result is a pure
/// function of them.
unsigned baseline_myopic_static(const SystemState& state, const Environment& env,
                                const ChannelRealization& frozen_channels);

/// Episode curve for the static baseline: the action is chosen once per
/// episode from the initial state and a frozen realization, then held for
/// every slot. The environment runs with p_hit = 0.
std::vector<double> myopic_static_curve(const EnvConfig& env_cfg, int episodes, Rng& rng);

}  // namespace oia
