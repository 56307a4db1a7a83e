#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oia/config.hpp"
#include "oia/mlp.hpp"
#include "oia/tabular.hpp"

namespace oia {

/// One completed training (or baseline) run within a sweep.
struct RunRecord {
    Scheme scheme = Scheme::kWithCache;
    double p_stay = 0.0;
    int replica = 0;
    std::uint64_t replica_seed = 0;
    std::vector<double> curve;      // per-episode sums of per-slot rewards
    double avg_sum_rate = 0.0;      // run_train: mean per-slot reward over the last
                                    // 10% of training episodes; run_sweep: mean
                                    // per-slot reward of the trained scheme under
                                    // frozen greedy evaluation
};

/// Trailing mean of the window ending at index (window shrinks at the start).
double moving_average(const std::vector<double>& values, int window, std::size_t index);

/// Mean per-slot reward over the last 10% of episodes (at least one).
double final_average(const std::vector<double>& curve, int slots_per_episode);

/// Parallelism bound from IA_CACHE_RL_THREADS; 0 means "not set".
int thread_limit_from_env();

/// Mean per-slot reward of the frozen network's greedy policy over fresh
/// episodes. Episode e runs on its own stream derived as (seed, e), so two
/// calls with the same seed see identical episode draws no matter how the
/// policies under test differ.
double greedy_rollout_average(const EnvConfig& env_cfg, const MlpParameters& theta,
                              int episodes, std::uint64_t seed);

/// The same rollout protocol for the static selector, which picks one action
/// per episode from the initial state and holds it.
double myopic_static_rollout_average(const EnvConfig& env_cfg, int episodes,
                                     std::uint64_t seed);

/// Evaluation seed for one sweep cell. Deliberately independent of the
/// scheme: all three schemes at a grid point and replica are measured on
/// identical evaluation draws (a paired comparison), so their differences
/// reflect the schemes rather than draw luck.
std::uint64_t sweep_eval_seed(std::uint64_t base, int point, int replica);

/// Runs cfg.scheme once, writing convergence.csv (episode, sum_rate,
/// moving_avg_100 — per-slot units), a gnuplot script, and qnet.ckpt for
/// the network schemes. Returns the run's record.
RunRecord run_train(const ExperimentConfig& cfg, const std::string& out_dir);

/// Full grid {sweep_p_stay} x {all three schemes} x {replicas}; jobs run in
/// parallel on derived seeds and sweep.csv rows come out in grid order
/// regardless of scheduling. Each job trains its scheme, then scores it with
/// greedy_rollout_average / myopic_static_rollout_average on the cell's
/// shared evaluation episodes (see sweep_eval_seed).
std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg, const std::string& out_dir);

struct OracleCheckOptions {
    int mc_samples = 2000;
    long tabular_steps = 400000;
    int dqn_episodes = 400;
    int eval_episodes = 2000;
    double tabular_discount = 0.0;  // 0 = use the configured discount
};

struct OracleCheckReport {
    OracleResult oracle;
    double tabular_agreement = 0.0;  // fraction of states
    double dqn_agreement = 0.0;
    double tabular_q_gap = 0.0;      // mean |Q_tab - Q*| over all pairs
    double q_gap_tolerance = 0.0;
    double dqn_return = 0.0;         // discounted, greedy rollouts
    double oracle_return = 0.0;      // E[V*] under the initial distribution
    bool tabular_policy_ok = false;
    bool dqn_policy_ok = false;
    bool q_gap_ok = false;
    bool return_ok = false;
    std::string text;                // human-readable report with Q tables

    bool pass() const { return tabular_policy_ok && dqn_policy_ok && q_gap_ok && return_ok; }
};

/// Small-instance cross-check (2 candidates, 3 levels): dynamic-programming
/// solution vs the tabular learner and the network agent. Writes
/// oracle_check.txt under out_dir.
OracleCheckReport run_oracle_check(const ExperimentConfig& cfg, const std::string& out_dir,
                                   const OracleCheckOptions& options = {});

}  // namespace oia
