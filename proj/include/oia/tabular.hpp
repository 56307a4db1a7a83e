#pragma once

#include <cstdint>
#include <vector>

#include "oia/env.hpp"
#include "oia/rng.hpp"

namespace oia {

/// Number of joint states (2H)^L. Throws when it would overflow a long.
long state_count(int users, int snr_levels);

/// Mixed-radix index: candidate i contributes (level_i * 2 + cache_i) times
/// (2H)^i. Inverse of state_from_index.
long state_index(const SystemState& state, int snr_levels);
SystemState state_from_index(long index, int users, int snr_levels);

/// Dense Q table with per-pair visit counts for the decaying-rate rule.
class TabularQ {
public:
    TabularQ(int users, int snr_levels);

    int users() const { return users_; }
    int snr_levels() const { return snr_levels_; }
    int action_count() const { return 1 << users_; }
    long states() const { return states_; }

    double value(long state, int action) const { return q_[offset(state, action)]; }
    long visits(long state, int action) const { return visits_[offset(state, action)]; }
    double max_value(long state) const;
    int greedy(long state) const;  // lowest-index argmax

    /// Q(x,a) += alpha * (r + discount * max_a' Q(x',a') - Q(x,a)) with the
    /// caller-supplied visit count setting alpha = 1 / (1 + count).
    void update(long state, int action, double reward, long next_state, long count,
                double discount);

    /// update() with the stored count, which is then incremented.
    void step(long state, int action, double reward, long next_state, double discount);

private:
    std::size_t offset(long state, int action) const;

    int users_;
    int snr_levels_;
    long states_;
    std::vector<double> q_;
    std::vector<long> visits_;
};

/// Off-policy tabular Q-learning on the live environment: uniformly random
/// actions on one continuing trajectory.
TabularQ run_tabular_q(const EnvConfig& cfg, long steps, double discount, Rng& rng);

struct OracleResult {
    int users = 0;
    int snr_levels = 0;
    std::vector<double> reward_table;  // [state * actions + action], Monte Carlo mean
    std::vector<double> q_table;       // reward_table + discount * E[V* at successor]
    std::vector<double> values;        // V*
    std::vector<unsigned> policy;      // lowest-index argmax per state
    int sweeps = 0;

    int action_count() const { return 1 << users; }
};

/// Exact dynamic-programming solution of a small instance. One-step rewards
/// are estimated with mc_samples Monte Carlo draws per (state, action), each
/// pair on its own derived stream (so the table is independent of thread
/// count); the transition kernel is exact because levels and cache evolve
/// independently of the action. Values are iterated to sup-norm change
/// below 1e-10. Requires at most 10^4 states and 64 actions.
OracleResult value_iteration_oracle(const EnvConfig& cfg, int mc_samples, double discount,
                                    std::uint64_t seed);

}  // namespace oia
