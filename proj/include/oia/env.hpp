#pragma once

#include <optional>
#include <vector>

#include "oia/cache.hpp"
#include "oia/fsmc.hpp"
#include "oia/ia.hpp"
#include "oia/rng.hpp"

namespace oia {

/// Scenario parameters for the scheduling environment.
struct EnvConfig {
    int users = 5;               // L candidates
    int snr_levels = 10;         // H quantized SNR levels
    double p_stay = 0.489;       // FSMC self-transition probability
    double p_hit = 0.5;          // cache hit probability
    double c_total = 60.0;       // total backhaul capacity, bits/s/Hz
    double c_csi = 2.0;          // CSI-exchange share per active user, bits/s/Hz
    int n_t = 3;                 // transmit antennas
    int n_r = 3;                 // receive antennas
    int d = 1;                   // streams per user (rewards require 1)
    double noise_var = 1.0;      // sigma^2
    int slots_per_episode = 50;  // T
    IaConfig ia;

    void validate() const;
};

/// Joint scheduler state: one (SNR level, cache bit) pair per candidate.
struct SystemState {
    std::vector<int> snr_levels;
    CacheStateVector cache_bits;
    long slot = 0;

    bool operator==(const SystemState& o) const {
        return snr_levels == o.snr_levels && cache_bits == o.cache_bits;
    }
};

/// Active/passive mask over the L candidates. Bit l of the index is
/// candidate l's flag (candidate 0 on the least significant bit), which
/// fixes the bitmask <-> index bijection.
class SystemAction {
public:
    SystemAction(int users, unsigned mask);

    int users() const { return users_; }
    unsigned index() const { return mask_; }
    bool active(int l) const { return (mask_ >> l) & 1u; }
    int count_active() const;
    std::vector<int> active_set() const;  // ascending user indices

    bool operator==(const SystemAction& o) const {
        return users_ == o.users_ && mask_ == o.mask_;
    }

private:
    int users_;
    unsigned mask_;
};

/// All 2^L actions in index order. Guarded to L <= 20.
std::vector<SystemAction> enumerate_actions(int users);

/// Per-active-user backhaul capacity after CSI exchange:
/// max(0, (C_total - C_csi * n_active) / n_active). n_active must be >= 1.
double backhaul_share(int n_active, double c_total, double c_csi);

/// Network input featurization: per candidate a one-hot block of length H
/// for the SNR level followed by the cache bit. Total length L*(H+1).
std::vector<double> encode_observation(const SystemState& state, int snr_levels);

/// Inverse of encode_observation (slot index not recoverable, set to 0).
SystemState decode_observation(const std::vector<double>& obs, int users, int snr_levels);

/// Discounted sum over slots: sum_t discount^t * rewards[t]. 0 < discount < 1.
double episode_return(const std::vector<double>& rewards, double discount);

struct StepOutcome {
    SystemState next_state;
    double reward = 0.0;                  // sum of per-user rewards
    std::vector<double> per_user_rewards;
    double leakage = 0.0;                 // residual the solver stopped at
    int n_active = 0;
    int ia_iterations = 0;
};

/// The scheduling MDP. One instance is a single-threaded state machine;
/// run replicas with independent Rng streams for parallel experiments.
class Environment {
public:
    explicit Environment(EnvConfig cfg);

    const EnvConfig& config() const { return cfg_; }
    const TransitionMatrix& transition() const { return transition_; }
    const SnrLevelSet& levels() const { return levels_; }

    /// False when the level kernel is reducible (p_stay == 1), in which
    /// case reset() throws and reset_uniform() is the documented fallback.
    bool has_stationary() const { return stationary_.has_value(); }
    const std::vector<double>& stationary() const;

    /// Fresh state: levels from the stationary distribution, cache bits
    /// from their Bernoulli draw, slot 0.
    SystemState reset(Rng& rng) const;

    /// Fallback initial state with uniformly random levels.
    SystemState reset_uniform(Rng& rng) const;

    /// One decision epoch: draw fast fading, align the chosen active set,
    /// score every candidate, then advance levels and cache bits. The
    /// reward uses the state the action was chosen under; the transition
    /// happens afterwards.
    StepOutcome step(const SystemState& state, const SystemAction& action, Rng& rng) const;

    /// Reward vector for a frozen channel realization. `solution` may be
    /// null only when the action has no active user. Shared by step(), the
    /// planning oracle and the baselines so they all score identically.
    std::vector<double> per_user_rewards(const SystemState& state, const SystemAction& action,
                                         const ChannelRealization& channels,
                                         const IaSolution* solution) const;

private:
    EnvConfig cfg_;
    SnrLevelSet levels_;
    TransitionMatrix transition_;
    std::optional<std::vector<double>> stationary_;
};

}  // namespace oia
