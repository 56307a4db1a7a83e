#include "oia/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace oia {

void EnvConfig::validate() const {
    if (users < 1 || users > 20)
        throw std::invalid_argument("EnvConfig: users must be in [1, 20], got " +
                                    std::to_string(users));
    if (snr_levels < 2)
        throw std::invalid_argument("EnvConfig: snr_levels must be >= 2");
    if (!(p_stay > 0.0) || p_stay > 1.0)
        throw std::invalid_argument("EnvConfig: p_stay must be in (0, 1]");
    if (!(p_hit >= 0.0) || p_hit > 1.0)
        throw std::invalid_argument("EnvConfig: p_hit must be in [0, 1]");
    if (!(c_total >= 0.0)) throw std::invalid_argument("EnvConfig: c_total must be >= 0");
    if (!(c_csi >= 0.0)) throw std::invalid_argument("EnvConfig: c_csi must be >= 0");
    if (n_t < 1 || n_r < 1)
        throw std::invalid_argument("EnvConfig: antenna counts must be positive");
    if (d != 1)
        throw std::invalid_argument("EnvConfig: rewards are defined for d == 1 streams");
    if (!(noise_var > 0.0)) throw std::invalid_argument("EnvConfig: noise_var must be > 0");
    if (slots_per_episode < 1)
        throw std::invalid_argument("EnvConfig: slots_per_episode must be >= 1");
    ia.validate();
    if (ia.d != d) throw std::invalid_argument("EnvConfig: ia.d must match d");
}

SystemAction::SystemAction(int users, unsigned mask) : users_(users), mask_(mask) {
    if (users < 1 || users > 20)
        throw std::invalid_argument("SystemAction: users must be in [1, 20]");
    if (mask >= (1u << users))
        throw std::invalid_argument("SystemAction: mask " + std::to_string(mask) +
                                    " out of range for " + std::to_string(users) + " users");
}

int SystemAction::count_active() const {
    int n = 0;
    for (int l = 0; l < users_; ++l) n += active(l) ? 1 : 0;
    return n;
}

std::vector<int> SystemAction::active_set() const {
    std::vector<int> set;
    for (int l = 0; l < users_; ++l)
        if (active(l)) set.push_back(l);
    return set;
}

std::vector<SystemAction> enumerate_actions(int users) {
    if (users < 1 || users > 20)
        throw std::invalid_argument("enumerate_actions: users must be in [1, 20]");
    std::vector<SystemAction> actions;
    const unsigned count = 1u << users;
    actions.reserve(count);
    for (unsigned mask = 0; mask < count; ++mask) actions.emplace_back(users, mask);
    return actions;
}

double backhaul_share(int n_active, double c_total, double c_csi) {
    if (n_active < 1)
        throw std::invalid_argument("backhaul_share: n_active must be >= 1");
    const double share = (c_total - c_csi * n_active) / n_active;
    return std::max(0.0, share);
}

std::vector<double> encode_observation(const SystemState& state, int snr_levels) {
    const int users = static_cast<int>(state.snr_levels.size());
    if (static_cast<int>(state.cache_bits.size()) != users)
        throw std::invalid_argument("encode_observation: level/cache length mismatch");
    std::vector<double> obs(static_cast<std::size_t>(users) * (snr_levels + 1), 0.0);
    for (int l = 0; l < users; ++l) {
        const int level = state.snr_levels[l];
        if (level < 0 || level >= snr_levels)
            throw std::invalid_argument("encode_observation: level out of range");
        const std::size_t base = static_cast<std::size_t>(l) * (snr_levels + 1);
        obs[base + level] = 1.0;
        obs[base + snr_levels] = state.cache_bits[l] ? 1.0 : 0.0;
    }
    return obs;
}

SystemState decode_observation(const std::vector<double>& obs, int users, int snr_levels) {
    if (obs.size() != static_cast<std::size_t>(users) * (snr_levels + 1))
        throw std::invalid_argument("decode_observation: length mismatch");
    SystemState state;
    state.snr_levels.resize(users);
    state.cache_bits.resize(users);
    for (int l = 0; l < users; ++l) {
        const std::size_t base = static_cast<std::size_t>(l) * (snr_levels + 1);
        int level = -1;
        for (int h = 0; h < snr_levels; ++h) {
            if (obs[base + h] == 1.0) {
                if (level >= 0)
                    throw std::invalid_argument("decode_observation: block not one-hot");
                level = h;
            } else if (obs[base + h] != 0.0) {
                throw std::invalid_argument("decode_observation: non-binary entry");
            }
        }
        if (level < 0) throw std::invalid_argument("decode_observation: block not one-hot");
        const double bit = obs[base + snr_levels];
        if (bit != 0.0 && bit != 1.0)
            throw std::invalid_argument("decode_observation: non-binary cache bit");
        state.snr_levels[l] = level;
        state.cache_bits[l] = bit == 1.0;
    }
    state.slot = 0;
    return state;
}

double episode_return(const std::vector<double>& rewards, double discount) {
    if (!(discount > 0.0) || !(discount < 1.0))
        throw std::invalid_argument("episode_return: discount must be in (0, 1)");
    double total = 0.0;
    double factor = 1.0;
    for (const double r : rewards) {
        total += factor * r;
        factor *= discount;
    }
    return total;
}

Environment::Environment(EnvConfig cfg)
    : cfg_(std::move(cfg)),
      levels_(SnrLevelSet::uniform(cfg_.snr_levels)),
      transition_(build_transition_matrix(cfg_.p_stay, cfg_.snr_levels)) {
    cfg_.validate();
    try {
        stationary_ = stationary_distribution(transition_);
    } catch (const std::runtime_error&) {
        stationary_.reset();  // reducible kernel (p_stay == 1)
    }
}

const std::vector<double>& Environment::stationary() const {
    if (!stationary_)
        throw std::runtime_error("Environment: level kernel has no unique stationary "
                                 "distribution (p_stay == 1); use reset_uniform()");
    return *stationary_;
}

SystemState Environment::reset(Rng& rng) const {
    const std::vector<double>& pi = stationary();
    SystemState state;
    state.snr_levels.resize(cfg_.users);
    for (int l = 0; l < cfg_.users; ++l) {
        const double u = rng.uniform();
        double acc = 0.0;
        int level = cfg_.snr_levels - 1;
        for (int h = 0; h < cfg_.snr_levels; ++h) {
            acc += pi[h];
            if (u < acc) {
                level = h;
                break;
            }
        }
        state.snr_levels[l] = level;
    }
    state.cache_bits = sample_cache_states(cfg_.p_hit, cfg_.users, rng);
    state.slot = 0;
    return state;
}

SystemState Environment::reset_uniform(Rng& rng) const {
    SystemState state;
    state.snr_levels.resize(cfg_.users);
    for (int l = 0; l < cfg_.users; ++l)
        state.snr_levels[l] = static_cast<int>(rng.uniform_int(cfg_.snr_levels));
    state.cache_bits = sample_cache_states(cfg_.p_hit, cfg_.users, rng);
    state.slot = 0;
    return state;
}

StepOutcome Environment::step(const SystemState& state, const SystemAction& action,
                              Rng& rng) const {
    if (static_cast<int>(state.snr_levels.size()) != cfg_.users ||
        static_cast<int>(state.cache_bits.size()) != cfg_.users)
        throw std::invalid_argument("Environment::step: state size mismatch");
    if (action.users() != cfg_.users)
        throw std::invalid_argument("Environment::step: action size mismatch");

    StepOutcome out;
    out.n_active = action.count_active();

    // Draw order is part of the reproducibility contract: fast fading,
    // then the alignment solver's precoder init, then the level walk,
    // then next slot's cache bits.
    const ChannelRealization channels =
        sample_channel_matrices(cfg_.users, cfg_.n_t, cfg_.n_r, rng);

    IaSolution solution;
    const bool aligned = out.n_active >= 1;
    if (aligned) {
        solution = solve_ia(channels, action.active_set(), cfg_.ia, rng);
        out.leakage = solution.leakage;
        out.ia_iterations = solution.iterations_used;
    }

    out.per_user_rewards =
        per_user_rewards(state, action, channels, aligned ? &solution : nullptr);
    out.reward = 0.0;
    for (const double r : out.per_user_rewards) out.reward += r;

    out.next_state.snr_levels.resize(cfg_.users);
    for (int l = 0; l < cfg_.users; ++l)
        out.next_state.snr_levels[l] = step_state(state.snr_levels[l], transition_, rng);
    out.next_state.cache_bits = sample_cache_states(cfg_.p_hit, cfg_.users, rng);
    out.next_state.slot = state.slot + 1;
    return out;
}

std::vector<double> Environment::per_user_rewards(const SystemState& state,
                                                  const SystemAction& action,
                                                  const ChannelRealization& channels,
                                                  const IaSolution* solution) const {
    const std::vector<int> active = action.active_set();
    const int n_active = static_cast<int>(active.size());
    if (n_active > 0 && solution == nullptr)
        throw std::invalid_argument("per_user_rewards: active action needs an IA solution");

    std::vector<double> rewards(cfg_.users, 0.0);
    if (n_active == 0) return rewards;
    if (static_cast<int>(solution->active_set.size()) != n_active ||
        !std::equal(active.begin(), active.end(), solution->active_set.begin()))
        throw std::invalid_argument("per_user_rewards: solution active set mismatch");

    const double share = backhaul_share(n_active, cfg_.c_total, cfg_.c_csi);
    std::vector<double> powers(n_active);
    for (int i = 0; i < n_active; ++i)
        powers[i] = snr_to_linear(state.snr_levels[active[i]], levels_) * cfg_.noise_var;

    for (int i = 0; i < n_active; ++i) {
        const int l = active[i];
        const double signal =
            effective_gain(solution->combiners[i], channels.link(l, l),
                           solution->precoders[i]) *
            powers[i];
        double interference = 0.0;
        for (int j = 0; j < n_active; ++j) {
            if (j == i) continue;
            interference += effective_gain(solution->combiners[i],
                                           channels.link(l, active[j]),
                                           solution->precoders[j]) *
                            powers[j];
        }
        const double sinr = signal / (interference + cfg_.noise_var);
        const double rate = std::log2(1.0 + sinr);
        rewards[l] = state.cache_bits[l] ? rate : std::min(share, rate);
    }
    return rewards;
}

}  // namespace oia
