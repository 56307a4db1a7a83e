#include "oia/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace oia {
namespace {

constexpr long kMaxTableEntries = 10'000'000;
constexpr long kMaxOracleStates = 10'000;
constexpr int kMaxOracleActions = 64;
constexpr double kValueIterationTol = 1e-10;

/// One factorized-kernel contraction: out[s] = sum over successor states of
/// the product transition probability times v, done one candidate digit at
/// a time in O(L * S * 2H).
std::vector<double> expected_successor(const std::vector<double>& v, int users, int base,
                                       const std::vector<double>& kernel) {
    const long states = static_cast<long>(v.size());
    std::vector<double> cur = v;
    std::vector<double> next(v.size());
    long stride = 1;
    for (int i = 0; i < users; ++i) {
        for (long s = 0; s < states; ++s) {
            const int digit = static_cast<int>((s / stride) % base);
            const long origin = s - static_cast<long>(digit) * stride;
            const double* row = kernel.data() + static_cast<std::size_t>(digit) * base;
            double acc = 0.0;
            for (int d = 0; d < base; ++d) acc += row[d] * cur[origin + stride * d];
            next[s] = acc;
        }
        std::swap(cur, next);
        stride *= base;
    }
    return cur;
}

}  // namespace

long state_count(int users, int snr_levels) {
    if (users < 1 || snr_levels < 2)
        throw std::invalid_argument("state_count: need users >= 1 and snr_levels >= 2");
    const long base = 2L * snr_levels;
    long count = 1;
    for (int i = 0; i < users; ++i) {
        if (count > std::numeric_limits<long>::max() / base)
            throw std::invalid_argument("state_count: state space overflows");
        count *= base;
    }
    return count;
}

long state_index(const SystemState& state, int snr_levels) {
    const int users = static_cast<int>(state.snr_levels.size());
    if (static_cast<int>(state.cache_bits.size()) != users)
        throw std::invalid_argument("state_index: level/cache length mismatch");
    const long base = 2L * snr_levels;
    long index = 0;
    long stride = 1;
    for (int i = 0; i < users; ++i) {
        const int level = state.snr_levels[i];
        if (level < 0 || level >= snr_levels)
            throw std::invalid_argument("state_index: level out of range");
        index += (static_cast<long>(level) * 2 + (state.cache_bits[i] ? 1 : 0)) * stride;
        stride *= base;
    }
    return index;
}

SystemState state_from_index(long index, int users, int snr_levels) {
    const long states = state_count(users, snr_levels);
    if (index < 0 || index >= states)
        throw std::invalid_argument("state_from_index: index out of range");
    const long base = 2L * snr_levels;
    SystemState state;
    state.snr_levels.resize(users);
    state.cache_bits.resize(users);
    for (int i = 0; i < users; ++i) {
        const long digit = index % base;
        state.snr_levels[i] = static_cast<int>(digit / 2);
        state.cache_bits[i] = (digit % 2) == 1;
        index /= base;
    }
    state.slot = 0;
    return state;
}

TabularQ::TabularQ(int users, int snr_levels)
    : users_(users), snr_levels_(snr_levels), states_(state_count(users, snr_levels)) {
    if (users > 20) throw std::invalid_argument("TabularQ: users must be <= 20");
    const long entries = states_ * static_cast<long>(action_count());
    if (entries > kMaxTableEntries)
        throw std::invalid_argument("TabularQ: table would hold " + std::to_string(entries) +
                                    " entries");
    q_.assign(static_cast<std::size_t>(entries), 0.0);
    visits_.assign(static_cast<std::size_t>(entries), 0);
}

std::size_t TabularQ::offset(long state, int action) const {
    if (state < 0 || state >= states_)
        throw std::out_of_range("TabularQ: state index out of range");
    if (action < 0 || action >= action_count())
        throw std::out_of_range("TabularQ: action index out of range");
    return static_cast<std::size_t>(state) * action_count() + action;
}

double TabularQ::max_value(long state) const {
    double best = value(state, 0);
    for (int a = 1; a < action_count(); ++a) best = std::max(best, value(state, a));
    return best;
}

int TabularQ::greedy(long state) const {
    int best = 0;
    for (int a = 1; a < action_count(); ++a)
        if (value(state, a) > value(state, best)) best = a;
    return best;
}

void TabularQ::update(long state, int action, double reward, long next_state, long count,
                      double discount) {
    if (count < 0) throw std::invalid_argument("TabularQ::update: count must be >= 0");
    if (!(discount > 0.0) || !(discount < 1.0))
        throw std::invalid_argument("TabularQ::update: discount must be in (0, 1)");
    const double alpha = 1.0 / (1.0 + static_cast<double>(count));
    const std::size_t idx = offset(state, action);
    const double td = reward + discount * max_value(next_state) - q_[idx];
    q_[idx] += alpha * td;
}

void TabularQ::step(long state, int action, double reward, long next_state, double discount) {
    const std::size_t idx = offset(state, action);
    update(state, action, reward, next_state, visits_[idx], discount);
    ++visits_[idx];
}

TabularQ run_tabular_q(const EnvConfig& cfg, long steps, double discount, Rng& rng) {
    cfg.validate();
    if (steps < 0) throw std::invalid_argument("run_tabular_q: steps must be >= 0");
    const Environment env(cfg);
    TabularQ table(cfg.users, cfg.snr_levels);
    if (steps == 0) return table;

    SystemState state = env.has_stationary() ? env.reset(rng) : env.reset_uniform(rng);
    long s = state_index(state, cfg.snr_levels);
    for (long i = 0; i < steps; ++i) {
        const int action = static_cast<int>(rng.uniform_int(table.action_count()));
        const StepOutcome out =
            env.step(state, SystemAction(cfg.users, static_cast<unsigned>(action)), rng);
        const long s_next = state_index(out.next_state, cfg.snr_levels);
        table.step(s, action, out.reward, s_next, discount);
        state = out.next_state;
        s = s_next;
    }
    return table;
}

OracleResult value_iteration_oracle(const EnvConfig& cfg, int mc_samples, double discount,
                                    std::uint64_t seed) {
    cfg.validate();
    if (mc_samples < 1)
        throw std::invalid_argument("value_iteration_oracle: mc_samples must be >= 1");
    if (!(discount > 0.0) || !(discount < 1.0))
        throw std::invalid_argument("value_iteration_oracle: discount must be in (0, 1)");
    const long states = state_count(cfg.users, cfg.snr_levels);
    if (states > kMaxOracleStates)
        throw std::invalid_argument("value_iteration_oracle: " + std::to_string(states) +
                                    " states exceeds the small-instance limit");
    const int actions = 1 << cfg.users;
    if (actions > kMaxOracleActions)
        throw std::invalid_argument("value_iteration_oracle: action space too large");

    const Environment env(cfg);
    OracleResult result;
    result.users = cfg.users;
    result.snr_levels = cfg.snr_levels;
    result.reward_table.assign(static_cast<std::size_t>(states) * actions, 0.0);

    // Each (state, action) cell runs on its own derived stream, so the
    // estimates do not depend on scheduling.
    const long cells = states * actions;
#pragma omp parallel for schedule(dynamic, 4)
    for (long cell = 0; cell < cells; ++cell) {
        const long s = cell / actions;
        const int a = static_cast<int>(cell % actions);
        const SystemState state = state_from_index(s, cfg.users, cfg.snr_levels);
        const SystemAction action(cfg.users, static_cast<unsigned>(a));
        const std::vector<int> active = action.active_set();
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(a)));
        double acc = 0.0;
        for (int m = 0; m < mc_samples; ++m) {
            const ChannelRealization channels =
                sample_channel_matrices(cfg.users, cfg.n_t, cfg.n_r, rng);
            IaSolution solution;
            if (!active.empty()) solution = solve_ia(channels, active, cfg.ia, rng);
            const std::vector<double> rewards = env.per_user_rewards(
                state, action, channels, active.empty() ? nullptr : &solution);
            for (const double r : rewards) acc += r;
        }
        result.reward_table[static_cast<std::size_t>(cell)] = acc / mc_samples;
    }

    // Exact per-candidate kernel on (level, cache) digits.
    const int base = 2 * cfg.snr_levels;
    const TransitionMatrix& transition = env.transition();
    std::vector<double> kernel(static_cast<std::size_t>(base) * base);
    for (int h = 0; h < cfg.snr_levels; ++h)
        for (int c = 0; c < 2; ++c)
            for (int h2 = 0; h2 < cfg.snr_levels; ++h2)
                for (int c2 = 0; c2 < 2; ++c2)
                    kernel[static_cast<std::size_t>(h * 2 + c) * base + (h2 * 2 + c2)] =
                        transition(h, h2) * (c2 == 1 ? cfg.p_hit : 1.0 - cfg.p_hit);

    std::vector<double> myopic(states);
    for (long s = 0; s < states; ++s) {
        const double* row = result.reward_table.data() + static_cast<std::size_t>(s) * actions;
        myopic[s] = *std::max_element(row, row + actions);
    }

    // The kernel does not depend on the action, so each sweep is
    // V <- max_a R(x,a) + discount * E[V at the successor].
    result.values.assign(static_cast<std::size_t>(states), 0.0);
    result.sweeps = 0;
    while (true) {
        const std::vector<double> ev =
            expected_successor(result.values, cfg.users, base, kernel);
        double delta = 0.0;
        for (long s = 0; s < states; ++s) {
            const double updated = myopic[s] + discount * ev[s];
            delta = std::max(delta, std::abs(updated - result.values[s]));
            result.values[s] = updated;
        }
        ++result.sweeps;
        if (delta < kValueIterationTol) break;
        if (result.sweeps > 100000)
            throw std::runtime_error("value_iteration_oracle: failed to converge");
    }

    const std::vector<double> ev = expected_successor(result.values, cfg.users, base, kernel);
    result.q_table.resize(result.reward_table.size());
    result.policy.resize(static_cast<std::size_t>(states));
    for (long s = 0; s < states; ++s) {
        unsigned best = 0;
        for (int a = 0; a < actions; ++a) {
            const std::size_t idx = static_cast<std::size_t>(s) * actions + a;
            result.q_table[idx] = result.reward_table[idx] + discount * ev[s];
            if (result.q_table[idx] > result.q_table[static_cast<std::size_t>(s) * actions + best])
                best = static_cast<unsigned>(a);
        }
        result.policy[s] = best;
    }
    return result;
}

}  // namespace oia
