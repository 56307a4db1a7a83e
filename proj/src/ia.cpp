#include "oia/ia.hpp"

#include <algorithm>
#include <stdexcept>

namespace oia {

void IaConfig::validate() const {
    if (d < 1) throw std::invalid_argument("IaConfig: d must be at least 1");
    if (max_iter < 1) throw std::invalid_argument("IaConfig: max_iter must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("IaConfig: tol must be positive");
}

bool feasibility(int n_t, int n_r, int d, int n_active) {
    if (n_t < 1 || n_r < 1 || d < 1 || n_active < 1)
        throw std::invalid_argument("feasibility: arguments must be positive");
    return n_t + n_r >= d * (n_active + 1);
}

double leakage(const ChannelRealization& channels, const IaSolution& solution) {
    const int n = static_cast<int>(solution.active_set.size());
    double total = 0.0;
    for (int ki = 0; ki < n; ++ki) {
        const int k = solution.active_set[ki];
        const ComplexMatrix u_adj = solution.combiners[ki].adjoint();
        for (int ji = 0; ji < n; ++ji) {
            if (ji == ki) continue;
            const int j = solution.active_set[ji];
            total += (u_adj * channels.link(k, j) * solution.precoders[ji]).frobenius_norm_sq();
        }
    }
    return total;
}

IaSolution solve_ia(const ChannelRealization& channels, const std::vector<int>& active_set,
                    const IaConfig& cfg, Rng& rng) {
    cfg.validate();
    if (active_set.empty()) throw std::invalid_argument("solve_ia: active set is empty");
    for (int k : active_set)
        if (k < 0 || k >= channels.users)
            throw std::invalid_argument("solve_ia: active user index out of range");

    const int n = static_cast<int>(active_set.size());
    const int n_r = channels.link(active_set[0], active_set[0]).rows();
    const int n_t = channels.link(active_set[0], active_set[0]).cols();
    if (cfg.d > n_t || cfg.d > n_r)
        throw std::invalid_argument("solve_ia: more streams than antennas");
    for (int k : active_set)
        for (int j : active_set) {
            const ComplexMatrix& h = channels.link(k, j);
            if (h.rows() != n_r || h.cols() != n_t)
                throw std::invalid_argument("solve_ia: inconsistent channel dimensions");
        }

    IaSolution sol;
    sol.active_set = active_set;
    sol.precoders.reserve(n);
    for (int i = 0; i < n; ++i) sol.precoders.push_back(random_orthonormal_columns(n_t, cfg.d, rng));
    sol.combiners.assign(n, ComplexMatrix());

    if (n == 1) {
        // No interferers: any orthonormal combiner works and leakage is zero.
        sol.combiners[0] = smallest_eigvecs(ComplexMatrix::zero(n_r, n_r), cfg.d);
        sol.leakage = 0.0;
        sol.iterations_used = 1;
        sol.leakage_history.push_back(0.0);
        return sol;
    }

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        // Forward pass: combiners point away from the interference seen at
        // each receiver.
        for (int ki = 0; ki < n; ++ki) {
            const int k = sol.active_set[ki];
            ComplexMatrix cov = ComplexMatrix::zero(n_r, n_r);
            for (int ji = 0; ji < n; ++ji) {
                if (ji == ki) continue;
                const ComplexMatrix hv = channels.link(k, sol.active_set[ji]) * sol.precoders[ji];
                cov = cov + hv * hv.adjoint();
            }
            sol.combiners[ki] = smallest_eigvecs(cov, cfg.d);
        }
        // Reciprocal pass: precoders avoid the interference their transmitter
        // would cause in the adjoint network.
        for (int ji = 0; ji < n; ++ji) {
            const int j = sol.active_set[ji];
            ComplexMatrix cov = ComplexMatrix::zero(n_t, n_t);
            for (int ki = 0; ki < n; ++ki) {
                if (ki == ji) continue;
                const ComplexMatrix hu =
                    channels.link(sol.active_set[ki], j).adjoint() * sol.combiners[ki];
                cov = cov + hu * hu.adjoint();
            }
            sol.precoders[ji] = smallest_eigvecs(cov, cfg.d);
        }

        sol.iterations_used = iter + 1;
        sol.leakage = leakage(channels, sol);
        sol.leakage_history.push_back(sol.leakage);
        if (sol.leakage < cfg.tol) break;
    }
    return sol;
}

std::vector<bool> desired_rank_check(const IaSolution& solution,
                                     const ChannelRealization& channels, int d) {
    std::vector<bool> ok(solution.active_set.size());
    for (size_t i = 0; i < solution.active_set.size(); ++i) {
        const int k = solution.active_set[i];
        const ComplexMatrix eff =
            solution.combiners[i].adjoint() * channels.link(k, k) * solution.precoders[i];
        const std::vector<double> sv = singular_values(eff);
        ok[i] = sv.size() >= static_cast<size_t>(d) && sv[d - 1] > 1e-6;
    }
    return ok;
}

double effective_gain(const ComplexMatrix& u, const ComplexMatrix& h, const ComplexMatrix& v) {
    if (u.cols() != 1 || v.cols() != 1)
        throw std::invalid_argument("effective_gain: single-stream vectors expected");
    const ComplexMatrix scalar = u.adjoint() * h * v;
    return std::norm(scalar(0, 0));
}

}  // namespace oia
