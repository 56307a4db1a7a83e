#pragma once

#include <vector>

#include "oia/complexmat.hpp"
#include "oia/fsmc.hpp"
#include "oia/rng.hpp"

namespace oia {

/// Solver knobs for the alternating leakage minimization.
struct IaConfig {
    int d = 1;             // data streams per user
    int max_iter = 5000;   // iteration cap
    double tol = 1e-8;     // stop once total leakage falls below this

    void validate() const;
};

/// Precoders/combiners for one active set, plus the residual interference
/// the solver stopped at. Columns of every precoder and combiner are
/// orthonormal.
struct IaSolution {
    std::vector<int> active_set;            // user indices, ascending
    std::vector<ComplexMatrix> precoders;   // per active user, N_t x d
    std::vector<ComplexMatrix> combiners;   // per active user, N_r x d
    double leakage = 0.0;
    int iterations_used = 0;
    std::vector<double> leakage_history;    // leakage after each iteration
};

/// True when an IA network of n_active users is proper:
/// N_t + N_r >= d * (n_active + 1).
bool feasibility(int n_t, int n_r, int d, int n_active);

/// Total residual interference power after combining:
/// sum over ordered active pairs (k, j), k != j, of
/// ||U_k^dagger H_kj V_j||_F^2.
double leakage(const ChannelRealization& channels, const IaSolution& solution);

/// Alternating minimization over the forward and reciprocal networks:
/// with precoders fixed, each combiner takes the d smallest-eigenvalue
/// eigenvectors of its interference covariance; the roles then swap
/// through the adjoint channels. Leakage never increases between
/// iterations. Infeasible sets are legal inputs; the solver simply stops
/// at whatever positive leakage it reaches.
IaSolution solve_ia(const ChannelRealization& channels, const std::vector<int>& active_set,
                    const IaConfig& cfg, Rng& rng);

/// Per active user: does the combined direct channel keep all d streams,
/// i.e. is the d-th largest singular value of U^dagger H_kk V above 1e-6?
std::vector<bool> desired_rank_check(const IaSolution& solution,
                                     const ChannelRealization& channels, int d);

/// |u^dagger H v|^2 for single-stream (column vector) u, v.
double effective_gain(const ComplexMatrix& u, const ComplexMatrix& h, const ComplexMatrix& v);

}  // namespace oia
