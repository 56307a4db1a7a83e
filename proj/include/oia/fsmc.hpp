#pragma once

#include <ostream>
#include <vector>

#include "oia/complexmat.hpp"
#include "oia/rng.hpp"

namespace oia {

/// Quantized SNR levels. A set of H levels is described by the H-1 finite
/// dB thresholds between them; the lowest and highest intervals are
/// open-ended.
class SnrLevelSet {
public:
    /// boundaries_db must be strictly increasing and non-empty.
    explicit SnrLevelSet(std::vector<double> boundaries_db);

    /// Evenly spaced thresholds start, start+width, ..., for H levels.
    /// Defaults give the 5 dB grid 5, 10, ..., 5*(H-1).
    static SnrLevelSet uniform(int h, double start_db = 5.0, double width_db = 5.0);

    int level_count() const { return static_cast<int>(boundaries_db_.size()) + 1; }
    const std::vector<double>& boundaries_db() const { return boundaries_db_; }

    /// Representative dB value of a level: the midpoint of its interval.
    /// The two open-ended intervals are clamped to the width of the
    /// neighbouring interior interval (5 dB when only two levels exist)
    /// before the midpoint is taken.
    double level_db(int level) const;

private:
    std::vector<double> boundaries_db_;
};

/// Linear SNR for a level: 10^(midpoint_dB / 10).
double snr_to_linear(int level, const SnrLevelSet& levels);

/// Row-stochastic transition kernel over SNR levels. Construction enforces
/// the structural constraint that each row's transition probability to an
/// adjacent level is exactly twice the probability to any non-adjacent
/// level.
class TransitionMatrix {
public:
    TransitionMatrix() = default;
    TransitionMatrix(int h, std::vector<double> entries);

    int size() const { return h_; }
    double operator()(int from, int to) const { return entries_[from * h_ + to]; }
    const std::vector<double>& entries() const { return entries_; }

    /// Row-major CSV dump with full-precision decimal entries.
    void write_csv(std::ostream& os) const;

private:
    int h_ = 0;
    std::vector<double> entries_;
};

/// Builds the kernel with diagonal p_stay and the 2:1 adjacent/non-adjacent
/// ratio. Per row, the base probability q solves the row-sum constraint:
/// interior rows q = (1-p_stay)/(H+1), edge rows q = (1-p_stay)/H.
/// Requires 0 < p_stay <= 1 and H >= 2; p_stay == 1 yields the identity.
TransitionMatrix build_transition_matrix(double p_stay, int h);

/// Samples the successor of `level` from its row of t.
int step_state(int level, const TransitionMatrix& t, Rng& rng);

/// Fixed point pi with pi*T = pi, by repeated multiplication until the
/// max-norm change drops below 1e-12. Throws std::runtime_error for
/// reducible kernels (e.g. the identity) or non-convergence.
std::vector<double> stationary_distribution(const TransitionMatrix& t);

/// One slot's worth of fast-fading coefficients: an N_r x N_t matrix per
/// ordered (receiver, transmitter) pair, entries i.i.d. CN(0,1).
struct ChannelRealization {
    int users = 0;
    long slot = 0;
    std::vector<ComplexMatrix> matrices;  // index receiver*users + transmitter

    const ComplexMatrix& link(int receiver, int transmitter) const {
        return matrices[receiver * users + transmitter];
    }
};

ChannelRealization sample_channel_matrices(int users, int n_t, int n_r, Rng& rng);

}  // namespace oia
