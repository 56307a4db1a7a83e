#include "oia/fsmc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace oia {

SnrLevelSet::SnrLevelSet(std::vector<double> boundaries_db)
    : boundaries_db_(std::move(boundaries_db)) {
    if (boundaries_db_.empty())
        throw std::invalid_argument("SnrLevelSet: at least two levels required");
    for (size_t i = 1; i < boundaries_db_.size(); ++i)
        if (!(boundaries_db_[i - 1] < boundaries_db_[i]))
            throw std::invalid_argument("SnrLevelSet: boundaries must be strictly increasing");
}

SnrLevelSet SnrLevelSet::uniform(int h, double start_db, double width_db) {
    if (h < 2) throw std::invalid_argument("SnrLevelSet: H must be at least 2");
    std::vector<double> b(h - 1);
    for (int i = 0; i < h - 1; ++i) b[i] = start_db + width_db * i;
    return SnrLevelSet(std::move(b));
}

double SnrLevelSet::level_db(int level) const {
    const int h = level_count();
    if (level < 0 || level >= h) throw std::out_of_range("SnrLevelSet: level out of range");
    constexpr double kFallbackEdgeWidth = 5.0;  // used when no interior interval exists
    if (level == 0) {
        const double width =
            h >= 3 ? boundaries_db_[1] - boundaries_db_[0] : kFallbackEdgeWidth;
        return boundaries_db_.front() - 0.5 * width;
    }
    if (level == h - 1) {
        const double width =
            h >= 3 ? boundaries_db_[h - 2] - boundaries_db_[h - 3] : kFallbackEdgeWidth;
        return boundaries_db_.back() + 0.5 * width;
    }
    return 0.5 * (boundaries_db_[level - 1] + boundaries_db_[level]);
}

double snr_to_linear(int level, const SnrLevelSet& levels) {
    return std::pow(10.0, levels.level_db(level) / 10.0);
}

TransitionMatrix::TransitionMatrix(int h, std::vector<double> entries)
    : h_(h), entries_(std::move(entries)) {
    if (h_ < 2 || entries_.size() != static_cast<size_t>(h_) * h_)
        throw std::invalid_argument("TransitionMatrix: bad shape");
    for (double e : entries_)
        if (!(e >= 0.0 && e <= 1.0))
            throw std::invalid_argument("TransitionMatrix: entry outside [0,1]");
    for (int r = 0; r < h_; ++r) {
        double sum = 0.0;
        for (int c = 0; c < h_; ++c) sum += entries_[r * h_ + c];
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("TransitionMatrix: row " + std::to_string(r) +
                                        " does not sum to 1");
    }
}

void TransitionMatrix::write_csv(std::ostream& os) const {
    char buf[64];
    for (int r = 0; r < h_; ++r) {
        for (int c = 0; c < h_; ++c) {
            auto res = std::to_chars(buf, buf + sizeof buf, entries_[r * h_ + c]);
            os.write(buf, res.ptr - buf);
            os.put(c + 1 == h_ ? '\n' : ',');
        }
    }
}

TransitionMatrix build_transition_matrix(double p_stay, int h) {
    if (!(p_stay > 0.0 && p_stay <= 1.0))
        throw std::invalid_argument("build_transition_matrix: p_stay must be in (0,1]");
    if (h < 2) throw std::invalid_argument("build_transition_matrix: H must be at least 2");
    std::vector<double> entries(static_cast<size_t>(h) * h, 0.0);
    const double residual = 1.0 - p_stay;
    for (int r = 0; r < h; ++r) {
        const bool edge = (r == 0 || r == h - 1);
        // Row sum: p_stay + 2q * n_adjacent + q * n_nonadjacent = 1.
        const double q = edge ? residual / h : residual / (h + 1);
        for (int c = 0; c < h; ++c) {
            if (c == r)
                entries[r * h + c] = p_stay;
            else if (std::abs(c - r) == 1)
                entries[r * h + c] = 2.0 * q;
            else
                entries[r * h + c] = q;
        }
    }
    return TransitionMatrix(h, std::move(entries));
}

int step_state(int level, const TransitionMatrix& t, Rng& rng) {
    const int h = t.size();
    if (level < 0 || level >= h) throw std::out_of_range("step_state: level out of range");
    const double u = rng.uniform();
    double acc = 0.0;
    for (int c = 0; c < h; ++c) {
        acc += t(level, c);
        if (u < acc) return c;
    }
    return h - 1;  // guards against accumulated rounding at u ~ 1
}

namespace {

// Strong connectivity of the positive-entry digraph: forward and backward
// reachability from node 0 must both cover all nodes.
bool irreducible(const TransitionMatrix& t) {
    const int h = t.size();
    auto reach = [&](bool forward) {
        std::vector<char> seen(h, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < h; ++v) {
                const double p = forward ? t(u, v) : t(v, u);
                if (p > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == h;
    };
    return reach(true) && reach(false);
}

}  // namespace

std::vector<double> stationary_distribution(const TransitionMatrix& t) {
    const int h = t.size();
    if (!irreducible(t))
        throw std::runtime_error("stationary_distribution: kernel is reducible");
    std::vector<double> pi(h, 1.0 / h), next(h);
    for (long iter = 0; iter < 1000000; ++iter) {
        for (int c = 0; c < h; ++c) {
            double s = 0.0;
            for (int r = 0; r < h; ++r) s += pi[r] * t(r, c);
            next[c] = s;
        }
        double delta = 0.0;
        for (int c = 0; c < h; ++c) delta = std::max(delta, std::abs(next[c] - pi[c]));
        pi.swap(next);
        if (delta < 1e-12) return pi;
    }
    throw std::runtime_error("stationary_distribution: no convergence after 1e6 iterations");
}

ChannelRealization sample_channel_matrices(int users, int n_t, int n_r, Rng& rng) {
    if (users < 1 || n_t < 1 || n_r < 1)
        throw std::invalid_argument("sample_channel_matrices: dimensions must be positive");
    ChannelRealization out;
    out.users = users;
    out.matrices.reserve(static_cast<size_t>(users) * users);
    for (int k = 0; k < users; ++k)
        for (int j = 0; j < users; ++j)
            out.matrices.push_back(random_gaussian_matrix(n_r, n_t, rng));
    return out;
}

}  // namespace oia
