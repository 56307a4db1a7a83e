#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "oia/rng.hpp"

namespace oia {

/// One interaction tuple (x, a, r, x').
struct Experience {
    std::vector<double> observation;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_observation;
};

/// Fixed-capacity ring buffer with strict FIFO eviction.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity = 100000) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayMemory: capacity must be >= 1");
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return buffer_.size(); }
    std::uint64_t insertions() const { return insertions_; }

    void store(Experience e) {
        if (buffer_.size() < capacity_) {
            buffer_.push_back(std::move(e));
        } else {
            buffer_[next_] = std::move(e);
            next_ = (next_ + 1) % capacity_;
        }
        ++insertions_;
    }

    /// i = 0 is the oldest surviving experience.
    const Experience& at(std::size_t i) const {
        if (i >= buffer_.size()) throw std::out_of_range("ReplayMemory: index out of range");
        if (buffer_.size() < capacity_) return buffer_[i];
        return buffer_[(next_ + i) % capacity_];
    }

private:
    std::size_t capacity_;
    std::vector<Experience> buffer_;
    std::size_t next_ = 0;  // slot holding the oldest experience once full
    std::uint64_t insertions_ = 0;
};

/// B experiences drawn uniformly with replacement. Throws when the memory
/// holds fewer than B (warm-up enforcement).
inline std::vector<Experience> sample_minibatch(const ReplayMemory& memory, int batch_size,
                                                Rng& rng) {
    if (batch_size < 1) throw std::invalid_argument("sample_minibatch: batch_size must be >= 1");
    if (memory.size() < static_cast<std::size_t>(batch_size))
        throw std::runtime_error("sample_minibatch: memory smaller than batch");
    std::vector<Experience> batch;
    batch.reserve(batch_size);
    for (int b = 0; b < batch_size; ++b)
        batch.push_back(memory.at(static_cast<std::size_t>(rng.uniform_int(memory.size()))));
    return batch;
}

}  // namespace oia
