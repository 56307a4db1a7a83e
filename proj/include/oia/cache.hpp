#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "oia/rng.hpp"

namespace oia {

/// Per-candidate binary cache states: bit l is 1 when candidate l's
/// requested content sits in its transmitter's cache.
using CacheStateVector = std::vector<std::uint8_t>;

/// Independent Bernoulli(p_hit) draw per candidate. Always consumes exactly
/// one uniform per candidate, so runs with different p_hit but the same seed
/// stay aligned on every later draw.
inline CacheStateVector sample_cache_states(double p_hit, int users, Rng& rng) {
    if (!(p_hit >= 0.0 && p_hit <= 1.0))
        throw std::invalid_argument("sample_cache_states: p_hit must be in [0,1]");
    if (users < 1) throw std::invalid_argument("sample_cache_states: need at least one user");
    CacheStateVector bits(users);
    for (int l = 0; l < users; ++l) bits[l] = rng.uniform() < p_hit ? 1 : 0;
    return bits;
}

}  // namespace oia
