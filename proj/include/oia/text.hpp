#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oia {

/// Shortest decimal string that round-trips the exact double ('.' separator,
/// locale-independent). Used for every numeric field written to disk.
inline std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

/// Strict full-consumption numeric parses; throw std::invalid_argument on
/// any leftover characters so config typos surface as type errors.
template <typename T>
T parse_number(std::string_view text) {
    const std::string_view s = trim(text);
    T value{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a valid number: '" + std::string(text) + "'");
    return value;
}

}  // namespace oia
