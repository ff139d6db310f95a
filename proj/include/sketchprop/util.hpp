#pragma once

// Shared plumbing: error types carrying source positions, a redirectable
// warning sink, text-field parsing helpers, and the deterministic 64-bit
// mixer used to derive hash coefficients and generator streams.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sketchprop {

// Error in a line-oriented text input; line numbers are 1-based.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Error in a binary stream; offset is the byte position of the problem.
class format_error : public std::runtime_error {
public:
    format_error(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what), offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Warnings go here; tests may swap the sink or set it to nullptr.
inline std::ostream*& warning_stream() {
    static std::ostream* s = &std::cerr;
    return s;
}

inline void warn(const std::string& msg) {
    if (auto* os = warning_stream()) *os << "warning: " << msg << '\n';
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// Splits on runs of spaces/tabs after stripping a trailing "#" comment.
inline std::vector<std::string_view> split_fields(std::string_view line) {
    if (auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
    line = trim(line);
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        std::size_t j = line.find_first_of(" \t", i);
        if (j == std::string_view::npos) j = line.size();
        if (j > i) fields.push_back(line.substr(i, j - i));
        i = line.find_first_not_of(" \t", j);
        if (i == std::string_view::npos) break;
    }
    return fields;
}

// Full-consume finite double parse; nullopt on any failure.
inline std::optional<double> parse_double(std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

// splitmix64: advances state and returns a well-mixed 64-bit value.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail
} // namespace sketchprop
