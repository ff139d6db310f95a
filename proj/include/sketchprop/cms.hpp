#pragma once

// Count-min sketch over real-valued counters: a d x w grid plus d
// pairwise-independent linear hashes. Point updates touch one cell per row,
// queries take the row-wise minimum, and same-family sketches combine
// linearly (axpy/scale), which is what makes sketch-based label propagation
// work without unpacking labels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "util.hpp"

namespace sketchprop {

struct SketchParams {
    std::uint32_t width = 0;   // w: counters per row
    std::uint32_t depth = 0;   // d: rows / hash functions
    std::uint64_t hash_seed = 0;

    friend bool operator==(const SketchParams&, const SketchParams&) = default;
};

// Carter-Wegman linear hashing: h_j(i) = ((a_j * i + b_j) mod p) mod w with
// p = 2^61 - 1. Coefficients are a deterministic function of (hash_seed, j).
class HashFamily {
public:
    static constexpr std::uint64_t prime = (std::uint64_t{1} << 61) - 1;

    HashFamily() = default;

    HashFamily(std::uint32_t width, std::uint32_t depth, std::uint64_t seed)
        : width_(width) {
        std::uint64_t state = seed;
        coeff_a_.reserve(depth);
        coeff_b_.reserve(depth);
        for (std::uint32_t j = 0; j < depth; ++j) {
            coeff_a_.push_back(draw_nonzero(state));
            coeff_b_.push_back(draw(state));
        }
    }

    std::uint32_t width() const noexcept { return width_; }
    std::uint32_t depth() const noexcept { return static_cast<std::uint32_t>(coeff_a_.size()); }
    std::uint64_t coeff_a(std::uint32_t row) const { return coeff_a_[row]; }
    std::uint64_t coeff_b(std::uint32_t row) const { return coeff_b_[row]; }

    // Column of item i in row j; always in [0, w).
    std::uint32_t index(std::uint32_t row, std::uint64_t item) const {
        std::uint64_t h = mulmod(coeff_a_[row], item % prime) + coeff_b_[row];
        if (h >= prime) h -= prime;
        return static_cast<std::uint32_t>(h % width_);
    }

    // True when no two of the given items share a cell in any row.
    bool injective_on(std::span<const std::uint64_t> items) const {
        for (std::uint32_t j = 0; j < depth(); ++j) {
            std::vector<std::uint32_t> cols;
            cols.reserve(items.size());
            for (auto i : items) cols.push_back(index(j, i));
            std::sort(cols.begin(), cols.end());
            if (std::adjacent_find(cols.begin(), cols.end()) != cols.end()) return false;
        }
        return true;
    }

    friend bool operator==(const HashFamily&, const HashFamily&) = default;

private:
    static std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
        unsigned __int128 t = static_cast<unsigned __int128>(a) * b;
        std::uint64_t lo = static_cast<std::uint64_t>(t) & prime;
        std::uint64_t hi = static_cast<std::uint64_t>(t >> 61);
        std::uint64_t s = lo + hi;
        s = (s & prime) + (s >> 61);
        if (s >= prime) s -= prime;
        return s;
    }

    static std::uint64_t draw(std::uint64_t& state) {
        for (;;) {
            std::uint64_t x = detail::splitmix64(state) >> 3; // 61 bits
            if (x < prime) return x;
        }
    }

    static std::uint64_t draw_nonzero(std::uint64_t& state) {
        for (;;) {
            std::uint64_t x = draw(state);
            if (x != 0) return x;
        }
    }

    std::uint32_t width_ = 0;
    std::vector<std::uint64_t> coeff_a_;
    std::vector<std::uint64_t> coeff_b_;
};

class CountMinSketch {
public:
    CountMinSketch() = default;

    explicit CountMinSketch(SketchParams params)
        : params_(params),
          hashes_(std::make_shared<HashFamily>(params.width, params.depth, params.hash_seed)),
          grid_(static_cast<std::size_t>(params.width) * params.depth, 0.0) {
        if (params.width == 0 || params.depth == 0)
            throw std::invalid_argument("sketch width and depth must be >= 1");
    }

    const SketchParams& params() const noexcept { return params_; }
    const HashFamily& hashes() const { return *hashes_; }

    // Adds y to cell (j, h_j(i)) in every row. Negative y is accepted but
    // voids the overestimate-only guarantee.
    void update(std::uint64_t item, double y) {
        const std::uint32_t w = params_.width;
        for (std::uint32_t j = 0; j < params_.depth; ++j)
            grid_[static_cast<std::size_t>(j) * w + hashes_->index(j, item)] += y;
    }

    // Row-wise minimum: never underestimates under non-negative updates.
    double query(std::uint64_t item) const {
        const std::uint32_t w = params_.width;
        double m = std::numeric_limits<double>::infinity();
        for (std::uint32_t j = 0; j < params_.depth; ++j)
            m = std::min(m, grid_[static_cast<std::size_t>(j) * w + hashes_->index(j, item)]);
        return m;
    }

    // *this += a * src. Requires identical (w, d, hash_seed).
    void axpy(double a, const CountMinSketch& src) {
        if (!(params_ == src.params_))
            throw std::invalid_argument("incompatible sketches: params (w, d, hash_seed) differ");
        const double* s = src.grid_.data();
        double* d = grid_.data();
        const std::size_t cells = grid_.size();
        for (std::size_t c = 0; c < cells; ++c) d[c] += a * s[c];
    }

    void scale(double a) {
        for (double& c : grid_) c *= a;
    }

    void clear() { std::fill(grid_.begin(), grid_.end(), 0.0); }

    std::span<const double> counters() const noexcept { return grid_; }
    double counter(std::uint32_t row, std::uint32_t col) const {
        return grid_[static_cast<std::size_t>(row) * params_.width + col];
    }

    // Sum over cells of |lhs - rhs|; convergence signal for sketch runs.
    friend double l1_distance(const CountMinSketch& lhs, const CountMinSketch& rhs) {
        if (!(lhs.params_ == rhs.params_))
            throw std::invalid_argument("incompatible sketches: params (w, d, hash_seed) differ");
        double sum = 0;
        for (std::size_t c = 0; c < lhs.grid_.size(); ++c)
            sum += std::abs(lhs.grid_[c] - rhs.grid_[c]);
        return sum;
    }

    void serialize(std::ostream& out) const;
    static CountMinSketch deserialize(std::istream& in);

    friend bool operator==(const CountMinSketch& a, const CountMinSketch& b) {
        return a.params_ == b.params_ && a.grid_ == b.grid_;
    }

private:
    SketchParams params_;
    std::shared_ptr<const HashFamily> hashes_;
    std::vector<double> grid_; // row-major d x w
};

// Binary layout (little-endian): "CMS1", w u32, d u32, hash_seed u64,
// d pairs (a_j, b_j) u64, then d*w counters as IEEE-754 f64 row-major.
namespace detail {

inline void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ostream& out, T v) {
    static_assert(sizeof(T) <= 8);
    std::uint64_t u = 0;
    std::memcpy(&u, &v, sizeof(T));
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    put_bytes(out, buf, sizeof(T));
}

inline void put_le_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le<std::uint64_t>(out, bits);
}

class byte_reader {
public:
    explicit byte_reader(std::istream& in) : in_(in) {}

    std::size_t offset() const noexcept { return offset_; }

    void read(void* p, std::size_t n, const char* what) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            std::ostringstream msg;
            msg << "truncated sketch stream while reading " << what
                << " at byte " << (offset_ + static_cast<std::size_t>(in_.gcount()));
            throw format_error(msg.str(), offset_ + static_cast<std::size_t>(in_.gcount()));
        }
        offset_ += n;
    }

    std::uint32_t u32(const char* what) {
        unsigned char b[4];
        read(b, 4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    std::uint64_t u64(const char* what) {
        unsigned char b[8];
        read(b, 8, what);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }

    double f64(const char* what) {
        std::uint64_t bits = u64(what);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

private:
    std::istream& in_;
    std::size_t offset_ = 0;
};

} // namespace detail

inline void CountMinSketch::serialize(std::ostream& out) const {
    detail::put_bytes(out, "CMS1", 4);
    detail::put_le<std::uint32_t>(out, params_.width);
    detail::put_le<std::uint32_t>(out, params_.depth);
    detail::put_le<std::uint64_t>(out, params_.hash_seed);
    for (std::uint32_t j = 0; j < params_.depth; ++j) {
        detail::put_le<std::uint64_t>(out, hashes_->coeff_a(j));
        detail::put_le<std::uint64_t>(out, hashes_->coeff_b(j));
    }
    for (double c : grid_) detail::put_le_f64(out, c);
}

inline CountMinSketch CountMinSketch::deserialize(std::istream& in) {
    detail::byte_reader r(in);
    char magic[4];
    r.read(magic, 4, "magic");
    if (std::memcmp(magic, "CMS1", 4) != 0)
        throw format_error("bad magic, expected \"CMS1\" at byte 0", 0);

    SketchParams params;
    params.width = r.u32("width");
    params.depth = r.u32("depth");
    if (params.width == 0 || params.depth == 0)
        throw format_error("width and depth must be >= 1 (header at byte 4)", 4);
    params.hash_seed = r.u64("hash_seed");

    const std::size_t cells = static_cast<std::size_t>(params.width) * params.depth;
    if (cells > (std::size_t{1} << 31))
        throw format_error("implausible grid size in header at byte 4", 4);

    CountMinSketch s(params);
    for (std::uint32_t j = 0; j < params.depth; ++j) {
        std::size_t coeff_off = r.offset();
        std::uint64_t a = r.u64("hash coefficient a");
        std::uint64_t b = r.u64("hash coefficient b");
        if (a != s.hashes_->coeff_a(j) || b != s.hashes_->coeff_b(j)) {
            std::ostringstream msg;
            msg << "hash coefficients at byte " << coeff_off
                << " do not match the family derived from hash_seed";
            throw format_error(msg.str(), coeff_off);
        }
    }
    for (std::size_t c = 0; c < cells; ++c) s.grid_[c] = r.f64("counter");
    return s;
}

} // namespace sketchprop
