#pragma once

// Sparse label -> score rows. A LabelDist is kept sorted by label id and
// carries only non-negative scores; it is the row type of the seed matrix,
// the per-node label state, and the abandonment prior.

#include <algorithm>
#include <cstdint>
#include <vector>

namespace sketchprop {

struct LabelScore {
    std::uint32_t label = 0;
    double score = 0.0;

    friend bool operator==(const LabelScore&, const LabelScore&) = default;
};

// Sorted by ascending label id, one entry per label.
using LabelDist = std::vector<LabelScore>;

inline double dist_get(const LabelDist& d, std::uint32_t label) {
    auto it = std::lower_bound(d.begin(), d.end(), label,
                               [](const LabelScore& e, std::uint32_t l) { return e.label < l; });
    return (it != d.end() && it->label == label) ? it->score : 0.0;
}

// Adds (accumulating) a score; keeps the sorted-unique invariant.
inline void dist_add(LabelDist& d, std::uint32_t label, double score) {
    auto it = std::lower_bound(d.begin(), d.end(), label,
                               [](const LabelScore& e, std::uint32_t l) { return e.label < l; });
    if (it != d.end() && it->label == label)
        it->score += score;
    else
        d.insert(it, LabelScore{label, score});
}

inline double dist_l1(const LabelDist& d) {
    double s = 0;
    for (const auto& e : d) s += e.score;
    return s;
}

// Top-k entries with positive score, ordered by score descending and label
// id ascending on ties; k = 0 means "all".
inline LabelDist dist_top_k(const LabelDist& d, std::size_t k) {
    LabelDist out;
    out.reserve(d.size());
    for (const auto& e : d)
        if (e.score > 0) out.push_back(e);
    std::stable_sort(out.begin(), out.end(), [](const LabelScore& a, const LabelScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.label < b.label;
    });
    if (k != 0 && out.size() > k) out.resize(k);
    return out;
}

} // namespace sketchprop
