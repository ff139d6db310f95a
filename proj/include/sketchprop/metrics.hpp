#pragma once

// Measurement and sizing tools:
//   - size_sketch: width/depth calculators for the three sizing regimes
//     (k-sparse, Zipf-skewed, community-bounded label mass),
//   - approximation_error: max over (node, label) of sketch minus exact,
//   - mrr: mean reciprocal rank with deterministic tie handling,
//   - skew_report: per-rank mean scores and a log-log least-squares fit of
//     the skew exponent,
//   - tail_weight: mass outside the k largest components of a row.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "label_dist.hpp"
#include "solver.hpp"

namespace sketchprop {

enum class SizingRegime { sparse, zipf, community };

struct SizingSpec {
    SizingRegime regime = SizingRegime::sparse;
    std::uint32_t k = 1;  // sparse: max labels per seeded node
    double z = 1.5;       // zipf: skew exponent, > 1
    double psi = 1.0;     // community: max-conductance bound, in (0, 1]
    double eps = 0.05;    // error budget, in (0, 1)
    double delta = 0.1;   // failure probability, in (0, 1)
    std::uint64_t m = 1;  // label count
};

struct SizingResult {
    std::uint32_t width = 0;
    std::uint32_t depth = 0;
};

// sparse:    w = ceil(e * k / eps)
// zipf:      w = ceil(e / eps^(z-1))
// community: w = ceil(e * psi / eps)
// all:       d = ceil(ln(m / delta))
inline SizingResult size_sketch(const SizingSpec& spec) {
    if (!(spec.eps > 0 && spec.eps < 1))
        throw std::invalid_argument("eps must be in (0, 1)");
    if (!(spec.delta > 0 && spec.delta < 1))
        throw std::invalid_argument("delta must be in (0, 1)");
    if (spec.m < 1) throw std::invalid_argument("m must be >= 1");
    const double e = std::numbers::e;
    double w = 0;
    switch (spec.regime) {
    case SizingRegime::sparse:
        if (spec.k < 1) throw std::invalid_argument("k must be >= 1");
        w = e * spec.k / spec.eps;
        break;
    case SizingRegime::zipf:
        if (!(spec.z > 1)) throw std::invalid_argument("z must be > 1");
        w = e / std::pow(spec.eps, spec.z - 1.0);
        break;
    case SizingRegime::community:
        if (!(spec.psi > 0 && spec.psi <= 1))
            throw std::invalid_argument("psi must be in (0, 1]");
        w = e * spec.psi / spec.eps;
        break;
    }
    SizingResult r;
    r.width = static_cast<std::uint32_t>(std::ceil(w));
    r.depth = static_cast<std::uint32_t>(
        std::ceil(std::log(static_cast<double>(spec.m) / spec.delta)));
    r.width = std::max(r.width, 1u);
    r.depth = std::max(r.depth, 1u);
    return r;
}

// Max over nodes and real labels of (sketch score - exact score). By the
// min-query construction this is >= 0 up to floating-point noise.
inline double approximation_error(const LabelState& exact, const LabelState& sketch) {
    if (exact.backend != Backend::exact || sketch.backend != Backend::sketch)
        throw std::invalid_argument(
            "approximation_error expects an exact state and a sketch state");
    if (exact.n() != sketch.n())
        throw std::invalid_argument("states cover different node sets");
    const std::uint32_t m = exact.num_labels;
    std::vector<double> dense(m, 0.0);
    double worst = 0;
    for (std::uint32_t v = 0; v < exact.n(); ++v) {
        for (const auto& e : exact.rows[v])
            if (e.label < m) dense[e.label] = e.score;
        for (std::uint32_t l = 0; l < m; ++l)
            worst = std::max(worst, sketch.sketches[v].query(l) - dense[l]);
        for (const auto& e : exact.rows[v])
            if (e.label < m) dense[e.label] = 0.0;
    }
    return worst;
}

struct EvalResult {
    double mrr = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ranks; // (node, best gold rank)
    std::size_t evaluated = 0;
};

namespace detail {

// Rank of `label` in `scores` over the full m-label vocabulary (labels
// absent from `scores` score 0): 1 + |strictly better| + |ties with a
// smaller id|.
inline std::uint32_t rank_of(const LabelDist& scores, std::uint32_t m, std::uint32_t label) {
    const double s = dist_get(scores, label);
    std::uint32_t better = 0, equal_smaller = 0, explicit_below = 0;
    for (const auto& e : scores) {
        if (e.label >= m) continue;
        if (e.label != label) {
            if (e.score > s)
                ++better;
            else if (e.score == s && e.label < label)
                ++equal_smaller;
        }
        if (e.label < label) ++explicit_below;
    }
    std::uint32_t rank = 1 + better + equal_smaller;
    if (s == 0) rank += label - explicit_below; // implicit zeros with smaller ids tie ahead
    return rank;
}

} // namespace detail

// MRR = (1/|F|) sum over eval nodes of 1 / (best rank of a gold label).
// Nodes with no rankable gold label get rank m (worst) with a warning.
inline EvalResult mrr(const std::vector<LabelDist>& rows, const GoldLabels& gold,
                      std::uint32_t m, const std::vector<std::uint32_t>& eval_nodes) {
    if (m == 0) throw std::invalid_argument("mrr requires a non-empty label vocabulary");
    EvalResult res;
    std::size_t unrankable = 0;
    for (auto v : eval_nodes) {
        if (v >= rows.size()) throw std::invalid_argument("eval node id out of range");
        std::uint32_t best = 0;
        bool have = false;
        for (auto l : gold.by_node[v]) {
            if (l >= m) continue;
            const std::uint32_t r = detail::rank_of(rows[v], m, l);
            if (!have || r < best) best = r, have = true;
        }
        if (!have) {
            best = m;
            ++unrankable;
        }
        res.ranks.emplace_back(v, best);
        res.mrr += 1.0 / best;
    }
    if (unrankable > 0)
        warn(std::to_string(unrankable) +
             " evaluation node(s) had no rankable gold label; rank taken as m");
    res.evaluated = eval_nodes.size();
    if (res.evaluated > 0) res.mrr /= static_cast<double>(res.evaluated);
    return res;
}

struct SkewReport {
    std::vector<std::pair<std::uint32_t, double>> mean_by_rank; // (rank, mean score)
    double z = 0;           // fitted skew exponent (score ~ rank^-z)
    std::uint32_t fit_min_rank = 1;
    std::uint32_t fit_max_rank = 1;
};

// Per node, sorts its real-label scores descending; aggregates the r-th
// largest across nodes (missing ranks count as 0 unless
// only_nodes_with_rank is set); fits z by least squares on
// (log rank, log mean) over the positive-mean ranks up to rank_limit.
inline SkewReport skew_report(const LabelState& state, std::uint32_t rank_limit = 0,
                              bool only_nodes_with_rank = false) {
    if (state.backend != Backend::exact)
        throw std::invalid_argument("skew analysis requires the exact backend");
    const std::uint32_t n = state.n();
    if (n == 0) throw std::invalid_argument("skew analysis requires a non-empty state");
    const std::uint32_t m = state.num_labels;
    if (rank_limit == 0) rank_limit = std::min<std::uint32_t>(m, 1000);
    rank_limit = std::min(rank_limit, m);

    std::vector<double> sums(rank_limit, 0.0);
    std::vector<std::uint32_t> counts(rank_limit, 0);
    std::vector<double> scores;
    bool any = false;
    for (std::uint32_t v = 0; v < n; ++v) {
        scores.clear();
        for (const auto& e : state.rows[v])
            if (e.label < m && e.score > 0) scores.push_back(e.score);
        std::sort(scores.begin(), scores.end(), std::greater<>());
        if (!scores.empty()) any = true;
        const std::uint32_t have = std::min<std::uint32_t>(
            rank_limit, static_cast<std::uint32_t>(scores.size()));
        for (std::uint32_t r = 0; r < have; ++r) {
            sums[r] += scores[r];
            ++counts[r];
        }
    }
    if (!any) throw std::invalid_argument("skew analysis requires a state with nonzero scores");

    SkewReport rep;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::uint32_t pts = 0;
    for (std::uint32_t r = 0; r < rank_limit; ++r) {
        const double denom = only_nodes_with_rank ? counts[r] : n;
        const double mean = denom > 0 ? sums[r] / denom : 0.0;
        rep.mean_by_rank.emplace_back(r + 1, mean);
        if (mean > 0) {
            const double x = std::log(static_cast<double>(r + 1));
            const double y = std::log(mean);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++pts;
            rep.fit_max_rank = r + 1;
        }
    }
    if (pts < 2)
        throw std::invalid_argument("skew fit requires at least 2 ranks with positive mean");
    const double det = pts * sxx - sx * sx;
    rep.z = -(pts * sxy - sx * sy) / det;
    return rep;
}

// t_k: total mass outside the k largest components.
inline double tail_weight(const LabelDist& dist, std::int64_t k) {
    if (k < 0) throw std::invalid_argument("tail_weight requires k >= 0");
    if (static_cast<std::size_t>(k) >= dist.size()) return 0.0;
    std::vector<double> scores;
    scores.reserve(dist.size());
    for (const auto& e : dist) scores.push_back(e.score);
    std::sort(scores.begin(), scores.end(), std::greater<>());
    double t = 0;
    for (std::size_t i = static_cast<std::size_t>(k); i < scores.size(); ++i) t += scores[i];
    return t;
}

} // namespace sketchprop
