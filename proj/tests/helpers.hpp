#pragma once

// Shared test utilities: deterministic RNG wrappers, scratch directories,
// and independent reference implementations (dense-matrix propagation,
// hash-map exact counters, sort-based ranking) that the library's outputs
// are checked against.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <sketchprop/cms.hpp>
#include <sketchprop/graph.hpp>
#include <sketchprop/seeds.hpp>
#include <sketchprop/solver.hpp>
#include <sketchprop/weights.hpp>

namespace testutil {

using namespace sketchprop;

inline std::filesystem::path scratch_dir(const std::string& tag) {
    static int counter = 0;
    const auto p = std::filesystem::temp_directory_path() /
                   ("sketchprop_tests_" + tag + "_" + std::to_string(counter++));
    std::filesystem::create_directories(p);
    return p;
}

// ------------------------------------------------------------- CMS oracle

// Exact per-item totals, for never-underestimate and point-query checks.
struct ExactCounters {
    std::unordered_map<std::uint64_t, double> totals;

    void update(std::uint64_t item, double y) { totals[item] += y; }
    double query(std::uint64_t item) const {
        auto it = totals.find(item);
        return it == totals.end() ? 0.0 : it->second;
    }
};

// Expected value of one grid cell: the sum of every item total whose hash
// lands there. Enumerates items independently of the sketch's update path.
inline double expected_cell(const HashFamily& h, const ExactCounters& ex, std::uint32_t row,
                            std::uint32_t col) {
    double sum = 0;
    for (const auto& [item, total] : ex.totals)
        if (h.index(row, item) == col) sum += total;
    return sum;
}

// ------------------------------------------------- dense propagation oracle

// Dense recomputation of the per-node random-walk probabilities straight
// from their defining formulas.
struct OracleProbs {
    std::vector<double> p_inj, p_cont, p_abnd;
};

inline OracleProbs oracle_probs(const Graph& g, const SeedSet& seeds, WeightMode mode,
                                double beta = 2.0) {
    const std::uint32_t n = g.n();
    OracleProbs o;
    o.p_inj.assign(n, 0.0);
    o.p_cont.assign(n, 0.0);
    o.p_abnd.assign(n, 0.0);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (mode == WeightMode::uniform) {
            if (seeds.seeded(v)) {
                o.p_inj[v] = 0.5;
                o.p_cont[v] = 0.5;
            } else {
                o.p_cont[v] = 1.0;
            }
            continue;
        }
        const double deg = g.degree(v);
        double entropy = 0;
        if (deg > 0) {
            auto ws = g.weights(v);
            for (double w : ws) {
                const double p = w / deg;
                if (p > 0) entropy -= p * std::log(p);
            }
        }
        const double c = std::log(beta) / std::log(beta + std::exp(entropy));
        const double d = seeds.seeded(v) ? (1.0 - c) * std::sqrt(entropy) : 0.0;
        const double z = std::max(c + d, 1.0);
        o.p_cont[v] = c / z;
        o.p_inj[v] = d / z;
        o.p_abnd[v] = 1.0 - o.p_cont[v] - o.p_inj[v];
    }
    return o;
}

// Dense-matrix implementation of the update
//   Y(t+1)_v = (1/M_vv)(mu1 S_vv Q_v + mu2 sum_u c(v,u) Y(t)_u + mu3 R_v)
// built from full n x n matrices; label m is the dummy column.
inline std::vector<std::vector<double>> dense_mad(const Graph& g, const SeedSet& seeds,
                                                  WeightMode mode, double mu1, double mu2,
                                                  double mu3, unsigned iterations,
                                                  double beta = 2.0) {
    const std::uint32_t n = g.n();
    const std::uint32_t cols = seeds.num_labels() + 1;
    const OracleProbs probs = oracle_probs(g, seeds, mode, beta);

    std::vector<std::vector<double>> wprime(n, std::vector<double>(n, 0.0));
    for (std::uint32_t v = 0; v < n; ++v) {
        const double deg = g.degree(v);
        if (deg <= 0) continue;
        auto ns = g.neighbors(v);
        auto ws = g.weights(v);
        for (std::size_t i = 0; i < ns.size(); ++i)
            wprime[v][ns[i]] += probs.p_cont[v] * ws[i] / deg;
    }
    std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
    for (std::uint32_t v = 0; v < n; ++v)
        for (std::uint32_t u = 0; u < n; ++u) c[v][u] = wprime[u][v] + wprime[v][u];

    std::vector<double> big_m(n, 0.0);
    for (std::uint32_t v = 0; v < n; ++v) {
        double row = 0;
        for (std::uint32_t u = 0; u < n; ++u)
            if (u != v) row += c[v][u];
        big_m[v] = mu1 * (seeds.seeded(v) ? 1.0 : 0.0) + mu2 * row + mu3;
    }

    std::vector<std::vector<double>> y(n, std::vector<double>(cols, 0.0));
    for (std::uint32_t v = 0; v < n; ++v)
        for (const auto& e : seeds.row(v)) y[v][e.label] += e.score;

    for (unsigned it = 0; it < iterations; ++it) {
        std::vector<std::vector<double>> next(n, std::vector<double>(cols, 0.0));
        for (std::uint32_t v = 0; v < n; ++v) {
            for (const auto& e : seeds.row(v)) next[v][e.label] += mu1 * e.score;
            for (std::uint32_t u = 0; u < n; ++u) {
                if (u == v || c[v][u] == 0) continue;
                for (std::uint32_t l = 0; l < cols; ++l)
                    next[v][l] += mu2 * c[v][u] * y[u][l];
            }
            next[v][cols - 1] += mu3 * probs.p_abnd[v];
            for (std::uint32_t l = 0; l < cols; ++l) next[v][l] /= big_m[v];
        }
        y = std::move(next);
    }
    return y;
}

// Dense Jacobi iteration of the harmonic method (seeds clamped, others the
// weighted neighbor average).
inline std::vector<std::vector<double>> dense_harmonic(const Graph& g, const SeedSet& seeds,
                                                       unsigned iterations) {
    const std::uint32_t n = g.n();
    const std::uint32_t cols = seeds.num_labels() + 1;
    std::vector<std::vector<double>> y(n, std::vector<double>(cols, 0.0));
    for (std::uint32_t v = 0; v < n; ++v)
        for (const auto& e : seeds.row(v)) y[v][e.label] += e.score;
    for (unsigned it = 0; it < iterations; ++it) {
        std::vector<std::vector<double>> next(n, std::vector<double>(cols, 0.0));
        for (std::uint32_t v = 0; v < n; ++v) {
            if (seeds.seeded(v)) {
                for (const auto& e : seeds.row(v)) next[v][e.label] += e.score;
                continue;
            }
            const double deg = g.degree(v);
            if (deg <= 0) continue;
            auto ns = g.neighbors(v);
            auto ws = g.weights(v);
            for (std::size_t i = 0; i < ns.size(); ++i)
                for (std::uint32_t l = 0; l < cols; ++l)
                    next[v][l] += ws[i] / deg * y[ns[i]][l];
        }
        y = std::move(next);
    }
    return y;
}

// ------------------------------------------------------------ rank oracle

// Rank of `label` among all m labels by full sort: score descending, label
// id ascending; absent labels score 0.
inline std::uint32_t rank_by_sorting(const LabelDist& row, std::uint32_t m,
                                     std::uint32_t label) {
    std::vector<double> dense(m, 0.0);
    for (const auto& e : row)
        if (e.label < m) dense[e.label] = e.score;
    std::vector<std::uint32_t> order(m);
    for (std::uint32_t l = 0; l < m; ++l) order[l] = l;
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (dense[a] != dense[b]) return dense[a] > dense[b];
        return a < b;
    });
    for (std::uint32_t pos = 0; pos < m; ++pos)
        if (order[pos] == label) return pos + 1;
    return m;
}

// ------------------------------------------------------------ random graphs

// Connected random undirected graph: a spanning tree plus `extra` random
// edges, weights in (0, 2).
inline Graph random_graph(std::uint32_t n, std::uint32_t extra, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&] { return (rng() >> 11) * 0x1.0p-53; };
    GraphBuilder b;
    b.ensure_nodes(n);
    for (std::uint32_t v = 1; v < n; ++v) {
        const std::uint32_t u = static_cast<std::uint32_t>(rng() % v);
        b.add_edge(u, v, 0.25 + 1.75 * uniform());
    }
    for (std::uint32_t e = 0; e < extra; ++e) {
        const std::uint32_t u = static_cast<std::uint32_t>(rng() % n);
        const std::uint32_t v = static_cast<std::uint32_t>(rng() % n);
        if (u == v) continue;
        b.add_edge(u, v, 0.25 + 1.75 * uniform());
    }
    return b.build();
}

inline SeedSet random_seeds(const Graph& g, std::uint32_t m, std::uint32_t seeded_nodes,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SeedSet s(g.n());
    for (std::uint32_t l = 0; l < m; ++l) s.intern_label("L" + std::to_string(l));
    for (std::uint32_t i = 0; i < seeded_nodes; ++i) {
        const std::uint32_t v = static_cast<std::uint32_t>(rng() % g.n());
        const std::uint32_t l = static_cast<std::uint32_t>(rng() % m);
        const double score = 0.25 + (rng() % 4) * 0.25;
        s.add(v, l, score);
    }
    return s;
}

// --------------------------------------------------------------- warnings

// Redirects the library's warning stream into a buffer for the lifetime of
// the capture, restoring the previous sink on destruction.
struct WarningCapture {
    std::ostringstream buf;
    std::ostream* old;

    WarningCapture() : old(warning_stream()) { warning_stream() = &buf; }
    ~WarningCapture() { warning_stream() = old; }
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    std::string text() const { return buf.str(); }
};

// -------------------------------------------------- structural comparison

// Adjacency keyed by node names rather than ids, so two graphs can be
// compared even when their interners assigned ids in different orders.
inline std::map<std::pair<std::string, std::string>, double> named_adjacency(const Graph& g) {
    std::map<std::pair<std::string, std::string>, double> adj;
    for (std::uint32_t v = 0; v < g.n(); ++v) {
        const auto ns = g.neighbors(v);
        const auto ws = g.weights(v);
        for (std::size_t i = 0; i < ns.size(); ++i)
            adj[{g.nodes().name(v), g.nodes().name(ns[i])}] = ws[i];
    }
    return adj;
}

inline bool same_structure(const Graph& a, const Graph& b) {
    if (a.n() != b.n() || a.undirected() != b.undirected()) return false;
    for (std::uint32_t v = 0; v < a.n(); ++v)
        if (!b.nodes().find(a.nodes().name(v))) return false;
    return named_adjacency(a) == named_adjacency(b);
}

} // namespace testutil
