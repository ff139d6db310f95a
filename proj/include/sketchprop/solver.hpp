#pragma once

// Propagation engines. Two methods:
//
//   mad       — Jacobi iteration of
//               Y(t+1)_v = (1/M_vv) * ( mu1 * S_vv * Q_v
//                                     + mu2 * sum_u c(v,u) * Y(t)_u
//                                     + mu3 * R_v )
//               with c(v,u) = W'_uv + W'_vu and
//               M_vv = mu1*S_vv + mu2*sum_{u!=v} c(v,u) + mu3.
//   harmonic  — seeded nodes clamped to Q; unlabeled nodes set to the
//               weighted average of their neighbors.
//
// Two backends: exact (sparse per-node label rows) and sketch (one
// count-min sketch per node, updated purely through the sketches'
// linearity — labels are never unpacked). Initialization is Y(0) = Q in
// both backends. Updates are synchronous (Jacobi): iteration t+1 reads
// only iteration t, so node order — and therefore threading — cannot
// change results; per-node accumulation follows the fixed adjacency order.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#if defined(__linux__)
#include <unistd.h>
#endif

#include "cms.hpp"
#include "graph.hpp"
#include "label_dist.hpp"
#include "seeds.hpp"
#include "weights.hpp"

namespace sketchprop {

enum class Backend { exact, sketch };
enum class Method { mad, harmonic };

struct SolverConfig {
    double mu1 = 0.98;
    double mu2 = 0.01;
    double mu3 = 0.01;
    unsigned iterations = 10;
    std::optional<double> convergence_delta; // stop when max per-node L1 change drops below
    Backend backend = Backend::exact;
    SketchParams sketch{};                   // required for the sketch backend
    Method method = Method::mad;
    double prune_threshold = 1e-12;          // exact rows drop entries below this
    unsigned threads = 1;
    bool guarantee = false;                  // enforce mu1+mu2+mu3 <= 1 on sketch runs
};

struct LabelState {
    Backend backend = Backend::exact;
    std::vector<LabelDist> rows;             // exact: one sparse row per node
    std::vector<CountMinSketch> sketches;    // sketch: shared params per node
    unsigned iteration = 0;
    std::uint32_t num_labels = 0;            // m; the dummy label id is m

    std::uint32_t n() const noexcept {
        return static_cast<std::uint32_t>(backend == Backend::exact ? rows.size()
                                                                    : sketches.size());
    }
};

struct IterationStats {
    unsigned iteration = 0;
    double wall_ms = 0;
    std::uint64_t store_entries = 0; // exact: stored (node,label) entries; sketch: n*w*d
    std::uint64_t store_bytes = 0;
    double max_delta = 0;            // max per-node L1 change from the previous iteration
    std::uint64_t rss_bytes = 0;     // process RSS sample; 0 when unavailable
};

struct RunReport {
    std::vector<IterationStats> per_iteration;
    unsigned iterations_executed = 0;
    double total_wall_ms = 0;
    bool sketch_guarantee = false; // sketch backend with mu1+mu2+mu3 <= 1
};

namespace detail {

inline std::uint64_t read_rss_bytes() {
#if defined(__linux__)
    std::ifstream statm("/proc/self/statm");
    std::uint64_t size = 0, resident = 0;
    if (statm >> size >> resident)
        return resident * static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
#endif
    return 0;
}

inline std::uint64_t exact_store_entries(const LabelState& s) {
    std::uint64_t total = 0;
    for (const auto& r : s.rows) total += r.size();
    return total;
}

inline void fill_store_metrics(const LabelState& s, IterationStats& st) {
    if (s.backend == Backend::exact) {
        st.store_entries = exact_store_entries(s);
        st.store_bytes = st.store_entries * sizeof(LabelScore);
    } else {
        const auto& p = s.sketches.empty() ? SketchParams{} : s.sketches.front().params();
        st.store_entries =
            static_cast<std::uint64_t>(s.sketches.size()) * p.width * p.depth;
        st.store_bytes = st.store_entries * sizeof(double);
    }
    st.rss_bytes = read_rss_bytes();
}

// Dense accumulator over label ids 0..m (dummy included) with stamp-based
// clearing; one per worker thread.
struct RowScratch {
    std::vector<double> acc;
    std::vector<std::uint64_t> stamp;
    std::vector<std::uint32_t> touched;
    std::uint64_t cur = 0;

    explicit RowScratch(std::uint32_t slots) : acc(slots, 0.0), stamp(slots, 0) {}

    void begin() {
        ++cur;
        touched.clear();
    }
    void add(std::uint32_t l, double v) {
        if (stamp[l] != cur) {
            stamp[l] = cur;
            acc[l] = 0;
            touched.push_back(l);
        }
        acc[l] += v;
    }
    // Emits the accumulated row, scaled, sorted by label, pruned.
    void emit(LabelDist& out, double scale, double prune) {
        std::sort(touched.begin(), touched.end());
        out.clear();
        out.reserve(touched.size());
        for (auto l : touched) {
            const double v = acc[l] * scale;
            if (v < prune) continue;
            out.push_back(LabelScore{l, v});
        }
    }
};

inline double row_l1_delta(const LabelDist& a, const LabelDist& b) {
    double d = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].label < b[j].label)) {
            d += std::abs(a[i++].score);
        } else if (i == a.size() || b[j].label < a[i].label) {
            d += std::abs(b[j++].score);
        } else {
            d += std::abs(a[i].score - b[j].score);
            ++i;
            ++j;
        }
    }
    return d;
}

// Runs fn(begin, end, worker) over [0, n) split into `threads` chunks.
template <typename Fn>
void parallel_over_nodes(std::uint32_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        fn(0u, n, 0u);
        return;
    }
    const unsigned t = std::min<unsigned>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        const std::uint32_t lo = static_cast<std::uint32_t>(std::uint64_t(n) * w / t);
        const std::uint32_t hi = static_cast<std::uint32_t>(std::uint64_t(n) * (w + 1) / t);
        pool.emplace_back([&fn, lo, hi, w] { fn(lo, hi, w); });
    }
    for (auto& th : pool) th.join();
}

} // namespace detail

inline LabelState init_state(const Graph& g, const SeedSet& seeds, const SolverConfig& cfg) {
    if (seeds.n() != g.n())
        throw std::invalid_argument("seed set and graph disagree on node count");
    LabelState s;
    s.backend = cfg.backend;
    s.num_labels = seeds.num_labels();
    s.iteration = 0;
    if (cfg.backend == Backend::exact) {
        s.rows.resize(g.n());
        for (std::uint32_t v = 0; v < g.n(); ++v) s.rows[v] = seeds.row(v);
    } else {
        if (cfg.sketch.width == 0 || cfg.sketch.depth == 0)
            throw std::invalid_argument("sketch backend requires width and depth >= 1");
        CountMinSketch zero(cfg.sketch);
        s.sketches.assign(g.n(), zero); // copies share one hash family
        for (std::uint32_t v = 0; v < g.n(); ++v)
            for (const auto& e : seeds.row(v)) s.sketches[v].update(e.label, e.score);
    }
    return s;
}

// One synchronous MAD iteration; returns the max per-node L1 change.
inline double mad_step(LabelState& state, const PropagationWeights& pw, const SeedSet& seeds,
                       const SolverConfig& cfg) {
    const std::uint32_t n = pw.n();
    if (n == 0) {
        ++state.iteration;
        return 0.0;
    }
    const std::uint32_t dummy = seeds.dummy_label();
    const double mu1 = cfg.mu1, mu2 = cfg.mu2, mu3 = cfg.mu3;
    const unsigned threads = std::max(1u, cfg.threads);
    std::vector<double> worker_delta(std::max<unsigned>(threads, 1), 0.0);

    if (state.backend == Backend::exact) {
        std::vector<LabelDist> next(n);
        detail::parallel_over_nodes(n, threads, [&](std::uint32_t lo, std::uint32_t hi, unsigned w) {
            detail::RowScratch scratch(dummy + 1);
            double local = 0;
            for (std::uint32_t v = lo; v < hi; ++v) {
                scratch.begin();
                for (const auto& e : seeds.row(v)) scratch.add(e.label, mu1 * e.score);
                auto ns = pw.neighbors(v);
                auto cs = pw.coeffs(v);
                for (std::size_t i = 0; i < ns.size(); ++i) {
                    const double t = mu2 * cs[i];
                    for (const auto& e : state.rows[ns[i]]) scratch.add(e.label, t * e.score);
                }
                if (pw.p_abnd[v] > 0) scratch.add(dummy, mu3 * pw.p_abnd[v]);
                scratch.emit(next[v], 1.0 / pw.m_vv[v], cfg.prune_threshold);
                local = std::max(local, detail::row_l1_delta(next[v], state.rows[v]));
            }
            worker_delta[w] = std::max(worker_delta[w], local);
        });
        state.rows = std::move(next);
    } else {
        std::vector<CountMinSketch> next(n, CountMinSketch(state.sketches.front().params()));
        detail::parallel_over_nodes(n, threads, [&](std::uint32_t lo, std::uint32_t hi, unsigned w) {
            double local = 0;
            for (std::uint32_t v = lo; v < hi; ++v) {
                CountMinSketch& out = next[v];
                for (const auto& e : seeds.row(v)) out.update(e.label, mu1 * e.score);
                auto ns = pw.neighbors(v);
                auto cs = pw.coeffs(v);
                for (std::size_t i = 0; i < ns.size(); ++i)
                    out.axpy(mu2 * cs[i], state.sketches[ns[i]]);
                if (pw.p_abnd[v] > 0) out.update(dummy, mu3 * pw.p_abnd[v]);
                out.scale(1.0 / pw.m_vv[v]);
                local = std::max(local, l1_distance(out, state.sketches[v]));
            }
            worker_delta[w] = std::max(worker_delta[w], local);
        });
        state.sketches = std::move(next);
    }
    ++state.iteration;
    double delta = 0;
    for (double d : worker_delta) delta = std::max(delta, d);
    return delta;
}

// One harmonic iteration: seeds clamped to Q, others averaged over
// neighbors. Returns the max per-node L1 change.
inline double harmonic_step(LabelState& state, const Graph& g, const SeedSet& seeds,
                            const SolverConfig& cfg, bool* warned_isolated = nullptr) {
    const std::uint32_t n = g.n();
    if (n == 0) {
        ++state.iteration;
        return 0.0;
    }
    const unsigned threads = std::max(1u, cfg.threads);
    std::vector<double> worker_delta(std::max<unsigned>(threads, 1), 0.0);
    std::atomic<bool> saw_isolated{false};

    if (state.backend == Backend::exact) {
        std::vector<LabelDist> next(n);
        detail::parallel_over_nodes(n, threads, [&](std::uint32_t lo, std::uint32_t hi, unsigned w) {
            detail::RowScratch scratch(seeds.dummy_label() + 1);
            double local = 0;
            for (std::uint32_t v = lo; v < hi; ++v) {
                if (seeds.seeded(v)) {
                    next[v] = seeds.row(v);
                } else if (g.degree(v) <= 0) {
                    saw_isolated = true; // row stays empty
                } else {
                    scratch.begin();
                    const double inv_deg = 1.0 / g.degree(v);
                    auto ns = g.neighbors(v);
                    auto ws = g.weights(v);
                    for (std::size_t i = 0; i < ns.size(); ++i) {
                        const double t = ws[i] * inv_deg;
                        for (const auto& e : state.rows[ns[i]]) scratch.add(e.label, t * e.score);
                    }
                    scratch.emit(next[v], 1.0, cfg.prune_threshold);
                }
                local = std::max(local, detail::row_l1_delta(next[v], state.rows[v]));
            }
            worker_delta[w] = std::max(worker_delta[w], local);
        });
        state.rows = std::move(next);
    } else {
        std::vector<CountMinSketch> next(n, CountMinSketch(state.sketches.front().params()));
        detail::parallel_over_nodes(n, threads, [&](std::uint32_t lo, std::uint32_t hi, unsigned w) {
            double local = 0;
            for (std::uint32_t v = lo; v < hi; ++v) {
                CountMinSketch& out = next[v];
                if (seeds.seeded(v)) {
                    for (const auto& e : seeds.row(v)) out.update(e.label, e.score);
                } else if (g.degree(v) <= 0) {
                    saw_isolated = true;
                } else {
                    const double inv_deg = 1.0 / g.degree(v);
                    auto ns = g.neighbors(v);
                    auto ws = g.weights(v);
                    for (std::size_t i = 0; i < ns.size(); ++i)
                        out.axpy(ws[i] * inv_deg, state.sketches[ns[i]]);
                }
                local = std::max(local, l1_distance(out, state.sketches[v]));
            }
            worker_delta[w] = std::max(worker_delta[w], local);
        });
        state.sketches = std::move(next);
    }
    if (saw_isolated && warned_isolated != nullptr && !*warned_isolated) {
        warn("isolated unlabeled node(s) remain zero under the harmonic method");
        *warned_isolated = true;
    }
    ++state.iteration;
    double delta = 0;
    for (double d : worker_delta) delta = std::max(delta, d);
    return delta;
}

inline std::pair<LabelState, RunReport> run(const Graph& g, const SeedSet& seeds,
                                            const PropagationWeights& pw,
                                            const SolverConfig& cfg) {
    if (cfg.method == Method::mad) {
        const double tol = 1e-12;
        if (std::abs(cfg.mu1 - pw.mu1) > tol || std::abs(cfg.mu2 - pw.mu2) > tol ||
            std::abs(cfg.mu3 - pw.mu3) > tol)
            throw std::invalid_argument("solver mu values differ from the weights' mu values");
    }
    RunReport report;
    if (cfg.backend == Backend::sketch) {
        const bool bounded = cfg.mu1 + cfg.mu2 + cfg.mu3 <= 1.0 + 1e-12;
        if (!bounded) {
            if (cfg.guarantee)
                throw std::invalid_argument(
                    "mu1 + mu2 + mu3 must be <= 1 for the sketch error guarantee");
            warn("mu1 + mu2 + mu3 > 1: sketch error guarantee does not apply");
        }
        report.sketch_guarantee = bounded;
    }

    LabelState state = init_state(g, seeds, cfg);
    bool warned_isolated = false;
    const auto t0 = std::chrono::steady_clock::now();
    for (unsigned it = 1; it <= cfg.iterations; ++it) {
        const auto s0 = std::chrono::steady_clock::now();
        const double delta = cfg.method == Method::mad
                                 ? mad_step(state, pw, seeds, cfg)
                                 : harmonic_step(state, g, seeds, cfg, &warned_isolated);
        const auto s1 = std::chrono::steady_clock::now();
        IterationStats st;
        st.iteration = it;
        st.wall_ms = std::chrono::duration<double, std::milli>(s1 - s0).count();
        st.max_delta = delta;
        detail::fill_store_metrics(state, st);
        report.per_iteration.push_back(st);
        report.iterations_executed = it;
        if (cfg.convergence_delta && delta < *cfg.convergence_delta) break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    report.total_wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return {std::move(state), std::move(report)};
}

// Scores of the requested label ids at node v; sketch queries never
// underestimate, so values are >= the exact backend's.
inline LabelDist extract_scores(const LabelState& state, std::uint32_t v,
                                std::span<const std::uint32_t> labels) {
    if (v >= state.n()) {
        std::ostringstream msg;
        msg << "node id " << v << " out of range (n = " << state.n() << ")";
        throw std::invalid_argument(msg.str());
    }
    LabelDist out;
    out.reserve(labels.size());
    if (state.backend == Backend::exact) {
        for (auto l : labels) out.push_back(LabelScore{l, dist_get(state.rows[v], l)});
    } else {
        for (auto l : labels) out.push_back(LabelScore{l, state.sketches[v].query(l)});
    }
    return out;
}

// All real labels (dummy excluded).
inline LabelDist extract_all(const LabelState& state, std::uint32_t v) {
    if (v >= state.n()) {
        std::ostringstream msg;
        msg << "node id " << v << " out of range (n = " << state.n() << ")";
        throw std::invalid_argument(msg.str());
    }
    LabelDist out;
    if (state.backend == Backend::exact) {
        out.reserve(state.rows[v].size());
        for (const auto& e : state.rows[v])
            if (e.label < state.num_labels) out.push_back(e);
    } else {
        out.reserve(state.num_labels);
        for (std::uint32_t l = 0; l < state.num_labels; ++l)
            out.push_back(LabelScore{l, state.sketches[v].query(l)});
    }
    return out;
}

// "node<TAB>label<TAB>score" rows, top-k per node (k = 0 means all), scores
// descending, ties by label id ascending, dummy label excluded.
inline void write_top_k(const LabelState& state, const Graph& g, const Interner& labels,
                        std::size_t k, std::ostream& out) {
    out.precision(12);
    for (std::uint32_t v = 0; v < state.n(); ++v) {
        LabelDist top = dist_top_k(extract_all(state, v), k);
        for (const auto& e : top)
            out << g.nodes().name(v) << '\t' << labels.name(e.label) << '\t' << e.score << '\n';
    }
}

} // namespace sketchprop
