#pragma once

// Deterministic synthetic dataset generators for the three structural
// regimes the sizing analysis depends on:
//
//   gen_ksparse   — planted label clusters with exactly-k-sparse binary
//                   seeding on a sparse connected graph.
//   gen_zipf      — every node seeded with a Zipf(z) score profile over a
//                   group-rotated label ranking, so converged exact label
//                   rows stay Zipf-like with exponent ~ z.
//   gen_community — disjoint dense blocks joined by weak ring bridges whose
//                   weights are chosen so every block's max-conductance
//                   stays within the requested bound.
//
// Each generator verifies its declared structural property after
// construction and throws if violated. Datasets serialize to
// <prefix>.edges/.seeds/.gold/.meta (+ .blocks) in the module text formats;
// node i is named "v<i>", label j "L<j>". The RNG is mt19937_64 with
// in-house draw helpers, recorded in the metadata.

#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "graph.hpp"
#include "metrics.hpp"
#include "seeds.hpp"
#include "solver.hpp"
#include "weights.hpp"

namespace sketchprop {

struct Dataset {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges; // u, v, weight
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> seeds; // node, label, score
    std::vector<std::pair<std::uint32_t, std::uint32_t>> gold;          // node, label
    std::vector<std::pair<std::string, std::string>> meta;              // key=value rows
    std::vector<std::vector<std::uint32_t>> blocks;                     // community partitions

    static std::string node_name(std::uint32_t i) { return "v" + std::to_string(i); }
    static std::string label_name(std::uint32_t j) { return "L" + std::to_string(j); }

    Graph build_graph() const {
        GraphBuilder b(true);
        b.ensure_nodes(n);
        for (const auto& [u, v, w] : edges) b.add_edge(u, v, w);
        return b.build();
    }

    SeedSet build_seeds(const Graph& g) const {
        SeedSet s(g.n());
        for (std::uint32_t j = 0; j < m; ++j) s.intern_label(label_name(j));
        for (const auto& [node, label, score] : seeds) s.add(node, label, score);
        return s;
    }

    GoldLabels build_gold(const Graph& g) const {
        GoldLabels gl;
        gl.by_node.resize(g.n());
        for (const auto& [node, label] : gold) {
            gl.by_node[node].push_back(label);
            ++gl.entries;
        }
        return gl;
    }
};

namespace detail {

// Deterministic draws on top of the standard-specified mt19937_64 stream
// (library distributions are not portable across implementations).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % bound;
    }

    double real() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
};

inline bool connected(const Graph& g, const std::vector<std::uint32_t>& nodes) {
    if (nodes.empty()) return true;
    std::vector<char> member(g.n(), 0), seen(g.n(), 0);
    for (auto v : nodes) member[v] = 1;
    std::vector<std::uint32_t> stack{nodes.front()};
    seen[nodes.front()] = 1;
    std::size_t visited = 0;
    while (!stack.empty()) {
        const std::uint32_t v = stack.back();
        stack.pop_back();
        ++visited;
        for (auto u : g.neighbors(v))
            if (member[u] && !seen[u]) {
                seen[u] = 1;
                stack.push_back(u);
            }
    }
    return visited == nodes.size();
}

inline std::vector<std::uint32_t> all_nodes(std::uint32_t n) {
    std::vector<std::uint32_t> v(n);
    for (std::uint32_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

// Adds a chain plus random extra edges inside [lo, hi) until the mean
// degree target; returns the weighted intra degree per local index.
inline std::vector<double> fill_block(Dataset& d, Rng& rng, std::uint32_t lo, std::uint32_t hi,
                                      double mean_degree, double weight) {
    const std::uint32_t size = hi - lo;
    std::vector<double> degree(size, 0.0);
    auto push = [&](std::uint32_t a, std::uint32_t b) {
        d.edges.emplace_back(a, b, weight);
        degree[a - lo] += weight;
        degree[b - lo] += weight;
    };
    std::set<std::pair<std::uint32_t, std::uint32_t>> used;
    for (std::uint32_t i = lo; i + 1 < hi; ++i) {
        push(i, i + 1);
        used.insert({i, i + 1});
    }
    if (size >= 3) {
        const std::uint64_t max_extra =
            static_cast<std::uint64_t>(size) * (size - 1) / 2 - (size - 1);
        std::uint64_t extra = 0;
        if (mean_degree > 2)
            extra = std::min<std::uint64_t>(
                max_extra, static_cast<std::uint64_t>(size * (mean_degree - 2.0) / 2.0));
        std::uint64_t attempts = 0;
        while (extra > 0 && attempts < 50 * extra + 100) {
            ++attempts;
            std::uint32_t a = lo + static_cast<std::uint32_t>(rng.below(size));
            std::uint32_t b = lo + static_cast<std::uint32_t>(rng.below(size));
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            if (!used.insert({a, b}).second) continue;
            push(a, b);
            --extra;
        }
    }
    return degree;
}

} // namespace detail

struct KsparseSpec {
    std::uint32_t n = 2000;
    std::uint32_t m = 200;            // label count; nodes split into m clusters
    std::uint32_t k = 2;              // labels per seed node (exact sparsity)
    std::uint32_t seeds_per_label = 0; // seed entries per label; 0 = k (one seed node
                                       // per cluster); must be a multiple of k
    double mean_degree = 6.0;         // intra-cluster degree target
    double intra_weight = 1.0;
    double bridge_weight = 0.5;       // cluster-ring bridges
    std::uint64_t rng_seed = 1;
};

// Planted clusters: cluster c spans nodes [c*n/m, (c+1)*n/m); its
// seeds_per_label/k seed nodes each carry labels c, c+1, ..., c+k-1 (mod m)
// with score 1, making the seeding exactly k-sparse, binary, and giving
// every label exactly seeds_per_label seed entries. The gold set of every
// cluster member is the full set of labels planted on its cluster.
inline Dataset gen_ksparse(const KsparseSpec& spec) {
    if (spec.m < 1) throw std::invalid_argument("ksparse: m must be >= 1");
    if (spec.n < spec.m) throw std::invalid_argument("ksparse: n must be >= m");
    if (spec.k < 1 || spec.k > spec.m)
        throw std::invalid_argument("ksparse: k must be in [1, m]");
    const std::uint32_t spl = spec.seeds_per_label == 0 ? spec.k : spec.seeds_per_label;
    if (spl % spec.k != 0)
        throw std::invalid_argument("ksparse: seeds_per_label must be a multiple of k");
    const std::uint32_t per_cluster = spl / spec.k;
    const std::uint32_t min_cluster = spec.n / spec.m;
    if (per_cluster < 1 || per_cluster > min_cluster) {
        std::ostringstream msg;
        msg << "ksparse: infeasible seeding: " << spl << " seed(s) per label need "
            << per_cluster << " seed node(s) per cluster but clusters have only " << min_cluster
            << " node(s) (total seed entries would exceed n*k)";
        throw std::invalid_argument(msg.str());
    }

    Dataset d;
    d.n = spec.n;
    d.m = spec.m;
    detail::Rng rng(spec.rng_seed);
    auto cluster_lo = [&](std::uint32_t c) {
        return static_cast<std::uint32_t>(std::uint64_t(spec.n) * c / spec.m);
    };
    for (std::uint32_t c = 0; c < spec.m; ++c) {
        const std::uint32_t lo = cluster_lo(c), hi = cluster_lo(c + 1);
        detail::fill_block(d, rng, lo, hi, spec.mean_degree, spec.intra_weight);
        for (std::uint32_t s = 0; s < per_cluster; ++s)
            for (std::uint32_t t = 0; t < spec.k; ++t)
                d.seeds.emplace_back(lo + s, (c + t) % spec.m, 1.0);
        for (std::uint32_t v = lo; v < hi; ++v)
            for (std::uint32_t t = 0; t < spec.k; ++t)
                d.gold.emplace_back(v, (c + t) % spec.m);
    }
    if (spec.m > 1)
        for (std::uint32_t c = 0; c < spec.m; ++c)
            d.edges.emplace_back(cluster_lo(c + 1) - 1, cluster_lo((c + 1) % spec.m),
                                 spec.bridge_weight);

    Graph g = d.build_graph();
    SeedSet seeds = d.build_seeds(g);
    if (!detail::connected(g, detail::all_nodes(g.n())))
        throw std::runtime_error("ksparse generator postcondition failed: graph not connected");
    const double ks = seeds.k_sparsity();
    if (std::abs(ks - spec.k) > 1e-9) {
        std::ostringstream msg;
        msg << "ksparse generator postcondition failed: k-sparsity is " << ks << ", expected "
            << spec.k;
        throw std::runtime_error(msg.str());
    }
    std::vector<std::uint32_t> per_label(spec.m, 0);
    for (const auto& [node, label, score] : d.seeds) ++per_label[label];
    for (std::uint32_t j = 0; j < spec.m; ++j)
        if (per_label[j] != spl)
            throw std::runtime_error(
                "ksparse generator postcondition failed: seed count per label is off");

    d.meta = {{"generator", "ksparse"},
              {"rng", "mt19937_64"},
              {"rng_seed", std::to_string(spec.rng_seed)},
              {"n", std::to_string(spec.n)},
              {"m", std::to_string(spec.m)},
              {"k", std::to_string(spec.k)},
              {"seeds_per_label", std::to_string(spl)},
              {"verified_k_sparsity", std::to_string(ks)},
              {"verified_connected", "1"}};
    return d;
}

struct ZipfSpec {
    std::uint32_t n = 200;
    std::uint32_t m = 100;
    double z = 1.0;            // target skew exponent, > 0
    std::uint32_t groups = 10; // contiguous node groups with rotated rankings
    std::uint32_t head = 0;    // ranks seeded per node; 0 = all m
    double chord_fraction = 0.1;
    std::uint64_t rng_seed = 1;
    bool verify = true;        // run the exact solver and fit the exponent
};

// Ring (plus a few random chords), every node seeded with the full Zipf
// profile score(rank r) = r^-z over a group-rotated label order. Seed
// fidelity dominates the default propagation weights, so converged exact
// rows keep the Zipf shape; verification fits the exponent end-to-end.
inline Dataset gen_zipf(const ZipfSpec& spec) {
    if (!(spec.z > 0)) throw std::invalid_argument("zipf: z must be > 0");
    if (spec.m < 1) throw std::invalid_argument("zipf: m must be >= 1");
    if (spec.n < 3) throw std::invalid_argument("zipf: n must be >= 3");
    if (spec.groups < 1 || spec.groups > spec.n)
        throw std::invalid_argument("zipf: groups must be in [1, n]");

    Dataset d;
    d.n = spec.n;
    d.m = spec.m;
    detail::Rng rng(spec.rng_seed);
    for (std::uint32_t v = 0; v < spec.n; ++v)
        d.edges.emplace_back(v, (v + 1) % spec.n, 1.0);
    std::set<std::pair<std::uint32_t, std::uint32_t>> used;
    std::uint64_t chords = static_cast<std::uint64_t>(spec.chord_fraction * spec.n);
    std::uint64_t attempts = 0;
    while (chords > 0 && attempts < 1000 + 100 * chords) {
        ++attempts;
        std::uint32_t a = static_cast<std::uint32_t>(rng.below(spec.n));
        std::uint32_t b = static_cast<std::uint32_t>(rng.below(spec.n));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (b == a + 1 || (a == 0 && b == spec.n - 1)) continue;
        if (!used.insert({a, b}).second) continue;
        d.edges.emplace_back(a, b, 1.0);
        --chords;
    }

    const std::uint32_t stride = std::max<std::uint32_t>(1, spec.m / spec.groups);
    const std::uint32_t head = spec.head == 0 ? spec.m : std::min(spec.head, spec.m);
    for (std::uint32_t v = 0; v < spec.n; ++v) {
        const std::uint32_t group =
            static_cast<std::uint32_t>(std::uint64_t(v) * spec.groups / spec.n);
        const std::uint32_t base = (group * stride) % spec.m;
        for (std::uint32_t r = 1; r <= head; ++r)
            d.seeds.emplace_back(v, (base + r - 1) % spec.m,
                                 std::pow(static_cast<double>(r), -spec.z));
        d.gold.emplace_back(v, base);
    }

    d.meta = {{"generator", "zipf"},
              {"rng", "mt19937_64"},
              {"rng_seed", std::to_string(spec.rng_seed)},
              {"n", std::to_string(spec.n)},
              {"m", std::to_string(spec.m)},
              {"target_z", std::to_string(spec.z)},
              {"groups", std::to_string(spec.groups)},
              {"head", std::to_string(head)}};

    Graph g = d.build_graph();
    if (!detail::connected(g, detail::all_nodes(g.n())))
        throw std::runtime_error("zipf generator postcondition failed: graph not connected");
    if (spec.verify && head >= 2) {
        SeedSet seeds = d.build_seeds(g);
        SolverConfig cfg; // defaults: mad, exact, 10 iterations
        PropagationWeights pw =
            build_weights(g, seeds, WeightMode::mad_entropy, cfg.mu1, cfg.mu2, cfg.mu3);
        auto [state, report] = run(g, seeds, pw, cfg);
        SkewReport skew = skew_report(state, head);
        const double band = 0.15 + 0.1 * std::max(0.0, spec.z - 1.0);
        if (std::abs(skew.z - spec.z) > band) {
            std::ostringstream msg;
            msg << "zipf generator postcondition failed: fitted exponent " << skew.z
                << " outside " << spec.z << " +/- " << band;
            throw std::runtime_error(msg.str());
        }
        d.meta.emplace_back("verified_z", std::to_string(skew.z));
    }
    return d;
}

struct CommunitySpec {
    std::uint32_t blocks = 20;
    std::uint32_t block_size = 50;
    double intra_degree = 6.0;
    double intra_weight = 1.0;
    double psi_target = 0.05; // max-conductance bound per block; 0 = no bridges
    std::uint64_t rng_seed = 1;
};

// Dense uniform blocks joined in a ring by single bridge edges whose weight
// is set from the endpoint intra degrees so that every block's measured
// max-conductance stays at or below psi_target. One binary seed per block
// (the middle node); gold is the block label.
inline Dataset gen_community(const CommunitySpec& spec) {
    if (spec.blocks < 1) throw std::invalid_argument("community: blocks must be >= 1");
    if (spec.block_size < 2) throw std::invalid_argument("community: block_size must be >= 2");
    if (!(spec.psi_target >= 0 && spec.psi_target < 1))
        throw std::invalid_argument("community: psi_target must be in [0, 1)");

    Dataset d;
    d.n = spec.blocks * spec.block_size;
    d.m = spec.blocks;
    detail::Rng rng(spec.rng_seed);
    std::vector<std::vector<double>> intra_degree(spec.blocks);
    for (std::uint32_t b = 0; b < spec.blocks; ++b) {
        const std::uint32_t lo = b * spec.block_size, hi = lo + spec.block_size;
        intra_degree[b] = detail::fill_block(d, rng, lo, hi, spec.intra_degree, spec.intra_weight);
        d.seeds.emplace_back(lo + spec.block_size / 2, b, 1.0);
        std::vector<std::uint32_t> members;
        for (std::uint32_t v = lo; v < hi; ++v) {
            members.push_back(v);
            d.gold.emplace_back(v, b);
        }
        d.blocks.push_back(std::move(members));
    }

    std::vector<std::size_t> bridge_idx;
    if (spec.blocks >= 2 && spec.psi_target > 0) {
        for (std::uint32_t b = 0; b < spec.blocks; ++b) {
            const std::uint32_t nb = (b + 1) % spec.blocks;
            const std::uint32_t out = b * spec.block_size + spec.block_size - 1;
            const std::uint32_t in = nb * spec.block_size;
            const double d_out = intra_degree[b][spec.block_size - 1];
            const double d_in = intra_degree[nb][0];
            const double dmin = std::min(d_out, d_in);
            const double w = 0.95 * spec.psi_target * dmin / (1.0 - spec.psi_target);
            bridge_idx.push_back(d.edges.size());
            d.edges.emplace_back(out, in, w);
        }
    }

    auto measure = [&](const Graph& g) {
        double worst = 0;
        for (const auto& members : d.blocks)
            worst = std::max(worst, max_conductance(g, members));
        return worst;
    };
    Graph g = d.build_graph();
    for (const auto& members : d.blocks)
        if (!detail::connected(g, members))
            throw std::runtime_error(
                "community generator postcondition failed: block not connected");
    double psi = measure(g);
    if (!bridge_idx.empty() && psi > spec.psi_target) {
        // one corrective rescale of the bridge weights, then re-measure
        const double f = 0.9 * spec.psi_target / psi;
        for (auto i : bridge_idx) std::get<2>(d.edges[i]) *= f;
        g = d.build_graph();
        psi = measure(g);
        if (psi > spec.psi_target) {
            std::ostringstream msg;
            msg << "community: psi_target " << spec.psi_target
                << " unreachable with the requested density; achievable psi is " << psi;
            throw std::invalid_argument(msg.str());
        }
    }

    d.meta = {{"generator", "community"},
              {"rng", "mt19937_64"},
              {"rng_seed", std::to_string(spec.rng_seed)},
              {"blocks", std::to_string(spec.blocks)},
              {"block_size", std::to_string(spec.block_size)},
              {"psi_target", std::to_string(spec.psi_target)},
              {"measured_psi", std::to_string(psi)}};
    return d;
}

// Writes <prefix>.edges/.seeds/.gold/.meta (+ .blocks when present).
inline void write_dataset(const Dataset& d, const std::string& prefix) {
    auto open = [](const std::string& path) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path + " for writing");
        out.precision(17);
        return out;
    };
    {
        auto out = open(prefix + ".edges");
        for (const auto& [u, v, w] : d.edges)
            out << Dataset::node_name(u) << '\t' << Dataset::node_name(v) << '\t' << w << '\n';
    }
    {
        auto out = open(prefix + ".seeds");
        for (const auto& [node, label, score] : d.seeds)
            out << Dataset::node_name(node) << '\t' << Dataset::label_name(label) << '\t' << score
                << '\n';
    }
    {
        auto out = open(prefix + ".gold");
        for (const auto& [node, label] : d.gold)
            out << Dataset::node_name(node) << '\t' << Dataset::label_name(label) << '\n';
    }
    {
        auto out = open(prefix + ".meta");
        for (const auto& [key, value] : d.meta) out << key << '=' << value << '\n';
    }
    if (!d.blocks.empty()) {
        auto out = open(prefix + ".blocks");
        for (const auto& members : d.blocks) {
            for (std::size_t i = 0; i < members.size(); ++i)
                out << (i ? " " : "") << Dataset::node_name(members[i]);
            out << '\n';
        }
    }
}

} // namespace sketchprop
