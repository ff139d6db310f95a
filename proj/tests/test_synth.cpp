#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sketchprop/metrics.hpp>
#include <sketchprop/synth.hpp>

#include "helpers.hpp"

using namespace sketchprop;
using Catch::Matchers::WithinAbs;

namespace {

// Independent reachability check (the generators run their own).
bool bfs_spans(const Graph& g, const std::vector<std::uint32_t>& members) {
    if (members.empty()) return true;
    std::set<std::uint32_t> inside(members.begin(), members.end());
    std::set<std::uint32_t> seen{members.front()};
    std::vector<std::uint32_t> stack{members.front()};
    while (!stack.empty()) {
        const std::uint32_t v = stack.back();
        stack.pop_back();
        for (auto u : g.neighbors(v))
            if (inside.count(u) && !seen.count(u)) {
                seen.insert(u);
                stack.push_back(u);
            }
    }
    return seen.size() == inside.size();
}

std::vector<std::uint32_t> every_node(const Graph& g) {
    std::vector<std::uint32_t> v(g.n());
    for (std::uint32_t i = 0; i < g.n(); ++i) v[i] = i;
    return v;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::map<std::string, std::string> meta_map(const Dataset& d) {
    return {d.meta.begin(), d.meta.end()};
}

} // namespace

TEST_CASE("ksparse planting is exactly k-sparse with balanced seeds") {
    KsparseSpec spec;
    spec.n = 200;
    spec.m = 20;
    spec.k = 2;
    const Dataset d = gen_ksparse(spec);
    REQUIRE(d.n == 200);
    REQUIRE(d.m == 20);

    const Graph g = d.build_graph();
    const SeedSet seeds = d.build_seeds(g);
    REQUIRE(seeds.num_labels() == 20);
    REQUIRE(seeds.labels().name(3) == "L3");
    REQUIRE(seeds.k_sparsity() == 2.0); // binary scores: L1 == label count
    REQUIRE(bfs_spans(g, every_node(g)));

    // Every label receives exactly seeds_per_label (= k here) seed entries.
    std::map<std::uint32_t, std::uint32_t> per_label;
    for (const auto& [node, label, score] : d.seeds) {
        REQUIRE(score == 1.0);
        ++per_label[label];
    }
    REQUIRE(per_label.size() == 20);
    for (const auto& [label, count] : per_label) REQUIRE(count == 2);

    // Each seed node carries exactly k distinct labels.
    std::map<std::uint32_t, std::set<std::uint32_t>> by_node;
    for (const auto& [node, label, score] : d.seeds) by_node[node].insert(label);
    for (const auto& [node, labels] : by_node) REQUIRE(labels.size() == 2);

    const auto meta = meta_map(d);
    REQUIRE(meta.at("generator") == "ksparse");
    REQUIRE(meta.at("verified_connected") == "1");
    REQUIRE(std::stod(meta.at("verified_k_sparsity")) == 2.0);
}

TEST_CASE("ksparse gold covers the planted label set of each cluster") {
    KsparseSpec spec;
    spec.n = 40;
    spec.m = 4;
    spec.k = 2;
    const Dataset d = gen_ksparse(spec);
    std::map<std::uint32_t, std::set<std::uint32_t>> gold;
    for (const auto& [node, label] : d.gold) gold[node].insert(label);
    REQUIRE(gold.size() == 40); // every node is evaluated
    for (std::uint32_t v = 0; v < 40; ++v) {
        const std::uint32_t cluster = v / 10;
        const std::set<std::uint32_t> expect = {cluster, (cluster + 1) % 4};
        REQUIRE(gold.at(v) == expect);
    }
}

TEST_CASE("ksparse honours seeds_per_label multiples") {
    KsparseSpec spec;
    spec.n = 60;
    spec.m = 6;
    spec.k = 2;
    spec.seeds_per_label = 6; // three seed nodes per cluster
    const Dataset d = gen_ksparse(spec);
    std::map<std::uint32_t, std::uint32_t> per_label;
    for (const auto& [node, label, score] : d.seeds) ++per_label[label];
    for (const auto& [label, count] : per_label) REQUIRE(count == 6);
    const Graph g = d.build_graph();
    REQUIRE(d.build_seeds(g).k_sparsity() == 2.0);
}

TEST_CASE("minimal ksparse dataset stays valid") {
    KsparseSpec spec;
    spec.n = 10;
    spec.m = 2;
    spec.k = 1;
    const Dataset d = gen_ksparse(spec);
    const Graph g = d.build_graph();
    REQUIRE(d.build_seeds(g).k_sparsity() == 1.0);
    REQUIRE(bfs_spans(g, every_node(g)));
}

TEST_CASE("ksparse validates its knobs") {
    KsparseSpec bad;
    bad.n = 10;
    bad.m = 20; // n < m
    REQUIRE_THROWS_WITH(gen_ksparse(bad), "ksparse: n must be >= m");

    bad = KsparseSpec{};
    bad.n = 40;
    bad.m = 4;
    bad.k = 5; // k > m
    REQUIRE_THROWS_WITH(gen_ksparse(bad), "ksparse: k must be in [1, m]");

    bad = KsparseSpec{};
    bad.n = 40;
    bad.m = 4;
    bad.k = 2;
    bad.seeds_per_label = 3; // not a multiple of k
    REQUIRE_THROWS_WITH(gen_ksparse(bad), "ksparse: seeds_per_label must be a multiple of k");

    bad = KsparseSpec{};
    bad.n = 10;
    bad.m = 5;
    bad.k = 1;
    bad.seeds_per_label = 3; // needs 3 seed nodes in 2-node clusters
    REQUIRE_THROWS_AS(gen_ksparse(bad), std::invalid_argument);
}

TEST_CASE("datasets serialize deterministically") {
    const auto dir = testutil::scratch_dir("determinism");
    KsparseSpec spec;
    spec.n = 80;
    spec.m = 8;
    spec.k = 2;
    write_dataset(gen_ksparse(spec), (dir / "a").string());
    write_dataset(gen_ksparse(spec), (dir / "b").string());
    for (const char* ext : {".edges", ".seeds", ".gold", ".meta"}) {
        const std::string a = slurp(dir / ("a" + std::string(ext)));
        REQUIRE_FALSE(a.empty());
        REQUIRE(a == slurp(dir / ("b" + std::string(ext))));
    }

    spec.rng_seed = 2; // a different stream must change the topology
    write_dataset(gen_ksparse(spec), (dir / "c").string());
    REQUIRE(slurp(dir / "a.edges") != slurp(dir / "c.edges"));
}

TEST_CASE("written dataset reloads into the same graph, seeds, and gold") {
    const auto dir = testutil::scratch_dir("reload");
    KsparseSpec spec;
    spec.n = 60;
    spec.m = 6;
    spec.k = 2;
    const Dataset d = gen_ksparse(spec);
    write_dataset(d, (dir / "ds").string());

    const Graph built = d.build_graph();
    std::ifstream edges(dir / "ds.edges");
    const Graph loaded = load_edges(edges);
    REQUIRE(testutil::same_structure(built, loaded));

    std::ifstream seeds_in(dir / "ds.seeds");
    const SeedSet loaded_seeds = load_seeds(seeds_in, loaded);
    const SeedSet built_seeds = d.build_seeds(built);
    REQUIRE(loaded_seeds.num_labels() == built_seeds.num_labels());
    REQUIRE(loaded_seeds.k_sparsity() == built_seeds.k_sparsity());
    REQUIRE(loaded_seeds.seed_node_count() == built_seeds.seed_node_count());
    for (std::uint32_t v = 0; v < built.n(); ++v) {
        const auto name = built.nodes().name(v);
        const auto lv = loaded.nodes().find(name);
        REQUIRE(lv.has_value());
        // Label vocabularies may intern in different orders; compare scores.
        const auto& brow = built_seeds.row(v);
        const auto& lrow = loaded_seeds.row(*lv);
        REQUIRE(brow.size() == lrow.size());
        for (const auto& e : brow) {
            const auto lbl = loaded_seeds.labels().find(built_seeds.labels().name(e.label));
            REQUIRE(lbl.has_value());
            REQUIRE(dist_get(lrow, *lbl) == e.score);
        }
    }

    std::ifstream gold_in(dir / "ds.gold");
    const GoldLabels gold = load_gold(gold_in, loaded, loaded_seeds.labels());
    REQUIRE(gold.entries == d.gold.size());
}

TEST_CASE("zipf dataset fits its target exponent end to end") {
    ZipfSpec spec;
    spec.n = 120;
    spec.m = 50;
    spec.z = 1.0;
    const Dataset d = gen_zipf(spec);
    const auto meta = meta_map(d);
    const double verified = std::stod(meta.at("verified_z"));
    REQUIRE(verified >= 0.85);
    REQUIRE(verified <= 1.15);

    // Re-fit independently from a fresh propagation over the dataset.
    const Graph g = d.build_graph();
    const SeedSet seeds = d.build_seeds(g);
    SolverConfig cfg;
    const auto pw = build_weights(g, seeds, WeightMode::mad_entropy, cfg.mu1, cfg.mu2, cfg.mu3);
    const auto [state, report] = run(g, seeds, pw, cfg);
    const SkewReport fit = skew_report(state, 50);
    REQUIRE_THAT(fit.z, WithinAbs(verified, 1e-6));
}

TEST_CASE("steeper zipf targets stay inside the widened band") {
    ZipfSpec spec;
    spec.n = 90;
    spec.m = 40;
    spec.z = 1.5;
    const Dataset d = gen_zipf(spec);
    const double verified = std::stod(meta_map(d).at("verified_z"));
    REQUIRE(verified >= 1.3); // band 0.15 + 0.1 * (z - 1)
    REQUIRE(verified <= 1.7);
}

TEST_CASE("zipf seeds follow the rank profile") {
    ZipfSpec spec;
    spec.n = 30;
    spec.m = 20;
    spec.z = 1.2;
    spec.head = 5;
    spec.verify = false;
    const Dataset d = gen_zipf(spec);
    std::map<std::uint32_t, std::vector<double>> by_node;
    for (const auto& [node, label, score] : d.seeds) by_node[node].push_back(score);
    REQUIRE(by_node.size() == 30);
    for (const auto& [node, scores] : by_node) {
        REQUIRE(scores.size() == 5);
        for (std::uint32_t r = 1; r <= 5; ++r)
            REQUIRE_THAT(scores[r - 1], WithinAbs(std::pow(double(r), -1.2), 1e-15));
    }
    // Ring plus chords: at least the ring, at most ring + floor(0.1 n).
    REQUIRE(d.edges.size() >= 30);
    REQUIRE(d.edges.size() <= 33);
    REQUIRE(bfs_spans(d.build_graph(), every_node(d.build_graph())));
}

TEST_CASE("degenerate single-label zipf stays well formed") {
    ZipfSpec spec;
    spec.n = 12;
    spec.m = 1;
    const Dataset d = gen_zipf(spec); // head = 1: verification is skipped
    REQUIRE(d.seeds.size() == 12);
    for (const auto& [node, label, score] : d.seeds) {
        REQUIRE(label == 0);
        REQUIRE(score == 1.0);
    }
    REQUIRE(meta_map(d).count("verified_z") == 0);
}

TEST_CASE("zipf validates its knobs") {
    ZipfSpec bad;
    bad.z = 0.0;
    REQUIRE_THROWS_WITH(gen_zipf(bad), "zipf: z must be > 0");
    bad = ZipfSpec{};
    bad.n = 2;
    REQUIRE_THROWS_WITH(gen_zipf(bad), "zipf: n must be >= 3");
    bad = ZipfSpec{};
    bad.groups = 0;
    REQUIRE_THROWS_WITH(gen_zipf(bad), "zipf: groups must be in [1, n]");
}

TEST_CASE("community blocks respect the conductance budget") {
    CommunitySpec spec;
    spec.blocks = 6;
    spec.block_size = 20;
    spec.psi_target = 0.05;
    const Dataset d = gen_community(spec);
    REQUIRE(d.n == 120);
    REQUIRE(d.m == 6);
    REQUIRE(d.blocks.size() == 6);

    const Graph g = d.build_graph();
    double worst = 0;
    for (const auto& members : d.blocks) {
        REQUIRE(members.size() == 20);
        REQUIRE(bfs_spans(g, members));
        worst = std::max(worst, max_conductance(g, members));
    }
    REQUIRE(worst <= 0.05);
    REQUIRE(worst > 0.0); // bridges exist
    REQUIRE_THAT(std::stod(meta_map(d).at("measured_psi")), WithinAbs(worst, 1e-6));

    // One binary seed per block at its middle node; gold covers every member.
    REQUIRE(d.seeds.size() == 6);
    for (std::uint32_t b = 0; b < 6; ++b) {
        const auto& [node, label, score] = d.seeds[b];
        REQUIRE(node == b * 20 + 10);
        REQUIRE(label == b);
        REQUIRE(score == 1.0);
    }
    REQUIRE(d.gold.size() == 120);
    for (const auto& [node, label] : d.gold) REQUIRE(label == node / 20);
}

TEST_CASE("community with zero target has no bridges and zero conductance") {
    CommunitySpec spec;
    spec.blocks = 4;
    spec.block_size = 10;
    spec.psi_target = 0.0;
    const Dataset d = gen_community(spec);
    const Graph g = d.build_graph();
    for (const auto& members : d.blocks) {
        REQUIRE(max_conductance(g, members) == 0.0);
        REQUIRE(bfs_spans(g, members));
    }
    REQUIRE_FALSE(bfs_spans(g, every_node(g))); // blocks stay apart
    REQUIRE(std::stod(meta_map(d).at("measured_psi")) == 0.0);
}

TEST_CASE("community writes a blocks file that mirrors the partition") {
    const auto dir = testutil::scratch_dir("blocks");
    CommunitySpec spec;
    spec.blocks = 3;
    spec.block_size = 4;
    const Dataset d = gen_community(spec);
    write_dataset(d, (dir / "c").string());
    const std::string text = slurp(dir / "c.blocks");
    REQUIRE(text ==
            "v0 v1 v2 v3\n"
            "v4 v5 v6 v7\n"
            "v8 v9 v10 v11\n");
}

TEST_CASE("community validates its knobs") {
    CommunitySpec bad;
    bad.psi_target = 1.0;
    REQUIRE_THROWS_WITH(gen_community(bad), "community: psi_target must be in [0, 1)");
    bad = CommunitySpec{};
    bad.block_size = 1;
    REQUIRE_THROWS_WITH(gen_community(bad), "community: block_size must be >= 2");
    bad = CommunitySpec{};
    bad.blocks = 0;
    REQUIRE_THROWS_WITH(gen_community(bad), "community: blocks must be >= 1");
}
