// sketchprop — command-line front end for the propagation library.
//
// Subcommands: propagate, size, eval, skew, conductance, gen, bench.
// Every flag can be overridden through an environment variable named
// SKETCHPROP_<SUBCOMMAND>_<FLAG> (dashes become underscores). All commands
// exit 0 on success and nonzero with a one-line error on stderr otherwise.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <sketchprop/graph.hpp>
#include <sketchprop/metrics.hpp>
#include <sketchprop/seeds.hpp>
#include <sketchprop/solver.hpp>
#include <sketchprop/synth.hpp>
#include <sketchprop/weights.hpp>

namespace {

using namespace sketchprop;

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    return f;
}

// Re-raises parse errors with the file path prepended.
template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    } catch (const format_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

char sep_of(const std::string& format) { return format == "csv" ? ',' : '\t'; }

WeightMode weight_mode_of(const std::string& s) {
    return s == "uniform" ? WeightMode::uniform : WeightMode::mad_entropy;
}

// ---------------------------------------------------------------- solver args

// Flags shared by propagate and bench: solver configuration plus sketch
// dimensioning (explicit --width/--depth or --auto-size <regime>).
struct SolveArgs {
    std::string edges, seeds;
    bool directed = false;
    std::string method = "mad";
    std::string weight_mode = "mad-entropy";
    double mu1 = 0.98, mu2 = 0.01, mu3 = 0.01, beta = 2.0;
    unsigned iters = 10;
    double convergence = -1; // < 0 disables the convergence stop
    double prune = 1e-12;
    unsigned threads = 1;
    bool guarantee = false;
    std::uint32_t width = 0, depth = 0;
    std::uint64_t hash_seed = 1;
    std::string auto_size; // empty, or sparse|zipf|community
    std::uint32_t k = 1;
    double z = 1.5, psi = 1.0, eps = 0.05, delta = 0.1;
    std::uint64_t m = 0; // declared label count for sizing; 0 = from seeds
};

void add_solver_flags(CLI::App* c, SolveArgs& a, bool with_backend_choice,
                      std::string* backend_out) {
    c->add_option("--edges", a.edges, "Edge list file (\"src dst [weight]\")")->required();
    c->add_option("--seeds", a.seeds, "Seed file (\"node label score\")")->required();
    c->add_flag("--directed", a.directed, "Treat the edge list as directed");
    c->add_option("--method", a.method, "Propagation method")
        ->check(CLI::IsMember({"mad", "harmonic"}))
        ->capture_default_str();
    c->add_option("--weight-mode", a.weight_mode, "Random-walk probability recipe")
        ->check(CLI::IsMember({"uniform", "mad-entropy"}))
        ->capture_default_str();
    c->add_option("--mu1", a.mu1, "Seed fidelity weight")->capture_default_str();
    c->add_option("--mu2", a.mu2, "Neighborhood smoothness weight")->capture_default_str();
    c->add_option("--mu3", a.mu3, "Prior regularization weight")->capture_default_str();
    c->add_option("--beta", a.beta, "Entropy scale for mad-entropy mode")->capture_default_str();
    c->add_option("--iters", a.iters, "Iteration count")->capture_default_str();
    c->add_option("--convergence-delta", a.convergence,
                  "Stop early when the max per-node L1 change drops below this");
    c->add_option("--prune", a.prune, "Exact rows drop entries below this score")
        ->capture_default_str();
    c->add_option("--threads", a.threads, "Worker threads for per-node updates")
        ->capture_default_str();
    c->add_flag("--guarantee", a.guarantee,
                "Fail sketch runs whose mu values void the error guarantee");
    if (with_backend_choice && backend_out != nullptr)
        c->add_option("--backend", *backend_out, "Label store")
            ->check(CLI::IsMember({"exact", "sketch"}))
            ->capture_default_str();
    auto* width = c->add_option("--width", a.width, "Sketch width (cells per row)");
    auto* depth = c->add_option("--depth", a.depth, "Sketch depth (hash rows)");
    c->add_option("--hash-seed", a.hash_seed, "Seed for the sketch hash family")
        ->capture_default_str();
    auto* auto_size =
        c->add_option("--auto-size", a.auto_size, "Size the sketch from a sizing regime")
            ->check(CLI::IsMember({"sparse", "zipf", "community"}));
    auto_size->excludes(width)->excludes(depth);
    c->add_option("--k", a.k, "Seed sparsity for --auto-size sparse")->capture_default_str();
    c->add_option("--z", a.z, "Skew exponent for --auto-size zipf")->capture_default_str();
    c->add_option("--psi", a.psi, "Max-conductance for --auto-size community")
        ->capture_default_str();
    c->add_option("--eps", a.eps, "Error target for --auto-size")->capture_default_str();
    c->add_option("--delta", a.delta, "Failure probability for --auto-size")
        ->capture_default_str();
    c->add_option("--m", a.m, "Declared label count for --auto-size (0 = from seeds)")
        ->capture_default_str();
}

Graph load_graph(const SolveArgs& a) {
    auto in = open_in(a.edges);
    return with_path(a.edges, [&] { return load_edges(in, !a.directed); });
}

SeedSet load_seed_file(const SolveArgs& a, const Graph& g) {
    auto in = open_in(a.seeds);
    return with_path(a.seeds, [&] { return load_seeds(in, g); });
}

SolverConfig solver_config(const SolveArgs& a, Backend backend, const SeedSet& seeds) {
    SolverConfig cfg;
    cfg.mu1 = a.mu1;
    cfg.mu2 = a.mu2;
    cfg.mu3 = a.mu3;
    cfg.iterations = a.iters;
    if (a.convergence >= 0) cfg.convergence_delta = a.convergence;
    cfg.backend = backend;
    cfg.method = a.method == "harmonic" ? Method::harmonic : Method::mad;
    cfg.prune_threshold = a.prune;
    cfg.threads = a.threads;
    cfg.guarantee = a.guarantee;
    if (backend == Backend::sketch) {
        std::uint32_t w = a.width, d = a.depth;
        if (!a.auto_size.empty()) {
            SizingSpec spec;
            spec.regime = a.auto_size == "sparse"  ? SizingRegime::sparse
                          : a.auto_size == "zipf" ? SizingRegime::zipf
                                                  : SizingRegime::community;
            spec.k = a.k;
            spec.z = a.z;
            spec.psi = a.psi;
            spec.eps = a.eps;
            spec.delta = a.delta;
            spec.m = a.m > 0 ? a.m : seeds.num_labels();
            const SizingResult r = size_sketch(spec);
            w = r.width;
            d = r.depth;
        } else if (w == 0 || d == 0) {
            throw std::invalid_argument(
                "sketch backend requires --width and --depth, or --auto-size");
        }
        cfg.sketch = SketchParams{w, d, a.hash_seed};
    }
    return cfg;
}

PropagationWeights weights_for(const SolveArgs& a, const Graph& g, const SeedSet& seeds,
                               const SolverConfig& cfg) {
    if (cfg.method != Method::mad) return PropagationWeights{};
    return build_weights(g, seeds, weight_mode_of(a.weight_mode), a.mu1, a.mu2, a.mu3, a.beta);
}

void write_report(const RunReport& report, const SolverConfig& cfg, std::ostream& out, char sep) {
    out.precision(12);
    out << "# backend=" << (cfg.backend == Backend::sketch ? "sketch" : "exact")
        << " method=" << (cfg.method == Method::mad ? "mad" : "harmonic");
    if (cfg.backend == Backend::sketch)
        out << " w=" << cfg.sketch.width << " d=" << cfg.sketch.depth;
    out << " iterations=" << report.iterations_executed << '\n';
    out << "iteration" << sep << "wall_ms" << sep << "store_entries" << sep << "store_bytes"
        << sep << "max_delta" << sep << "rss_bytes" << '\n';
    for (const auto& st : report.per_iteration)
        out << st.iteration << sep << st.wall_ms << sep << st.store_entries << sep
            << st.store_bytes << sep << st.max_delta << sep << st.rss_bytes << '\n';
}

// ------------------------------------------------------------------ propagate

struct PropagateArgs {
    SolveArgs solve;
    std::string backend = "exact";
    std::size_t top_k = 0;
    std::string labels_out = "-";
    std::string report_out;
    std::string format = "tsv";
};

void run_propagate(const PropagateArgs& a) {
    const Graph g = load_graph(a.solve);
    const SeedSet seeds = load_seed_file(a.solve, g);
    const Backend backend = a.backend == "sketch" ? Backend::sketch : Backend::exact;
    const SolverConfig cfg = solver_config(a.solve, backend, seeds);
    if (backend == Backend::sketch)
        std::cout << "w=" << cfg.sketch.width << " d=" << cfg.sketch.depth << '\n';
    const PropagationWeights pw = weights_for(a.solve, g, seeds, cfg);
    auto [state, report] = run(g, seeds, pw, cfg);

    if (a.labels_out == "-") {
        write_top_k(state, g, seeds.labels(), a.top_k, std::cout);
    } else {
        auto out = open_out(a.labels_out);
        write_top_k(state, g, seeds.labels(), a.top_k, out);
    }
    if (!a.report_out.empty()) {
        auto out = open_out(a.report_out);
        write_report(report, cfg, out, sep_of(a.format));
    }
}

void setup_propagate(CLI::App& app) {
    auto a = std::make_shared<PropagateArgs>();
    CLI::App* c = app.add_subcommand(
        "propagate", "Run label propagation and write top-K labels per node");
    add_solver_flags(c, a->solve, true, &a->backend);
    c->add_option("--top-k", a->top_k, "Labels kept per node (0 = all with positive score)")
        ->capture_default_str();
    c->add_option("--labels-out", a->labels_out, "Label output path (\"-\" = stdout)")
        ->capture_default_str();
    c->add_option("--report-out", a->report_out, "Per-iteration report path");
    c->add_option("--format", a->format, "Report format")
        ->check(CLI::IsMember({"tsv", "csv"}))
        ->capture_default_str();
    c->callback([a] { run_propagate(*a); });
}

// ----------------------------------------------------------------------- size

struct SizeArgs {
    bool sparse = false, zipf = false, community = false;
    std::uint32_t k = 1;
    double z = 1.5, psi = 1.0, eps = 0.05, delta = 0.1;
    std::uint64_t m = 1;
};

void run_size(const SizeArgs& a) {
    const int picked = int(a.sparse) + int(a.zipf) + int(a.community);
    if (picked != 1)
        throw std::invalid_argument("exactly one of --sparse, --zipf, --community is required");
    SizingSpec spec;
    spec.regime = a.sparse ? SizingRegime::sparse
                  : a.zipf ? SizingRegime::zipf
                           : SizingRegime::community;
    spec.k = a.k;
    spec.z = a.z;
    spec.psi = a.psi;
    spec.eps = a.eps;
    spec.delta = a.delta;
    spec.m = a.m;
    const SizingResult r = size_sketch(spec);
    std::cout << "w=" << r.width << " d=" << r.depth << '\n';
}

void setup_size(CLI::App& app) {
    auto a = std::make_shared<SizeArgs>();
    CLI::App* c = app.add_subcommand("size", "Print the sketch width and depth for a regime");
    c->add_flag("--sparse", a->sparse, "k-sparse binary seeding regime");
    c->add_flag("--zipf", a->zipf, "Zipf-skew regime");
    c->add_flag("--community", a->community, "Community max-conductance regime");
    c->add_option("--k", a->k, "Seed sparsity (sparse regime)")->capture_default_str();
    c->add_option("--z", a->z, "Skew exponent (zipf regime, > 1)")->capture_default_str();
    c->add_option("--psi", a->psi, "Max-conductance bound (community regime)")
        ->capture_default_str();
    c->add_option("--eps", a->eps, "Error target")->capture_default_str();
    c->add_option("--delta", a->delta, "Failure probability")->capture_default_str();
    c->add_option("--m", a->m, "Label count")->required();
    c->callback([a] { run_size(*a); });
}

// ----------------------------------------------------------------------- eval

// A label file plus everything eval needs to rank against gold. Node and
// label vocabularies are the union of what the two files mention.
struct LoadedLabels {
    Interner nodes;
    Interner labels;
    std::vector<LabelDist> rows;
};

LoadedLabels load_label_file(std::istream& in) {
    LoadedLabels out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = detail::split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 3) {
            std::ostringstream msg;
            msg << "line " << lineno << ": expected \"node label score\", got " << fields.size()
                << " field(s)";
            throw parse_error(msg.str(), lineno);
        }
        const auto parsed = detail::parse_double(fields[2]);
        if (!parsed) {
            std::ostringstream msg;
            msg << "line " << lineno << ": bad score \"" << fields[2] << "\"";
            throw parse_error(msg.str(), lineno);
        }
        const double score = *parsed;
        if (score < 0) {
            std::ostringstream msg;
            msg << "line " << lineno << ": negative score " << score;
            throw parse_error(msg.str(), lineno);
        }
        const std::uint32_t v = out.nodes.intern(fields[0]);
        const std::uint32_t l = out.labels.intern(fields[1]);
        if (out.rows.size() <= v) out.rows.resize(v + 1);
        dist_add(out.rows[v], l, score);
    }
    return out;
}

// Gold rows "node label"; extends the vocabularies so gold-only nodes get
// empty (unrankable) score rows rather than errors.
GoldLabels load_gold_into(std::istream& in, LoadedLabels& ll) {
    GoldLabels gold;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = detail::split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 2) {
            std::ostringstream msg;
            msg << "line " << lineno << ": expected \"node label\", got " << fields.size()
                << " field(s)";
            throw parse_error(msg.str(), lineno);
        }
        const std::uint32_t v = ll.nodes.intern(fields[0]);
        const std::uint32_t l = ll.labels.intern(fields[1]);
        if (ll.rows.size() <= v) ll.rows.resize(v + 1);
        if (gold.by_node.size() <= v) gold.by_node.resize(v + 1);
        gold.by_node[v].push_back(l);
        ++gold.entries;
    }
    gold.by_node.resize(ll.rows.size());
    return gold;
}

struct EvalArgs {
    std::string labels, gold, eval_nodes, ranks_out;
    std::string format = "tsv";
    std::uint64_t m = 0; // ranking universe size; 0 = distinct labels seen
};

void run_eval(const EvalArgs& a) {
    auto labels_in = open_in(a.labels);
    LoadedLabels ll = with_path(a.labels, [&] { return load_label_file(labels_in); });
    auto gold_in = open_in(a.gold);
    GoldLabels gold = with_path(a.gold, [&] { return load_gold_into(gold_in, ll); });

    std::vector<std::uint32_t> nodes;
    if (!a.eval_nodes.empty()) {
        auto in = open_in(a.eval_nodes);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto fields = detail::split_fields(line);
            if (fields.empty()) continue;
            if (fields.size() != 1) {
                std::ostringstream msg;
                msg << a.eval_nodes << ": line " << lineno << ": expected one node per line";
                throw std::runtime_error(msg.str());
            }
            const std::uint32_t v = ll.nodes.intern(fields[0]);
            if (ll.rows.size() <= v) ll.rows.resize(v + 1);
            if (gold.by_node.size() <= v) gold.by_node.resize(v + 1);
            nodes.push_back(v);
        }
    } else {
        for (std::uint32_t v = 0; v < gold.by_node.size(); ++v)
            if (!gold.by_node[v].empty()) nodes.push_back(v);
    }

    std::uint32_t m = a.m > 0 ? static_cast<std::uint32_t>(a.m)
                              : static_cast<std::uint32_t>(ll.labels.size());
    const EvalResult res = mrr(ll.rows, gold, m, nodes);
    std::cout.precision(12);
    std::cout << "mrr=" << res.mrr << '\n';
    if (!a.ranks_out.empty()) {
        auto out = open_out(a.ranks_out);
        const char sep = sep_of(a.format);
        out << "node" << sep << "rank" << '\n';
        for (const auto& [v, rank] : res.ranks) out << ll.nodes.name(v) << sep << rank << '\n';
    }
}

void setup_eval(CLI::App& app) {
    auto a = std::make_shared<EvalArgs>();
    CLI::App* c = app.add_subcommand("eval", "Mean reciprocal rank of a label file against gold");
    c->add_option("--labels", a->labels, "Label file (\"node label score\")")->required();
    c->add_option("--gold", a->gold, "Gold file (\"node label\")")->required();
    c->add_option("--eval-nodes", a->eval_nodes,
                  "Node list to evaluate (default: every node with gold)");
    c->add_option("--ranks-out", a->ranks_out, "Per-node rank report path");
    c->add_option("--format", a->format, "Rank report format")
        ->check(CLI::IsMember({"tsv", "csv"}))
        ->capture_default_str();
    c->add_option("--m", a->m, "Ranking universe size (0 = distinct labels in the files)")
        ->capture_default_str();
    c->callback([a] { run_eval(*a); });
}

// ----------------------------------------------------------------------- skew

struct SkewArgs {
    std::string labels, out;
    std::string format = "tsv";
    std::uint32_t rank_limit = 0;
    bool only_ranked = false;
};

void run_skew(const SkewArgs& a) {
    auto in = open_in(a.labels);
    LoadedLabels ll = with_path(a.labels, [&] { return load_label_file(in); });
    LabelState state;
    state.backend = Backend::exact;
    state.rows = std::move(ll.rows);
    state.num_labels = static_cast<std::uint32_t>(ll.labels.size());
    const SkewReport rep = skew_report(state, a.rank_limit, a.only_ranked);
    std::cout.precision(12);
    std::cout << "z=" << rep.z << '\n';
    if (!a.out.empty()) {
        auto out = open_out(a.out);
        out.precision(12);
        const char sep = sep_of(a.format);
        out << "rank" << sep << "mean_score" << '\n';
        for (const auto& [rank, mean] : rep.mean_by_rank) out << rank << sep << mean << '\n';
    }
}

void setup_skew(CLI::App& app) {
    auto a = std::make_shared<SkewArgs>();
    CLI::App* c =
        app.add_subcommand("skew", "Fit the rank-decay exponent of per-node label scores");
    c->add_option("--labels", a->labels, "Label file (\"node label score\")")->required();
    c->add_option("--out", a->out, "Mean-score-by-rank table path");
    c->add_option("--format", a->format, "Table format")
        ->check(CLI::IsMember({"tsv", "csv"}))
        ->capture_default_str();
    c->add_option("--rank-limit", a->rank_limit, "Ranks to aggregate (0 = min(m, 1000))")
        ->capture_default_str();
    c->add_flag("--only-ranked", a->only_ranked,
                "Average each rank over the nodes that reach it, not all nodes");
    c->callback([a] { run_skew(*a); });
}

// ---------------------------------------------------------------- conductance

struct ConductanceArgs {
    std::string edges, nodes, seeds;
    bool directed = false;
    bool wprime = false;
    std::string weight_mode = "mad-entropy";
    double mu1 = 0.98, mu2 = 0.01, mu3 = 0.01, beta = 2.0;
};

void run_conductance(const ConductanceArgs& a) {
    auto edges_in = open_in(a.edges);
    const Graph g = with_path(a.edges, [&] { return load_edges(edges_in, !a.directed); });
    auto nodes_in = open_in(a.nodes);
    const auto set = with_path(a.nodes, [&] { return load_node_list(nodes_in, g); });
    std::cout.precision(12);
    std::cout << "psi=" << max_conductance(g, set) << " phi=" << conductance(g, set) << '\n';
    if (a.wprime) {
        auto seeds_in = open_in(a.seeds);
        const SeedSet seeds = with_path(a.seeds, [&] { return load_seeds(seeds_in, g); });
        const PropagationWeights pw = build_weights(g, seeds, weight_mode_of(a.weight_mode),
                                                    a.mu1, a.mu2, a.mu3, a.beta);
        std::cout << "psi_wprime=" << max_conductance(g, set, &pw)
                  << " phi_wprime=" << conductance(g, set, &pw) << '\n';
    }
}

void setup_conductance(CLI::App& app) {
    auto a = std::make_shared<ConductanceArgs>();
    CLI::App* c =
        app.add_subcommand("conductance", "Max-conductance and conductance of a node set");
    c->add_option("--edges", a->edges, "Edge list file")->required();
    c->add_option("--nodes", a->nodes, "Node set file, one node per line")->required();
    c->add_flag("--directed", a->directed, "Treat the edge list as directed");
    auto* wprime = c->add_flag("--wprime", a->wprime,
                               "Also measure on the modified weight matrix W'");
    auto* seeds = c->add_option("--seeds", a->seeds, "Seed file, required with --wprime");
    wprime->needs(seeds);
    c->add_option("--weight-mode", a->weight_mode, "Recipe for W'")
        ->check(CLI::IsMember({"uniform", "mad-entropy"}))
        ->capture_default_str();
    c->add_option("--mu1", a->mu1, "Seed fidelity weight")->capture_default_str();
    c->add_option("--mu2", a->mu2, "Neighborhood smoothness weight")->capture_default_str();
    c->add_option("--mu3", a->mu3, "Prior regularization weight")->capture_default_str();
    c->add_option("--beta", a->beta, "Entropy scale for mad-entropy mode")
        ->capture_default_str();
    c->callback([a] { run_conductance(*a); });
}

// ------------------------------------------------------------------------ gen

struct GenArgs {
    std::string generator, out;
    std::uint64_t rng_seed = 1;
    std::uint32_t n = 0, m = 0; // 0 = generator default
    // ksparse
    std::uint32_t k = 2, seeds_per_label = 0;
    double mean_degree = 6.0, intra_weight = 1.0, bridge_weight = 0.5;
    // zipf
    double z = 1.0;
    std::uint32_t groups = 10, head = 0;
    double chord_fraction = 0.1;
    bool no_verify = false;
    // community
    std::uint32_t blocks = 20, block_size = 50;
    double intra_degree = 6.0, psi = 0.05;
};

void run_gen(const GenArgs& a) {
    Dataset d;
    if (a.generator == "ksparse") {
        KsparseSpec spec;
        if (a.n) spec.n = a.n;
        if (a.m) spec.m = a.m;
        spec.k = a.k;
        spec.seeds_per_label = a.seeds_per_label;
        spec.mean_degree = a.mean_degree;
        spec.intra_weight = a.intra_weight;
        spec.bridge_weight = a.bridge_weight;
        spec.rng_seed = a.rng_seed;
        d = gen_ksparse(spec);
    } else if (a.generator == "zipf") {
        ZipfSpec spec;
        if (a.n) spec.n = a.n;
        if (a.m) spec.m = a.m;
        spec.z = a.z;
        spec.groups = a.groups;
        spec.head = a.head;
        spec.chord_fraction = a.chord_fraction;
        spec.rng_seed = a.rng_seed;
        spec.verify = !a.no_verify;
        d = gen_zipf(spec);
    } else {
        CommunitySpec spec;
        spec.blocks = a.blocks;
        spec.block_size = a.block_size;
        spec.intra_degree = a.intra_degree;
        spec.intra_weight = a.intra_weight;
        spec.psi_target = a.psi;
        spec.rng_seed = a.rng_seed;
        d = gen_community(spec);
    }
    write_dataset(d, a.out);
    for (const auto& [key, value] : d.meta) std::cout << key << '=' << value << '\n';
    std::cout << "edges=" << d.edges.size() << " seeds=" << d.seeds.size()
              << " gold=" << d.gold.size() << '\n';
    std::cout << "wrote " << a.out << ".edges/.seeds/.gold/.meta"
              << (d.blocks.empty() ? "" : "/.blocks") << '\n';
}

void setup_gen(CLI::App& app) {
    auto a = std::make_shared<GenArgs>();
    CLI::App* c = app.add_subcommand("gen", "Generate a synthetic dataset");
    c->add_option("--generator", a->generator, "Dataset family")
        ->check(CLI::IsMember({"ksparse", "zipf", "community"}))
        ->required();
    c->add_option("--out", a->out, "Output path prefix")->required();
    c->add_option("--rng-seed", a->rng_seed, "Generator RNG seed")->capture_default_str();
    c->add_option("--n", a->n, "Node count (0 = generator default)")->capture_default_str();
    c->add_option("--m", a->m, "Label count (0 = generator default)")->capture_default_str();
    c->add_option("--k", a->k, "ksparse: labels per seed node")->capture_default_str();
    c->add_option("--seeds-per-label", a->seeds_per_label,
                  "ksparse: seed entries per label, a multiple of k (0 = k)")
        ->capture_default_str();
    c->add_option("--mean-degree", a->mean_degree, "ksparse: intra-cluster degree target")
        ->capture_default_str();
    c->add_option("--intra-weight", a->intra_weight, "ksparse/community: intra edge weight")
        ->capture_default_str();
    c->add_option("--bridge-weight", a->bridge_weight, "ksparse: inter-cluster bridge weight")
        ->capture_default_str();
    c->add_option("--z", a->z, "zipf: target skew exponent")->capture_default_str();
    c->add_option("--groups", a->groups, "zipf: node groups with rotated label rankings")
        ->capture_default_str();
    c->add_option("--head", a->head, "zipf: seeded ranks per node (0 = all m)")
        ->capture_default_str();
    c->add_option("--chord-fraction", a->chord_fraction, "zipf: extra ring chords as n fraction")
        ->capture_default_str();
    c->add_flag("--no-verify", a->no_verify, "zipf: skip the solver-based exponent check");
    c->add_option("--blocks", a->blocks, "community: block count")->capture_default_str();
    c->add_option("--block-size", a->block_size, "community: nodes per block")
        ->capture_default_str();
    c->add_option("--intra-degree", a->intra_degree, "community: intra-block degree target")
        ->capture_default_str();
    c->add_option("--psi", a->psi, "community: max-conductance bound (0 = no bridges)")
        ->capture_default_str();
    c->callback([a] { run_gen(*a); });
}

// ---------------------------------------------------------------------- bench

struct BenchArgs {
    SolveArgs solve;
    std::string gold, eval_nodes, out;
    std::string format = "tsv";
};

struct BenchRow {
    double total_ms = 0, mean_iter_ms = 0;
    std::uint64_t peak_entries = 0, peak_bytes = 0, peak_rss = 0;
    double mrr_value = 0;
};

BenchRow bench_one(const Graph& g, const SeedSet& seeds, const PropagationWeights& pw,
                   const SolverConfig& cfg, const GoldLabels& gold,
                   const std::vector<std::uint32_t>& eval_nodes) {
    auto [state, report] = run(g, seeds, pw, cfg);
    BenchRow row;
    row.total_ms = report.total_wall_ms;
    if (report.iterations_executed > 0)
        row.mean_iter_ms = report.total_wall_ms / report.iterations_executed;
    for (const auto& st : report.per_iteration) {
        row.peak_entries = std::max(row.peak_entries, st.store_entries);
        row.peak_bytes = std::max(row.peak_bytes, st.store_bytes);
        row.peak_rss = std::max(row.peak_rss, st.rss_bytes);
    }
    std::vector<LabelDist> rows(state.n());
    for (std::uint32_t v = 0; v < state.n(); ++v) rows[v] = extract_all(state, v);
    row.mrr_value = mrr(rows, gold, seeds.num_labels(), eval_nodes).mrr;
    return row;
}

void run_bench(const BenchArgs& a) {
    const Graph g = load_graph(a.solve);
    const SeedSet seeds = load_seed_file(a.solve, g);
    auto gold_in = open_in(a.gold);
    const GoldLabels gold =
        with_path(a.gold, [&] { return load_gold(gold_in, g, seeds.labels()); });
    std::vector<std::uint32_t> eval_nodes;
    if (!a.eval_nodes.empty()) {
        auto in = open_in(a.eval_nodes);
        eval_nodes = with_path(a.eval_nodes, [&] { return load_node_list(in, g); });
    } else {
        for (std::uint32_t v = 0; v < gold.by_node.size(); ++v)
            if (!gold.by_node[v].empty()) eval_nodes.push_back(v);
    }

    const SolverConfig exact_cfg = solver_config(a.solve, Backend::exact, seeds);
    const SolverConfig sketch_cfg = solver_config(a.solve, Backend::sketch, seeds);
    std::cout << "w=" << sketch_cfg.sketch.width << " d=" << sketch_cfg.sketch.depth << '\n';
    const PropagationWeights pw = weights_for(a.solve, g, seeds, exact_cfg);
    const BenchRow exact = bench_one(g, seeds, pw, exact_cfg, gold, eval_nodes);
    const BenchRow sketch = bench_one(g, seeds, pw, sketch_cfg, gold, eval_nodes);

    const char sep = sep_of(a.format);
    std::ostringstream table;
    table.precision(12);
    table << "backend" << sep << "total_wall_ms" << sep << "mean_iter_ms" << sep
          << "peak_store_entries" << sep << "peak_store_bytes" << sep << "peak_rss_bytes" << sep
          << "mrr" << sep << "speedup" << '\n';
    auto emit = [&](const char* name, const BenchRow& r, double speedup) {
        table << name << sep << r.total_ms << sep << r.mean_iter_ms << sep << r.peak_entries
              << sep << r.peak_bytes << sep << r.peak_rss << sep << r.mrr_value << sep << speedup
              << '\n';
    };
    emit("exact", exact, 1.0);
    emit("sketch", sketch, sketch.total_ms > 0 ? exact.total_ms / sketch.total_ms : 0.0);
    std::cout << table.str();
    if (!a.out.empty()) {
        auto out = open_out(a.out);
        out << table.str();
    }
}

void setup_bench(CLI::App& app) {
    auto a = std::make_shared<BenchArgs>();
    CLI::App* c = app.add_subcommand(
        "bench", "Run the exact and sketch backends on one manifest and compare");
    add_solver_flags(c, a->solve, false, nullptr);
    c->add_option("--gold", a->gold, "Gold file (\"node label\")")->required();
    c->add_option("--eval-nodes", a->eval_nodes,
                  "Node list to evaluate (default: every node with gold)");
    c->add_option("--out", a->out, "Also write the comparison table to this path");
    c->add_option("--format", a->format, "Table format")
        ->check(CLI::IsMember({"tsv", "csv"}))
        ->capture_default_str();
    c->callback([a] { run_bench(*a); });
}

// ----------------------------------------------------------------------- main

std::string env_name(std::string s) {
    for (char& ch : s) ch = ch == '-' ? '_' : static_cast<char>(std::toupper(ch));
    return s;
}

void set_env_names(CLI::App* cmd, const std::string& prefix) {
    for (CLI::Option* opt : cmd->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help") continue;
        opt->envname(prefix + "_" + env_name(name));
    }
    for (CLI::App* sub : cmd->get_subcommands([](const CLI::App*) { return true; }))
        set_env_names(sub, prefix + "_" + env_name(sub->get_name()));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph label propagation with exact and count-min-sketch label stores"};
    app.require_subcommand(1);
    setup_propagate(app);
    setup_size(app);
    setup_eval(app);
    setup_skew(app);
    setup_conductance(app);
    setup_gen(app);
    setup_bench(app);
    set_env_names(&app, "SKETCHPROP");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
