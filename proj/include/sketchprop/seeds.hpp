#pragma once

// Seed (training) labels: the Q matrix rows, the binary seed indicator
// S_vv, the label vocabulary, and the k-sparsity statistic
// max_v sum_l Q_vl. Also loaders for gold labels and node-list files.
//
// Seed/gold text format: "node label [score]" with "#" comments; seed
// scores default to 1.0 and must be positive.

#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graph.hpp"
#include "interning.hpp"
#include "label_dist.hpp"
#include "util.hpp"

namespace sketchprop {

class SeedSet {
public:
    SeedSet() = default;
    explicit SeedSet(std::uint32_t n) : rows_(n) {}

    std::uint32_t intern_label(std::string_view name) { return labels_.intern(name); }

    void add(std::uint32_t node, std::uint32_t label, double score) {
        if (score <= 0) throw std::invalid_argument("seed score must be positive");
        dist_add(rows_.at(node), label, score);
    }

    // Number of distinct labels m; the dummy (abandonment) label id is m.
    std::uint32_t num_labels() const noexcept { return static_cast<std::uint32_t>(labels_.size()); }
    std::uint32_t dummy_label() const noexcept { return num_labels(); }
    const Interner& labels() const noexcept { return labels_; }

    std::uint32_t n() const noexcept { return static_cast<std::uint32_t>(rows_.size()); }
    const LabelDist& row(std::uint32_t node) const { return rows_.at(node); }
    bool seeded(std::uint32_t node) const { return !rows_.at(node).empty(); }

    std::size_t seed_node_count() const {
        std::size_t c = 0;
        for (const auto& r : rows_)
            if (!r.empty()) ++c;
        return c;
    }

    // max over nodes of the row L1 mass; the k of "k-sparse" seeding.
    double k_sparsity() const {
        double k = 0;
        for (const auto& r : rows_) k = std::max(k, dist_l1(r));
        return k;
    }

    // Asserts the declared sparsity bound before a sized run relies on it.
    void require_k_sparse(double k) const {
        double got = k_sparsity();
        if (got > k + 1e-9) {
            std::ostringstream msg;
            msg << "seed set is not " << k << "-sparse: max per-node label mass is " << got;
            throw std::invalid_argument(msg.str());
        }
    }

private:
    std::vector<LabelDist> rows_;
    Interner labels_;
};

inline SeedSet load_seeds(std::istream& in, const Graph& g) {
    SeedSet seeds(g.n());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = detail::split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() < 2 || fields.size() > 3) {
            std::ostringstream msg;
            msg << "line " << lineno << ": expected \"node label [score]\", got " << fields.size()
                << " field(s)";
            throw parse_error(msg.str(), lineno);
        }
        auto node = g.nodes().find(fields[0]);
        if (!node) {
            std::ostringstream msg;
            msg << "line " << lineno << ": seed node \"" << fields[0] << "\" is not in the graph";
            throw parse_error(msg.str(), lineno);
        }
        double score = 1.0;
        if (fields.size() == 3) {
            auto parsed = detail::parse_double(fields[2]);
            if (!parsed) {
                std::ostringstream msg;
                msg << "line " << lineno << ": bad score \"" << fields[2] << "\"";
                throw parse_error(msg.str(), lineno);
            }
            score = *parsed;
        }
        if (score <= 0) {
            std::ostringstream msg;
            msg << "line " << lineno << ": seed score must be positive, got " << score;
            throw parse_error(msg.str(), lineno);
        }
        seeds.add(*node, seeds.intern_label(fields[1]), score);
    }
    return seeds;
}

struct GoldLabels {
    // Per node: gold label ids (within the seed vocabulary when resolvable).
    std::vector<std::vector<std::uint32_t>> by_node;
    std::size_t entries = 0;
};

// Gold format matches seeds; scores, if present, are ignored. Labels are
// resolved against `vocab`; unknown labels are kept out of the per-node
// lists (they can never be ranked) with a warning.
inline GoldLabels load_gold(std::istream& in, const Graph& g, const Interner& vocab) {
    GoldLabels gold;
    gold.by_node.resize(g.n());
    std::string line;
    std::size_t lineno = 0;
    std::size_t unknown = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = detail::split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() < 2 || fields.size() > 3) {
            std::ostringstream msg;
            msg << "line " << lineno << ": expected \"node label [score]\", got " << fields.size()
                << " field(s)";
            throw parse_error(msg.str(), lineno);
        }
        auto node = g.nodes().find(fields[0]);
        if (!node) {
            std::ostringstream msg;
            msg << "line " << lineno << ": gold node \"" << fields[0] << "\" is not in the graph";
            throw parse_error(msg.str(), lineno);
        }
        auto label = vocab.find(fields[1]);
        if (!label) {
            ++unknown;
            continue;
        }
        gold.by_node[*node].push_back(*label);
        ++gold.entries;
    }
    if (unknown > 0)
        warn(std::to_string(unknown) + " gold label(s) not in the label vocabulary were ignored");
    return gold;
}

// One node name per line.
inline std::vector<std::uint32_t> load_node_list(std::istream& in, const Graph& g) {
    std::vector<std::uint32_t> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = detail::split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 1) {
            std::ostringstream msg;
            msg << "line " << lineno << ": expected a single node name";
            throw parse_error(msg.str(), lineno);
        }
        auto node = g.nodes().find(fields[0]);
        if (!node) {
            std::ostringstream msg;
            msg << "line " << lineno << ": node \"" << fields[0] << "\" is not in the graph";
            throw parse_error(msg.str(), lineno);
        }
        out.push_back(*node);
    }
    return out;
}

} // namespace sketchprop
