#pragma once

// Immutable weighted graph in compressed sparse row form with a name
// interning table, a builder that merges duplicate edges and drops
// self-loops, and the edge-list text format used by every command.
//
// Edge lists are UTF-8 text: "src dst [weight]" separated by tabs or
// spaces, "#" starts a comment, weight defaults to 1.0 and must be a
// non-negative finite number. Undirected graphs store both directions.

#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "interning.hpp"
#include "util.hpp"

namespace sketchprop {

class Graph {
public:
    Graph() = default;

    Graph(Interner nodes, std::vector<std::size_t> row_ptr, std::vector<std::uint32_t> nbr,
          std::vector<double> weight, bool undirected)
        : nodes_(std::move(nodes)),
          row_ptr_(std::move(row_ptr)),
          nbr_(std::move(nbr)),
          weight_(std::move(weight)),
          undirected_(undirected) {
        degree_.resize(n(), 0.0);
        for (std::uint32_t v = 0; v < n(); ++v)
            for (std::size_t e = row_ptr_[v]; e < row_ptr_[v + 1]; ++e) degree_[v] += weight_[e];
    }

    std::uint32_t n() const noexcept { return static_cast<std::uint32_t>(nodes_.size()); }
    std::size_t edge_count() const noexcept { return nbr_.size(); }
    bool undirected() const noexcept { return undirected_; }
    const Interner& nodes() const noexcept { return nodes_; }

    // Weighted out-degree D_vv = sum of v's row weights.
    double degree(std::uint32_t v) const { return degree_[v]; }

    std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
        return {nbr_.data() + row_ptr_[v], nbr_.data() + row_ptr_[v + 1]};
    }
    std::span<const double> weights(std::uint32_t v) const {
        return {weight_.data() + row_ptr_[v], weight_.data() + row_ptr_[v + 1]};
    }

    // Weight of edge (v, u); 0 when absent.
    double edge_weight(std::uint32_t v, std::uint32_t u) const {
        auto ns = neighbors(v);
        auto ws = weights(v);
        for (std::size_t i = 0; i < ns.size(); ++i)
            if (ns[i] == u) return ws[i];
        return 0.0;
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.row_ptr_ == b.row_ptr_ && a.nbr_ == b.nbr_ && a.weight_ == b.weight_ &&
               a.undirected_ == b.undirected_;
    }

private:
    Interner nodes_;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> nbr_;
    std::vector<double> weight_;
    std::vector<double> degree_;
    bool undirected_ = true;
};

class GraphBuilder {
public:
    explicit GraphBuilder(bool undirected = true) : undirected_(undirected) {}

    std::uint32_t intern(std::string_view name) { return nodes_.intern(name); }

    // Dense-id form; ids must come from intern() (or ensure_nodes below).
    void add_edge(std::uint32_t u, std::uint32_t v, double w) {
        if (w < 0) throw std::invalid_argument("edge weight must be non-negative");
        if (u == v) {
            ++self_loops_;
            return;
        }
        edges_.push_back({u, v, w});
        if (undirected_) edges_.push_back({v, u, w});
    }

    void add_edge(std::string_view u, std::string_view v, double w) {
        const std::uint32_t ui = nodes_.intern(u); // intern src before dst so
        const std::uint32_t vi = nodes_.intern(v); // first appearance wins the id
        add_edge(ui, vi, w);
    }

    // Registers ids 0..count-1 with synthesized names when absent; used by
    // generators that name nodes up front.
    void ensure_nodes(std::uint32_t count, std::string_view prefix = "v") {
        for (std::uint32_t i = static_cast<std::uint32_t>(nodes_.size()); i < count; ++i)
            nodes_.intern(std::string(prefix) + std::to_string(i));
    }

    Graph build() {
        if (self_loops_ > 0)
            warn("dropped " + std::to_string(self_loops_) + " self-loop(s)");
        const std::uint32_t n = static_cast<std::uint32_t>(nodes_.size());
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return a.u != b.u ? a.u < b.u : a.v < b.v;
        });
        std::vector<std::size_t> row_ptr(n + 1, 0);
        std::vector<std::uint32_t> nbr;
        std::vector<double> weight;
        nbr.reserve(edges_.size());
        weight.reserve(edges_.size());
        for (std::size_t i = 0; i < edges_.size();) {
            std::size_t j = i;
            double w = 0;
            while (j < edges_.size() && edges_[j].u == edges_[i].u && edges_[j].v == edges_[i].v)
                w += edges_[j++].w; // duplicates merge by summing
            nbr.push_back(edges_[i].v);
            weight.push_back(w);
            ++row_ptr[edges_[i].u + 1];
            i = j;
        }
        for (std::uint32_t v = 0; v < n; ++v) row_ptr[v + 1] += row_ptr[v];
        return Graph(std::move(nodes_), std::move(row_ptr), std::move(nbr), std::move(weight),
                     undirected_);
    }

private:
    struct Edge {
        std::uint32_t u, v;
        double w;
    };
    Interner nodes_;
    std::vector<Edge> edges_;
    std::size_t self_loops_ = 0;
    bool undirected_;
};

// Node ids are assigned in sorted-name order, so the id assignment depends
// only on the set of names: loading a serialized graph reproduces the CSR
// arrays exactly, not just the structure.
inline Graph load_edges(std::istream& in, bool undirected = true) {
    struct Line {
        std::string src, dst;
        double w;
    };
    std::vector<Line> parsed_lines;
    std::set<std::string> names;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = detail::split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() < 2 || fields.size() > 3) {
            std::ostringstream msg;
            msg << "line " << lineno << ": expected \"src dst [weight]\", got " << fields.size()
                << " field(s)";
            throw parse_error(msg.str(), lineno);
        }
        double w = 1.0;
        if (fields.size() == 3) {
            auto parsed = detail::parse_double(fields[2]);
            if (!parsed) {
                std::ostringstream msg;
                msg << "line " << lineno << ": bad weight \"" << fields[2] << "\"";
                throw parse_error(msg.str(), lineno);
            }
            w = *parsed;
        }
        if (w < 0) {
            std::ostringstream msg;
            msg << "line " << lineno << ": negative weight " << w;
            throw parse_error(msg.str(), lineno);
        }
        parsed_lines.push_back({std::string(fields[0]), std::string(fields[1]), w});
        names.insert(parsed_lines.back().src);
        names.insert(parsed_lines.back().dst);
    }
    GraphBuilder b(undirected);
    for (const auto& name : names) b.intern(name);
    for (const auto& l : parsed_lines) b.add_edge(l.src, l.dst, l.w);
    return b.build();
}

// Canonical form: rows in id order; undirected edges written once (u < v).
// Reloading the output through load_edges reproduces a load_edges-produced
// graph exactly (ids included). Builder-assigned ids may be renumbered to
// sorted-name order, and isolated nodes have no edge-list encoding.
inline void write_edges(const Graph& g, std::ostream& out) {
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (std::uint32_t v = 0; v < g.n(); ++v) {
        auto ns = g.neighbors(v);
        auto ws = g.weights(v);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            if (g.undirected() && ns[i] < v) continue;
            out << g.nodes().name(v) << '\t' << g.nodes().name(ns[i]) << '\t' << ws[i] << '\n';
        }
    }
    out.precision(old_precision);
}

} // namespace sketchprop
