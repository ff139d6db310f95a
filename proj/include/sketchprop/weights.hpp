#pragma once

// MAD preprocessing. From a graph and seed set this derives, per node v:
//   - random-walk probabilities p_inj, p_cont, p_abnd (summing to 1),
//   - the modified weights W'_vu = p_cont(v) * W_vu / D_vv, exposed as the
//     precomputed symmetric coefficients c(v,u) = W'_uv + W'_vu,
//   - the normalizer M_vv = mu1*S_vv + mu2 * sum_{u != v} c(v,u) + mu3,
//   - the abandonment prior row R_v = { dummy label: p_abnd(v) }.
//
// Two probability modes:
//   uniform    — p_inj = 0.5 on seeded nodes else 0, p_abnd = 0,
//                p_cont = 1 - p_inj (deterministic baseline).
//   mad_entropy — the adsorption entropy recipe: with transition
//                probabilities p(u|v) = W_vu / D_vv and H[v] their entropy,
//                c_v = log(beta) / log(beta + e^H[v]),
//                d_v = (1 - c_v) * sqrt(H[v]) if v is seeded else 0,
//                z_v = max(c_v + d_v, 1), p_cont = c_v / z_v,
//                p_inj = d_v / z_v, p_abnd = 1 - p_cont - p_inj; beta > 1.
//
// Also here: max-conductance psi(S) = max_{u in S} boundary(u,S) / vol(u)
// and plain conductance phi(S), on the raw weights or on W'.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "graph.hpp"
#include "seeds.hpp"

namespace sketchprop {

enum class WeightMode { uniform, mad_entropy };

struct PropagationWeights {
    double mu1 = 0, mu2 = 0, mu3 = 0;
    std::vector<double> p_inj, p_cont, p_abnd;
    std::vector<double> m_vv;
    // Symmetric-coefficient adjacency: for node v, [row_ptr[v], row_ptr[v+1])
    // spans (nbr[e], coeff[e]) with coeff[e] = W'_{nbr[e],v} + W'_{v,nbr[e]}.
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> nbr;
    std::vector<double> coeff;

    std::uint32_t n() const noexcept { return static_cast<std::uint32_t>(m_vv.size()); }
    std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
        return {nbr.data() + row_ptr[v], nbr.data() + row_ptr[v + 1]};
    }
    std::span<const double> coeffs(std::uint32_t v) const {
        return {coeff.data() + row_ptr[v], coeff.data() + row_ptr[v + 1]};
    }
    // W' row sum for v; equals p_cont(v) whenever v has any neighbor.
    double wprime_row_sum(std::uint32_t v, const Graph& g) const {
        return g.degree(v) > 0 ? p_cont[v] : 0.0;
    }
};

inline PropagationWeights build_weights(const Graph& g, const SeedSet& seeds, WeightMode mode,
                                        double mu1, double mu2, double mu3, double beta = 2.0) {
    if (mu1 < 0 || mu2 < 0 || mu3 < 0)
        throw std::invalid_argument("mu1, mu2, mu3 must be non-negative");
    if (mode == WeightMode::mad_entropy && !(beta > 1))
        throw std::invalid_argument("mad-entropy mode requires beta > 1");
    if (seeds.n() != g.n())
        throw std::invalid_argument("seed set and graph disagree on node count");

    const std::uint32_t n = g.n();
    PropagationWeights pw;
    pw.mu1 = mu1;
    pw.mu2 = mu2;
    pw.mu3 = mu3;
    pw.p_inj.assign(n, 0.0);
    pw.p_cont.assign(n, 0.0);
    pw.p_abnd.assign(n, 0.0);

    for (std::uint32_t v = 0; v < n; ++v) {
        const bool is_seed = seeds.seeded(v);
        if (mode == WeightMode::uniform) {
            pw.p_inj[v] = is_seed ? 0.5 : 0.0;
            pw.p_abnd[v] = 0.0;
            pw.p_cont[v] = 1.0 - pw.p_inj[v];
            continue;
        }
        const double deg = g.degree(v);
        double entropy = 0.0;
        if (deg > 0) {
            for (double w : g.weights(v)) {
                if (w <= 0) continue;
                const double p = w / deg;
                entropy -= p * std::log(p);
            }
        }
        const double cv = std::log(beta) / std::log(beta + std::exp(entropy));
        const double dv = is_seed ? (1.0 - cv) * std::sqrt(entropy) : 0.0;
        const double zv = std::max(cv + dv, 1.0);
        pw.p_cont[v] = cv / zv;
        pw.p_inj[v] = dv / zv;
        pw.p_abnd[v] = 1.0 - pw.p_cont[v] - pw.p_inj[v];
    }

    // c(v,u) = W'_uv + W'_vu via both-direction pushes, then merge-sum.
    struct Entry {
        std::uint32_t v, u;
        double t;
    };
    std::vector<Entry> coo;
    coo.reserve(2 * g.edge_count());
    for (std::uint32_t v = 0; v < n; ++v) {
        const double deg = g.degree(v);
        if (deg <= 0) continue;
        const double scale = pw.p_cont[v] / deg;
        auto ns = g.neighbors(v);
        auto ws = g.weights(v);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const double t = scale * ws[i]; // W'_{v, ns[i]}
            coo.push_back({v, ns[i], t});
            coo.push_back({ns[i], v, t});
        }
    }
    std::sort(coo.begin(), coo.end(), [](const Entry& a, const Entry& b) {
        return a.v != b.v ? a.v < b.v : a.u < b.u;
    });
    pw.row_ptr.assign(n + 1, 0);
    for (std::size_t i = 0; i < coo.size();) {
        std::size_t j = i;
        double c = 0;
        while (j < coo.size() && coo[j].v == coo[i].v && coo[j].u == coo[i].u) c += coo[j++].t;
        pw.nbr.push_back(coo[i].u);
        pw.coeff.push_back(c);
        ++pw.row_ptr[coo[i].v + 1];
        i = j;
    }
    for (std::uint32_t v = 0; v < n; ++v) pw.row_ptr[v + 1] += pw.row_ptr[v];

    pw.m_vv.assign(n, 0.0);
    for (std::uint32_t v = 0; v < n; ++v) {
        double csum = 0;
        for (double c : pw.coeffs(v)) csum += c;
        pw.m_vv[v] = mu1 * (seeds.seeded(v) ? 1.0 : 0.0) + mu2 * csum + mu3;
        if (!(pw.m_vv[v] > 0)) {
            std::ostringstream msg;
            msg << "node \"" << g.nodes().name(v) << "\" has normalizer M_vv = 0; "
                << "set mu3 > 0 or seed the node so the mu1 term applies";
            throw std::invalid_argument(msg.str());
        }
    }
    return pw;
}

namespace detail {

inline void check_conductance_set(const Graph& g, const std::vector<std::uint32_t>& set) {
    if (set.empty()) throw std::invalid_argument("conductance requires a non-empty node set");
    for (auto v : set)
        if (v >= g.n()) throw std::invalid_argument("conductance set contains an unknown node id");
}

} // namespace detail

// psi(S): worst per-node fraction of weight leaving S. `wprime` selects the
// MAD-modified matrix; per-node ratios are identical on W and W' whenever
// p_cont > 0, since vol'(u) = p_cont(u) and boundary'(u,S) scales the same
// way.
inline double max_conductance(const Graph& g, const std::vector<std::uint32_t>& set,
                              const PropagationWeights* wprime = nullptr) {
    detail::check_conductance_set(g, set);
    std::vector<char> in_set(g.n(), 0);
    for (auto v : set) in_set[v] = 1;
    double psi = 0;
    for (auto u : set) {
        double boundary = 0;
        auto ns = g.neighbors(u);
        auto ws = g.weights(u);
        for (std::size_t i = 0; i < ns.size(); ++i)
            if (!in_set[ns[i]]) boundary += ws[i];
        double vol = g.degree(u);
        if (wprime != nullptr) {
            const double pc = wprime->p_cont[u];
            boundary *= vol > 0 ? pc / vol : 0.0;
            vol = vol > 0 ? pc : 0.0; // vol'(u) = sum of W' row u
        }
        if (!(vol > 0)) {
            std::ostringstream msg;
            msg << "node \"" << g.nodes().name(u) << "\" has zero volume; psi is undefined";
            throw std::invalid_argument(msg.str());
        }
        psi = std::max(psi, boundary / vol);
    }
    return psi;
}

// phi(S) = total boundary weight / min(vol(S), vol(V) - vol(S)).
inline double conductance(const Graph& g, const std::vector<std::uint32_t>& set,
                          const PropagationWeights* wprime = nullptr) {
    detail::check_conductance_set(g, set);
    std::vector<char> in_set(g.n(), 0);
    for (auto v : set) in_set[v] = 1;
    double boundary = 0, vol_s = 0, vol_total = 0;
    for (std::uint32_t u = 0; u < g.n(); ++u) {
        double vol = g.degree(u);
        double out = 0;
        if (in_set[u]) {
            auto ns = g.neighbors(u);
            auto ws = g.weights(u);
            for (std::size_t i = 0; i < ns.size(); ++i)
                if (!in_set[ns[i]]) out += ws[i];
        }
        if (wprime != nullptr) {
            const double pc = wprime->p_cont[u];
            out *= vol > 0 ? pc / vol : 0.0;
            vol = vol > 0 ? pc : 0.0; // vol'(u) = sum of W' row u
        }
        vol_total += vol;
        if (in_set[u]) {
            vol_s += vol;
            boundary += out;
        }
    }
    const double denom = std::min(vol_s, vol_total - vol_s);
    if (!(denom > 0)) throw std::invalid_argument("conductance denominator is zero");
    return boundary / denom;
}

} // namespace sketchprop
