#pragma once

// Locating a level-n tuple of the tree catalog inside the condition's own
// catalog, harvesting such tuples, and limits of finite chains.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condition.hpp"

namespace forcelab {

struct Recovery {
    BitWord rho;
    std::vector<Label> v;
    CatalogEntry entry;
};

namespace detail {

struct Piece {
    std::size_t alpha;  // position of the eta summand
    std::size_t pair;   // pair of w whose g contains the other summand
    std::size_t i;
    BitWord word;       // the g summand
};

// Every way a level-n node is eta_a + s with s in g_i(a, b).
inline std::map<BitWord, std::vector<Piece>> decompositions(const Condition& p) {
    std::map<BitWord, std::vector<Piece>> out;
    const std::size_t k = p.w.size();
    for (std::size_t q = 0; q < p.pairs(); ++q) {
        const auto [a, b] = pair_at(q, k);
        for (std::size_t i = 0; i < p.iota; ++i)
            for (const auto& s : p.g[i][q]) {
                out[p.eta[a] + s].push_back({a, q, i, s});
                out[p.eta[b] + s].push_back({b, q, i, s});
            }
    }
    return out;
}

}  // namespace detail

/// For m at level n with at least five nodes: rho and v with (n, v, m + rho) in
/// the catalog of p. theorem_violation reports a failure of the argument.
inline Recovery recover_membership(const Condition& p, const MTuple& m, const IndexedBase& ib) {
    if (m.ell != p.n)
        throw precondition_error("level", "tuple level " + std::to_string(m.ell) + " is not n = " + std::to_string(p.n));
    if (m.u.size() < 5)
        throw precondition_error("size", "tuple has " + std::to_string(m.u.size()) + " nodes, fewer than 5");
    const Report structure = validate_structure(p, ib);
    if (!structure.ok())
        throw precondition_error("condition", structure.failures().front().clause + ": " + structure.failures().front().detail);
    const Catalog cat = tree_catalog(p);
    const Report mr = validate_mtuple(m, cat);
    if (!mr.ok()) throw precondition_error("valid", mr.failures().front().clause + ": " + mr.failures().front().detail);

    const auto dec = detail::decompositions(p);
    const auto piece = [&](const BitWord& x) -> const detail::Piece& {
        auto it = dec.find(x);
        if (it == dec.end()) throw theorem_violation("tree node " + x.str() + " has no decomposition");
        for (const auto& other : it->second)
            if (other.alpha != it->second.front().alpha || !(other.word == it->second.front().word))
                throw theorem_violation("tree node " + x.str() + " has two different decompositions");
        return it->second.front();
    };

    const std::size_t ku = m.u.size();
    for (std::size_t q = 0; q < m.pairs(); ++q) {
        const auto [a, b] = pair_at(q, ku);
        const BitWord &eta = m.u[a], &nu = m.u[b];
        std::vector<std::size_t> chosen;
        std::vector<BitWord> seen;
        for (std::size_t j = 0; j < 6 && chosen.size() < 3; ++j) {
            const BitWord& s = m.g[j][q][0];
            const BitWord x = eta + s, y = nu + s;
            bool clash = false;
            for (const auto& z : seen) clash = clash || z == x || z == y;
            if (clash) continue;
            chosen.push_back(j);
            seen.push_back(x);
            seen.push_back(y);
        }
        if (chosen.size() < 3) throw theorem_violation("no three separated components on a pair of u");
        for (auto j : chosen) {
            const BitWord& s = m.g[j][q][0];
            const auto& x = piece(eta + s);
            const auto& y = piece(nu + s);
            if (x.alpha == y.alpha || !(x.word == y.word))
                throw theorem_violation("decomposition of a pair of u is not of the expected kind");
            if (!(eta + nu == p.eta[x.alpha] + p.eta[y.alpha]))
                throw theorem_violation("eta + nu is not a sum of two etas");
        }
    }

    const WordSet B(p.n, p.eta);
    BitWord rho;
    try {
        rho = unique_translate(m.u, B);
    } catch (const precondition_error& e) {
        throw theorem_violation(std::string("translation lemma inapplicable: ") + e.what());
    }
    Recovery out;
    out.rho = rho;
    for (std::size_t a = 0; a < p.w.size(); ++a)
        if (m.u.contains(p.eta[a] + rho)) out.v.push_back(p.w[a]);
    out.entry.ell = p.n;
    out.entry.v = out.v;
    out.entry.m = translate_m(m, rho);
    const Report er = check_entry(p, out.entry, cat);
    if (!er.ok())
        throw theorem_violation("recovered entry fails " + er.failures().front().clause + ": " + er.failures().front().detail);
    return out;
}

struct Harvest {
    MTuple m;
    BitWord tau;  // m is a catalog entry translated by tau
};

/// Up to `count` tuples at level n: random catalog entries moved by random translations.
inline std::vector<Harvest> harvest(const Condition& p, Rng& rng, std::size_t count, const CatalogOptions& opt = {}) {
    const ConditionCatalog cat = catalog(p, opt);
    std::vector<const CatalogGroup*> top;
    for (const auto& g : cat.groups)
        if (g.ell == p.n) top.push_back(&g);
    std::vector<Harvest> out;
    if (top.empty()) return out;
    for (std::size_t c = 0; c < count; ++c) {
        const CatalogGroup& g = *top[rng.below(top.size())];
        const CatalogEntry e = sample_entry(p, g, rng);
        BitWord tau(p.n);
        for (std::size_t i = 0; i < p.n; ++i)
            if (rng.coin()) tau.set(i);
        out.push_back({translate_m(e.m, tau), tau});
    }
    return out;
}

struct ChainLimit {
    std::map<Label, BitWord> eta;
    std::vector<FiniteTree> trees;
    Report report;
};

/// The union of an increasing chain p_0 >= p_1 >= ... (listed weakest first),
/// with evidence that pairs meet largely in the limit trees.
inline ChainLimit chain_limit(const std::vector<Condition>& chain, const IndexedBase& ib) {
    if (chain.empty()) throw precondition_error("ordered", "empty chain");
    for (std::size_t c = 0; c + 1 < chain.size(); ++c) {
        const Report r = leq_report(chain[c], chain[c + 1]);
        if (!r.ok())
            throw precondition_error("ordered", "step " + std::to_string(c) + " fails " + r.failures().front().clause +
                                                    ": " + r.failures().front().detail);
    }
    const Condition& last = chain.back();
    ChainLimit out;
    for (std::size_t a = 0; a < last.w.size(); ++a) out.eta[last.w[a]] = last.eta[a];
    out.trees = last.trees;

    bool nest = true;
    for (const auto& c : chain) {
        for (std::size_t a = 0; a < c.w.size(); ++a)
            nest = nest && out.eta.count(c.w[a]) && c.eta[a].is_prefix_of(out.eta.at(c.w[a]));
        for (std::size_t m = 0; m < c.M; ++m) nest = nest && out.trees.at(m).truncate(c.n) == c.trees[m];
    }
    out.report.check("nesting", nest, "a condition of the chain is not an initial part of the limit");

    bool large = true;
    std::string why;
    for (std::size_t q = 0; q < last.pairs() && large; ++q) {
        const auto [a, b] = pair_at(q, last.w.size());
        for (std::size_t i = 0; i < last.iota && large; ++i) {
            const WordSet& s = last.g[i][q];
            const FiniteTree& t = out.trees.at(last.h[i][q]);
            if (!base_member(ib.component(i), s)) {
                large = false;
                why = "g_" + std::to_string(i) + " is not in its base";
            }
            for (const auto& x : s)
                if (!t.contains(last.eta[a] + x) || !t.contains(last.eta[b] + x)) {
                    large = false;
                    why = "eta_" + std::to_string(last.w[a]) + " + g and eta_" + std::to_string(last.w[b]) +
                          " + g leave t_" + std::to_string(last.h[i][q]);
                }
        }
    }
    out.report.check("largeness", large, why);
    return out;
}

}  // namespace forcelab
