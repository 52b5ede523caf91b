#pragma once

// Forcing conditions: the finite data, the structural demands, the derived
// catalog of M-tuple entries, the two coherence demands against a background
// model, and the order.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bases.hpp"
#include "errors.hpp"
#include "gf2.hpp"
#include "mtuple.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "splitrank.hpp"

namespace forcelab {

using Label = std::size_t;

/// (w, n, iota, M, eta, t, r, h, g). Maps on w<2> are stored once per unordered
/// pair of positions in the increasing enumeration of w: h[i][pair_index(a, b, |w|)].
struct Condition {
    std::vector<Label> w;
    std::size_t n = 0;
    std::size_t iota = 0;
    std::size_t M = 0;
    std::vector<BitWord> eta;
    std::vector<FiniteTree> trees;
    std::vector<std::size_t> r;
    std::vector<std::vector<std::size_t>> h;
    std::vector<std::vector<WordSet>> g;

    std::size_t pairs() const noexcept { return pair_count(w.size()); }

    std::optional<std::size_t> pos(Label a) const {
        auto it = std::lower_bound(w.begin(), w.end(), a);
        if (it == w.end() || *it != a) return std::nullopt;
        return static_cast<std::size_t>(it - w.begin());
    }
    std::size_t pos_of(Label a) const {
        if (auto k = pos(a)) return *k;
        throw input_error("label " + std::to_string(a) + " is not in w");
    }
    std::size_t pair(Label a, Label b) const { return pair_index(pos_of(a), pos_of(b), w.size()); }
    bool contains(Label a) const { return pos(a).has_value(); }

    const BitWord& eta_of(Label a) const { return eta.at(pos_of(a)); }
    std::size_t h_of(std::size_t i, Label a, Label b) const { return h.at(i).at(pair(a, b)); }
    const WordSet& g_of(std::size_t i, Label a, Label b) const { return g.at(i).at(pair(a, b)); }

    friend bool operator==(const Condition&, const Condition&) = default;
};

inline std::string label_text(const std::vector<Label>& v) {
    std::string s = "{";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
    return s + "}";
}

/// Level-n parts prescribed by the tree identity: for each m the union of
/// eta_a + g_i(a, b) and eta_b + g_i(a, b) over pairs and i with h_i(a, b) = m.
inline std::vector<WordSet> prescribed_levels(const Condition& p) {
    std::vector<std::vector<BitWord>> acc(p.M);
    const std::size_t k = p.w.size();
    for (std::size_t q = 0; q < p.pairs(); ++q) {
        const auto [a, b] = pair_at(q, k);
        for (std::size_t i = 0; i < p.iota; ++i) {
            const std::size_t m = p.h.at(i).at(q);
            if (m >= p.M) continue;
            for (const auto& s : p.g.at(i).at(q)) {
                acc[m].push_back(p.eta[a] + s);
                acc[m].push_back(p.eta[b] + s);
            }
        }
    }
    std::vector<WordSet> out;
    out.reserve(p.M);
    for (auto& v : acc) out.emplace_back(p.n, std::move(v));
    return out;
}

/// Trees as downward closures of the prescribed level-n parts.
inline std::vector<FiniteTree> closure_trees(const Condition& p) {
    std::vector<FiniteTree> out;
    for (auto& lv : prescribed_levels(p)) out.emplace_back(p.n, std::move(lv));
    return out;
}

/// Structural demands: sizes, eta, trees, r, h, g, tree levels, independence.
inline Report validate_structure(const Condition& p, const IndexedBase& ib) {
    ib.validate();
    Report rep;
    const std::size_t k = p.w.size();
    {
        std::string why;
        if (k < 5) why = "|w| = " + std::to_string(k) + " < 5";
        for (std::size_t a = 1; a < k; ++a)
            if (p.w[a - 1] >= p.w[a]) why = "w is not strictly increasing";
        if (p.n < 5) why = "n = " + std::to_string(p.n) + " < 5";
        if (p.M < 5) why = "M = " + std::to_string(p.M) + " < 5";
        if (p.iota == 0) why = "iota = 0";
        if (ib.istar && p.iota != *ib.istar)
            why = "iota = " + std::to_string(p.iota) + " differs from i* = " + std::to_string(*ib.istar);
        rep.check("sizes", why.empty(), why);
    }
    {
        bool ok = p.eta.size() == k;
        std::string why = ok ? "" : "eta has " + std::to_string(p.eta.size()) + " entries for |w| = " + std::to_string(k);
        for (std::size_t a = 0; ok && a < k; ++a)
            if (p.eta[a].size() != p.n) {
                ok = false;
                why = "eta of " + std::to_string(p.w[a]) + " has length " + std::to_string(p.eta[a].size());
            }
        rep.check("eta", ok, why);
    }
    bool trees_ok = p.trees.size() == p.M;
    if (!trees_ok) rep.fail("trees", std::to_string(p.trees.size()) + " trees for M = " + std::to_string(p.M));
    for (std::size_t m = 0; trees_ok && m < p.M; ++m) {
        if (p.trees[m].depth() != p.n || p.trees[m].empty()) {
            rep.fail("trees", "t_" + std::to_string(m) + " is empty or has depth " + std::to_string(p.trees[m].depth()));
            trees_ok = false;
        }
    }
    if (trees_ok) {
        std::map<BitWord, std::size_t> owner;
        bool disjoint = true;
        for (std::size_t m = 0; m < p.M; ++m)
            for (const auto& x : p.trees[m].top()) {
                auto [it, fresh] = owner.emplace(x, m);
                if (!fresh) {
                    rep.fail("trees", "t_" + std::to_string(it->second) + " and t_" + std::to_string(m) +
                                          " share the level-n node " + x.str());
                    disjoint = false;
                }
            }
        if (disjoint) rep.pass("trees");
    }
    {
        bool ok = p.r.size() == p.M;
        std::string why = ok ? "" : "r has " + std::to_string(p.r.size()) + " entries";
        for (std::size_t m = 0; ok && m < p.M; ++m)
            if (p.r[m] == 0 || p.r[m] > p.n) {
                ok = false;
                why = "r_" + std::to_string(m) + " = " + std::to_string(p.r[m]) + " is not in (0, n]";
            }
        rep.check("r", ok, why);
    }
    bool h_ok = p.h.size() == p.iota;
    for (std::size_t i = 0; h_ok && i < p.iota; ++i) h_ok = p.h[i].size() == p.pairs();
    if (!h_ok) rep.fail("h", "h needs iota maps over all pairs of w");
    for (std::size_t i = 0; h_ok && i < p.iota; ++i)
        for (std::size_t q = 0; q < p.pairs(); ++q)
            if (p.h[i][q] >= p.M) {
                rep.fail("h", "h_" + std::to_string(i) + " on pair " + std::to_string(q) + " is " +
                                  std::to_string(p.h[i][q]) + ", not below M");
                h_ok = false;
            }
    if (h_ok) rep.pass("h");

    bool g_shape = p.g.size() == p.iota;
    for (std::size_t i = 0; g_shape && i < p.iota; ++i) g_shape = p.g[i].size() == p.pairs();
    if (!g_shape) rep.fail("g", "g needs iota maps over all pairs of w");
    if (g_shape && k >= 2) {
        bool ok = true;
        for (std::size_t q = 0; q < p.pairs(); ++q) {
            const auto [a, b] = pair_at(q, k);
            std::set<BitWord> cover;
            for (std::size_t i = 0; i < p.iota; ++i) {
                const WordSet& s = p.g[i][q];
                const BaseTag tag = ib.component(i);
                if (s.len() != p.n || !base_member(tag, s)) {
                    rep.fail("g", "g_" + std::to_string(i) + "(" + std::to_string(p.w[a]) + "," + std::to_string(p.w[b]) +
                                      ") is not a level-n member of " + to_string(tag));
                    ok = false;
                }
                cover.insert(s.begin(), s.end());
            }
            if (cover.size() < 6) {
                rep.fail("g", "the g_i(" + std::to_string(p.w[a]) + "," + std::to_string(p.w[b]) + ") cover only " +
                                  std::to_string(cover.size()) + " words");
                ok = false;
            }
        }
        if (ok) rep.pass("g");
    }

    const bool shaped = rep.ok("eta") && trees_ok && h_ok && g_shape && rep.ok("g");
    if (shaped) {
        const auto want = prescribed_levels(p);
        bool ok = true;
        for (std::size_t m = 0; m < p.M; ++m) {
            const WordSet& have = p.trees[m].top();
            for (const auto& x : have)
                if (!want[m].contains(x)) {
                    rep.fail("levels", "t_" + std::to_string(m) + " has level-n node " + x.str() +
                                           " not of the form eta_a + g_i(a,b) with h_i(a,b) = m");
                    ok = false;
                }
            for (const auto& x : want[m])
                if (!have.contains(x)) {
                    rep.fail("levels", "t_" + std::to_string(m) + " misses the level-n node " + x.str());
                    ok = false;
                }
        }
        if (ok) rep.pass("levels");

        std::set<BitWord> all(p.eta.begin(), p.eta.end());
        for (std::size_t i = 0; i < p.iota; ++i)
            for (const auto& s : p.g[i]) all.insert(s.begin(), s.end());
        const std::vector<BitWord> vecs(all.begin(), all.end());
        rep.check("independence", is_independent(vecs),
                  "the " + std::to_string(vecs.size()) + " eta and g words are dependent");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Catalog entries

/// (ell, v, m). v is increasing; m lives over the six-singleton base.
struct CatalogEntry {
    std::size_t ell = 0;
    std::vector<Label> v;
    MTuple m;

    friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

inline Catalog tree_catalog(const Condition& p) {
    Catalog cat;
    cat.trees = p.trees;
    cat.depth = p.n;
    cat.ib = six_singletons();
    return cat;
}

/// Distinct values h_j(a, b), j < iota, for positions a, b.
inline std::vector<std::size_t> allowed_trees(const Condition& p, std::size_t a, std::size_t b) {
    std::vector<std::size_t> out;
    const std::size_t q = pair_index(a, b, p.w.size());
    for (std::size_t i = 0; i < p.iota; ++i) out.push_back(p.h[i][q]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Membership of an entry: v, the tuple, the r-bound and h-compatibility.
inline Report check_entry(const Condition& p, const CatalogEntry& e, const Catalog& cat) {
    Report rep;
    std::string why;
    if (e.ell == 0 || e.ell > p.n) why = "level " + std::to_string(e.ell) + " is not in (0, n]";
    if (e.v.size() < 5) why = "|v| = " + std::to_string(e.v.size()) + " < 5";
    std::vector<BitWord> nodes;
    for (std::size_t a = 0; why.empty() && a < e.v.size(); ++a) {
        if (a && e.v[a - 1] >= e.v[a]) why = "v is not increasing";
        if (!p.contains(e.v[a])) why = "label " + std::to_string(e.v[a]) + " is not in w";
        if (why.empty()) nodes.push_back(p.eta_of(e.v[a]).prefix(e.ell));
    }
    if (why.empty()) {
        const WordSet u(e.ell, nodes);
        if (u.size() != nodes.size()) why = "two labels of v share eta at level " + std::to_string(e.ell);
    }
    rep.check("entry-v", why.empty(), why);
    if (!why.empty()) return rep;

    const WordSet u(e.ell, nodes);
    const Report mr = validate_mtuple(e.m, cat);
    std::string mwhy;
    if (!mr.ok()) mwhy = "tuple invalid: " + mr.failures().front().clause + " " + mr.failures().front().detail;
    if (e.m.ell != e.ell) mwhy = "tuple level differs from the entry level";
    if (!(e.m.u == u)) mwhy = "tuple nodes are not the eta restrictions of v";
    rep.check("entry-m", mwhy.empty(), mwhy);
    if (!mwhy.empty()) return rep;

    bool r_ok = true, h_ok = true;
    for (std::size_t a = 0; a < e.v.size(); ++a)
        for (std::size_t b = a + 1; b < e.v.size(); ++b) {
            const std::size_t pa = p.pos_of(e.v[a]), pb = p.pos_of(e.v[b]);
            const auto hs = allowed_trees(p, pa, pb);
            for (std::size_t i = 0; i < 6; ++i) {
                const std::size_t t = e.m.h_of(i, nodes[a], nodes[b]);
                if (p.r.at(t) > e.ell && r_ok) {
                    rep.fail("entry-r", "r_" + std::to_string(t) + " = " + std::to_string(p.r[t]) + " exceeds level " +
                                            std::to_string(e.ell));
                    r_ok = false;
                }
                if (!std::binary_search(hs.begin(), hs.end(), t) && h_ok) {
                    rep.fail("entry-h", "tree " + std::to_string(t) + " on (" + std::to_string(e.v[a]) + "," +
                                            std::to_string(e.v[b]) + ") is not among the h_j of the pair");
                    h_ok = false;
                }
            }
        }
    if (r_ok) rep.pass("entry-r");
    if (h_ok) rep.pass("entry-h");
    return rep;
}

inline Report check_entry(const Condition& p, const CatalogEntry& e) { return check_entry(p, e, tree_catalog(p)); }

/// A node sigma usable for one pair of an entry, with the trees that may carry it.
struct SigmaOption {
    BitWord sigma;
    std::vector<std::size_t> trees;
};

using OptionList = std::shared_ptr<const std::vector<SigmaOption>>;

/// All entries over one (ell, v), in product form: every injective choice of six
/// options per pair (one tree each) is an entry, and every entry arises so.
struct CatalogGroup {
    std::size_t ell = 0;
    std::vector<std::size_t> pos;                   // positions in w, increasing
    std::vector<OptionList> options;  // by pair_index over pos

    const std::vector<SigmaOption>& opts(std::size_t q) const { return *options.at(q); }

    std::vector<Label> labels(const Condition& p) const {
        std::vector<Label> v;
        for (auto k : pos) v.push_back(p.w[k]);
        return v;
    }
};

namespace detail {

// Injective sequences of length six from weighted items: 6! times the sixth
// elementary symmetric polynomial of the weights.
inline long double injective_six(const std::vector<SigmaOption>& opts) {
    std::vector<long double> e(7, 0.0L);
    e[0] = 1.0L;
    for (const auto& o : opts) {
        const long double x = static_cast<long double>(o.trees.size());
        for (std::size_t j = 6; j >= 1; --j) e[j] += e[j - 1] * x;
    }
    return e[6] * 720.0L;
}

}  // namespace detail

inline long double entry_count(const CatalogGroup& grp) {
    long double total = 1.0L;
    for (const auto& o : grp.options) total *= detail::injective_six(*o);
    return total;
}

/// choice[q] lists six (option, tree-slot) picks for pair q of the group.
using EntryChoice = std::vector<std::vector<std::pair<std::size_t, std::size_t>>>;

inline CatalogEntry make_entry(const Condition& p, const CatalogGroup& grp, const EntryChoice& choice) {
    CatalogEntry e;
    e.ell = grp.ell;
    e.v = grp.labels(p);
    std::vector<BitWord> nodes;
    for (auto k : grp.pos) nodes.push_back(p.eta[k].prefix(grp.ell));
    e.m.ell = grp.ell;
    e.m.iota = 6;
    e.m.u = WordSet(grp.ell, nodes);
    const std::size_t k = grp.pos.size();
    e.m.h.assign(6, std::vector<std::size_t>(pair_count(k)));
    e.m.g.assign(6, std::vector<WordSet>(pair_count(k)));
    for (std::size_t q = 0; q < pair_count(k); ++q) {
        const auto [a, b] = pair_at(q, k);
        const std::size_t mq = e.m.pair(nodes[a], nodes[b]);
        for (std::size_t i = 0; i < 6; ++i) {
            const auto& opt = grp.opts(q).at(choice.at(q).at(i).first);
            e.m.h[i][mq] = opt.trees.at(choice[q][i].second);
            e.m.g[i][mq] = WordSet(grp.ell, {opt.sigma});
        }
    }
    return e;
}

/// The entry taking the first six options and the least tree of each.
inline CatalogEntry first_entry(const Condition& p, const CatalogGroup& grp) {
    EntryChoice c(grp.options.size());
    for (auto& x : c)
        for (std::size_t i = 0; i < 6; ++i) x.push_back({i, 0});
    return make_entry(p, grp, c);
}

inline CatalogEntry sample_entry(const Condition& p, const CatalogGroup& grp, Rng& rng) {
    EntryChoice c(grp.options.size());
    for (std::size_t q = 0; q < grp.options.size(); ++q) {
        auto picks = rng.sample(grp.opts(q).size(), 6);
        rng.shuffle(picks);
        for (auto o : picks) c[q].push_back({o, static_cast<std::size_t>(rng.below(grp.opts(q)[o].trees.size()))});
    }
    return make_entry(p, grp, c);
}

/// Calls f on every entry of the group until f returns true.
template <class F>
bool for_each_entry(const Condition& p, const CatalogGroup& grp, F&& f) {
    const std::size_t P = grp.options.size();
    EntryChoice c(P);
    std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t q, std::size_t i) -> bool {
        if (q == P) return f(static_cast<const CatalogEntry&>(make_entry(p, grp, c)));
        if (i == 6) return rec(q + 1, 0);
        for (std::size_t o = 0; o < grp.opts(q).size(); ++o) {
            bool used = false;
            for (const auto& x : c[q]) used = used || x.first == o;
            if (used) continue;
            for (std::size_t t = 0; t < grp.opts(q)[o].trees.size(); ++t) {
                c[q].push_back({o, t});
                const bool stop = rec(q, i + 1);
                c[q].pop_back();
                if (stop) return true;
            }
        }
        return false;
    };
    return rec(0, 0);
}

struct CatalogOptions {
    std::size_t max_v = 7;
    unsigned long long budget = 200000000ULL;
};

/// Restrictions of eta and tree levels at one level, with the per-pair options.
class LevelView {
public:
    LevelView(const Condition& p, std::size_t ell) : p_(&p), ell_(ell) {
        for (const auto& e : p.eta) eta_.push_back(e.prefix(ell));
    }

    std::size_t ell() const noexcept { return ell_; }
    const BitWord& eta(std::size_t k) const { return eta_.at(k); }

    const WordSet& tree_level(std::size_t m) {
        auto it = levels_.find(m);
        if (it == levels_.end()) it = levels_.emplace(m, p_->trees.at(m).level(ell_)).first;
        return it->second;
    }

    /// Options for positions (a, b) restricted to the given trees and to r <= ell.
    std::vector<SigmaOption> options(std::size_t a, std::size_t b, const std::vector<std::size_t>& hs, Budget& budget) {
        std::vector<SigmaOption> out;
        if (eta_[a] == eta_[b]) return out;
        const BitWord diff = eta_[a] + eta_[b];
        std::vector<std::pair<BitWord, std::size_t>> hits;
        for (auto t : hs) {
            if (p_->r.at(t) > ell_) continue;
            const WordSet& L = tree_level(t);
            budget.spend(L.size(), "catalog");
            for (const auto& x : L) {
                BitWord y = x + diff;
                if (!L.contains(y)) continue;
                y ^= eta_[b];
                hits.emplace_back(std::move(y), t);
            }
        }
        std::sort(hits.begin(), hits.end());
        hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
        for (auto& [s, t] : hits) {
            if (out.empty() || !(out.back().sigma == s)) out.push_back({std::move(s), {}});
            out.back().trees.push_back(t);
        }
        return out;
    }

    /// Options for (a, b) over the trees h_j(a, b), cached.
    const OptionList& pair_options(std::size_t a, std::size_t b, Budget& budget) {
        const std::size_t q = pair_index(a, b, p_->w.size());
        auto it = pairs_.find(q);
        if (it == pairs_.end())
            it = pairs_.emplace(q, std::make_shared<const std::vector<SigmaOption>>(
                                       options(a, b, allowed_trees(*p_, a, b), budget))).first;
        return it->second;
    }

private:
    const Condition* p_;
    std::size_t ell_;
    std::vector<BitWord> eta_;
    std::map<std::size_t, WordSet> levels_;
    std::map<std::size_t, OptionList> pairs_;
};

/// Options of every pair of w at one level and the groups they support.
struct LevelCatalog {
    std::size_t ell = 0;
    std::vector<OptionList> pair_options;  // by pair_index over w
    std::vector<CatalogGroup> groups;
};

inline LevelCatalog level_catalog(const Condition& p, LevelView& view, const CatalogOptions& opt, Budget& budget) {
    LevelCatalog lc;
    lc.ell = view.ell();
    const std::size_t k = p.w.size();
    lc.pair_options.resize(p.pairs());
    std::vector<std::vector<char>> feasible(k, std::vector<char>(k, 0));
    bool any = false;
    for (std::size_t q = 0; q < p.pairs(); ++q) {
        const auto [a, b] = pair_at(q, k);
        lc.pair_options[q] = view.pair_options(a, b, budget);
        const bool f = lc.pair_options[q]->size() >= 6;
        feasible[a][b] = feasible[b][a] = f;
        any = any || f;
    }
    if (!any) return lc;
    std::vector<std::size_t> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        budget.spend(1, "catalog");
        if (cur.size() >= 5) {
            CatalogGroup grp;
            grp.ell = lc.ell;
            grp.pos = cur;
            for (std::size_t q = 0; q < pair_count(cur.size()); ++q) {
                const auto [a, b] = pair_at(q, cur.size());
                grp.options.push_back(lc.pair_options[pair_index(cur[a], cur[b], k)]);
            }
            lc.groups.push_back(std::move(grp));
        }
        if (cur.size() == opt.max_v) return;
        for (std::size_t c = start; c < k; ++c) {
            bool ok = true;
            for (auto x : cur) ok = ok && feasible[x][c];
            if (!ok) continue;
            cur.push_back(c);
            rec(c + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return lc;
}

/// Levels at which entries may exist: ell >= min r.
inline std::pair<std::size_t, std::size_t> catalog_levels(const Condition& p) {
    std::size_t lo = p.n;
    for (auto x : p.r) lo = std::min(lo, x);
    return {std::max<std::size_t>(lo, 1), p.n};
}

/// The catalog of p in product form, bounded by |v| <= max_v.
struct ConditionCatalog {
    std::vector<CatalogGroup> groups;

    long double entries() const {
        long double total = 0;
        for (const auto& g : groups) total += entry_count(g);
        return total;
    }
};

inline ConditionCatalog catalog(const Condition& p, const CatalogOptions& opt = {}) {
    Budget budget(opt.budget);
    ConditionCatalog out;
    const auto [lo, hi] = catalog_levels(p);
    for (std::size_t ell = lo; ell <= hi; ++ell) {
        LevelView view(p, ell);
        auto lc = level_catalog(p, view, opt, budget);
        for (auto& g : lc.groups) out.groups.push_back(std::move(g));
    }
    return out;
}

/// Every entry, refusing with budget_exceeded when there are more than `limit`.
inline std::vector<CatalogEntry> materialize(const Condition& p, const ConditionCatalog& cat, std::size_t limit) {
    if (cat.entries() > static_cast<long double>(limit))
        throw budget_exceeded("catalog has about " + std::to_string(static_cast<double>(cat.entries())) +
                              " entries, above the limit " + std::to_string(limit));
    std::vector<CatalogEntry> out;
    for (const auto& g : cat.groups)
        for_each_entry(p, g, [&](const CatalogEntry& e) {
            out.push_back(e);
            return false;
        });
    return out;
}

// ---------------------------------------------------------------------------
// Coherence demands against a model

namespace detail {

inline OrdSet labels_set(const Condition& p, const std::vector<std::size_t>& pos) {
    OrdSet s = 0;
    for (auto k : pos) s |= OrdSet{1} << p.w[k];
    return s;
}

inline std::size_t count_with_trees(const std::vector<SigmaOption>& opts, const std::vector<std::size_t>& allowed) {
    std::size_t c = 0;
    for (const auto& o : opts) {
        bool any = false;
        for (auto t : o.trees) any = any || std::binary_search(allowed.begin(), allowed.end(), t);
        c += any ? 1 : 0;
    }
    return c;
}

inline std::vector<std::size_t> intersect(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Translation demand for one group: every entry (ell, v1, m + rho) over the same
// level must carry the same rank witness, with the witness positions matched by rho.
inline void check_translation(const Condition& p, const LevelView& view, const LevelCatalog& lc,
                              const CatalogGroup& grp, RankEvaluator& ev, Report& rep, Budget& budget) {
    const std::size_t k = p.w.size();
    const std::size_t s = grp.pos.size();
    std::set<BitWord> seen;
    for (std::size_t c = 0; c < k; ++c) {
        const BitWord rho = view.eta(grp.pos[0]) + view.eta(c);
        if (!seen.insert(rho).second) continue;
        std::vector<std::vector<std::size_t>> image(s);
        bool possible = true;
        for (std::size_t a = 0; a < s && possible; ++a) {
            const BitWord target = view.eta(grp.pos[a]) + rho;
            for (std::size_t d = 0; d < k; ++d)
                if (view.eta(d) == target) image[a].push_back(d);
            possible = !image[a].empty();
        }
        if (!possible) continue;
        std::vector<std::size_t> f(s);
        std::function<void(std::size_t)> rec = [&](std::size_t a) {
            if (a < s) {
                for (auto d : image[a]) {
                    f[a] = d;
                    rec(a + 1);
                }
                return;
            }
            budget.spend(1, "translation demand");
            if (rho.is_zero() && f == grp.pos) return;
            for (std::size_t q = 0; q < pair_count(s); ++q) {
                const auto [a0, b0] = pair_at(q, s);
                const auto joint = intersect(allowed_trees(p, grp.pos[a0], grp.pos[b0]), allowed_trees(p, f[a0], f[b0]));
                if (count_with_trees(*lc.pair_options[pair_index(grp.pos[a0], grp.pos[b0], k)], joint) < 6) return;
            }
            std::vector<std::size_t> v1 = f;
            std::sort(v1.begin(), v1.end());
            const OrdSet s0 = labels_set(p, grp.pos), s1 = labels_set(p, v1);
            const Rank r0 = ev.rank(s0), r1 = ev.rank(s1);
            const std::string tag = "level " + std::to_string(view.ell()) + ", v0 = " + ordset_text(s0) +
                                    ", v1 = " + ordset_text(s1) + ", rho = " + rho.str();
            if (r0 != r1) {
                rep.fail("translation", "ranks " + r0.str() + " and " + r1.str() + " differ at " + tag);
                return;
            }
            if (r0.is_infinite()) {
                rep.pass("translation");
                return;
            }
            const auto w0 = ev.witness(s0), w1 = ev.witness(s1);
            if (w0.zeta != w1.zeta || w0.k != w1.k) {
                rep.fail("translation", "witnesses (" + std::to_string(w0.zeta) + "," + std::to_string(w0.k) + ") and (" +
                                            std::to_string(w1.zeta) + "," + std::to_string(w1.k) + ") differ at " + tag);
                return;
            }
            const bool matched = view.eta(grp.pos[w0.k]) + rho == view.eta(v1[w1.k]);
            rep.check("translation", matched, "witness positions are not matched by rho at " + tag);
        };
        rec(0);
    }
}

// Unique-extension demand for one group of rank -1. A violating pair of entries
// may be shrunk to v1 = v0 + {gamma}, so only those are searched.
inline void check_unique_extension(const Condition& p, const LevelCatalog& lc, const CatalogGroup& grp,
                                   RankEvaluator& ev, std::map<std::size_t, LevelView>& views, Report& rep,
                                   Budget& budget) {
    const OrdSet s0 = labels_set(p, grp.pos);
    const Rank r0 = ev.rank(s0);
    if (r0 != Rank::of(-1)) return;
    const std::size_t k = p.w.size();
    const std::size_t ell0 = grp.ell;
    const std::size_t alpha = grp.pos[ev.witness(s0).k];
    const BitWord stem = p.eta[alpha].prefix(ell0);
    for (std::size_t gamma = 0; gamma < k; ++gamma) {
        if (gamma == alpha || !(p.eta[gamma].prefix(ell0) == stem)) continue;
        for (std::size_t ell1 = ell0 + 1; ell1 <= p.n; ++ell1) {
            if (p.eta[gamma].prefix(ell1) == p.eta[alpha].prefix(ell1)) continue;
            budget.spend(1, "unique-extension demand");
            auto it = views.find(ell1);
            if (it == views.end()) it = views.emplace(ell1, LevelView(p, ell1)).first;
            LevelView& v1 = it->second;
            auto opts1 = [&](std::size_t a, std::size_t b) -> const std::vector<SigmaOption>& { return *v1.pair_options(a, b, budget); };
            if (opts1(alpha, gamma).size() < 6) continue;
            bool all = true;
            const std::size_t s = grp.pos.size();
            for (std::size_t q = 0; q < pair_count(s) && all; ++q) {
                const auto [a0, b0] = pair_at(q, s);
                const std::size_t a = grp.pos[a0], b = grp.pos[b0];
                std::vector<std::pair<std::size_t, std::size_t>> above{{a, b}};
                if (a == alpha) above.push_back({gamma, b});
                if (b == alpha) above.push_back({a, gamma});
                std::vector<std::set<std::pair<BitWord, std::size_t>>> reach;
                for (auto [x, y] : above) {
                    std::set<std::pair<BitWord, std::size_t>> r;
                    for (const auto& o : opts1(x, y))
                        for (auto t : o.trees) r.insert({o.sigma.prefix(ell0), t});
                    reach.push_back(std::move(r));
                }
                std::size_t good = 0;
                for (const auto& o : *lc.pair_options[pair_index(a, b, k)]) {
                    bool ok = false;
                    for (auto t : o.trees) {
                        bool every = true;
                        for (const auto& r : reach) every = every && r.count({o.sigma, t}) > 0;
                        ok = ok || every;
                    }
                    good += ok ? 1 : 0;
                }
                all = good >= 6;
            }
            if (all) {
                rep.fail("unique-extension", "v0 = " + ordset_text(s0) + " has rank -1 at level " + std::to_string(ell0) +
                                                 " but " + std::to_string(p.w[gamma]) + " splits from " +
                                                 std::to_string(p.w[alpha]) + " at level " + std::to_string(ell1));
                return;
            }
        }
    }
    rep.pass("unique-extension");
}

}  // namespace detail

struct ValidateOptions {
    CatalogOptions catalog{};
    unsigned long long rank_budget = ~0ULL;
};

/// Every demand: structure, catalog, translation and unique extension. Throws
/// input_error when the model is malformed or does not contain w.
inline Report validate(const Condition& p, const FiniteModel& model, const IndexedBase& ib,
                       const ValidateOptions& opt = {}) {
    const Report mrep = validate_model(model);
    if (!mrep.ok()) throw input_error("model rejected: " + mrep.failures().front().detail);
    for (auto a : p.w)
        if (a >= model.size())
            throw input_error("label " + std::to_string(a) + " is outside the model universe of size " +
                              std::to_string(model.size()));
    Report rep = validate_structure(p, ib);
    if (!rep.ok()) return rep;

    Budget budget(opt.catalog.budget);
    RankEvaluator ev(model, opt.rank_budget);
    const Catalog cat = tree_catalog(p);
    std::map<std::size_t, LevelView> views;
    std::size_t groups = 0;
    const auto [lo, hi] = catalog_levels(p);
    for (std::size_t ell = lo; ell <= hi; ++ell) {
        LevelView view(p, ell);
        const LevelCatalog lc = level_catalog(p, view, opt.catalog, budget);
        for (const auto& grp : lc.groups) {
            ++groups;
            const CatalogEntry e = first_entry(p, grp);
            const Report er = check_entry(p, e, cat);
            if (!er.ok())
                rep.fail("catalog", "constructed entry at level " + std::to_string(ell) + " over " +
                                        label_text(e.v) + " fails " + er.failures().front().clause + ": " +
                                        er.failures().front().detail);
            detail::check_translation(p, view, lc, grp, ev, rep, budget);
            detail::check_unique_extension(p, lc, grp, ev, views, rep, budget);
        }
    }
    if (rep.ok("catalog")) rep.pass("catalog", std::to_string(groups) + " groups");
    if (rep.ok("translation")) rep.pass("translation");
    if (rep.ok("unique-extension")) rep.pass("unique-extension");
    return rep;
}

// ---------------------------------------------------------------------------
// Order

namespace detail {
// Singletons belong to the singleton base, sets of three or more to the perfect base.
inline bool base_preceq(const WordSet& u, const WordSet& v) {
    if (u == v) return true;
    return base_prec(u.size() == 1 ? BaseTag::O0 : BaseTag::Oper, u, v);
}
}  // namespace detail

inline Report leq_report(const Condition& p, const Condition& q) {
    Report rep;
    const bool sub = std::includes(q.w.begin(), q.w.end(), p.w.begin(), p.w.end());
    const bool params = sub && p.n <= q.n && p.M <= q.M && p.iota <= q.iota;
    rep.check("parameters", params, "need w^p inside w^q, n^p <= n^q, M^p <= M^q, iota^p <= iota^q");
    if (!params || p.trees.size() < p.M || q.trees.size() < p.M || p.r.size() < p.M || q.r.size() < p.M) {
        if (params) rep.fail("trees", "tree or r lists are too short");
        return rep;
    }
    bool t_ok = true;
    for (std::size_t m = 0; m < p.M; ++m) {
        if (!(q.trees[m].truncate(p.n) == p.trees[m]) && t_ok) {
            rep.fail("trees", "t^q_" + std::to_string(m) + " restricted to level " + std::to_string(p.n) + " is not t^p_" +
                                  std::to_string(m));
            t_ok = false;
        }
        if (p.r[m] != q.r[m] && t_ok) {
            rep.fail("trees", "r_" + std::to_string(m) + " changed");
            t_ok = false;
        }
    }
    if (t_ok) rep.pass("trees");
    bool e_ok = true;
    for (std::size_t a = 0; a < p.w.size() && e_ok; ++a)
        if (!p.eta.at(a).is_prefix_of(q.eta_of(p.w[a]))) {
            rep.fail("eta", "eta of " + std::to_string(p.w[a]) + " is not extended");
            e_ok = false;
        }
    if (e_ok) rep.pass("eta");
    bool hg_ok = true;
    for (std::size_t x = 0; x < p.pairs() && hg_ok; ++x) {
        const auto [a, b] = pair_at(x, p.w.size());
        const std::size_t y = q.pair(p.w[a], p.w[b]);
        for (std::size_t i = 0; i < p.iota && hg_ok; ++i) {
            if (p.h.at(i).at(x) != q.h.at(i).at(y)) {
                rep.fail("h/g", "h_" + std::to_string(i) + " changed on (" + std::to_string(p.w[a]) + "," +
                                    std::to_string(p.w[b]) + ")");
                hg_ok = false;
            } else if (!detail::base_preceq(p.g.at(i).at(x), q.g.at(i).at(y))) {
                rep.fail("h/g", "g_" + std::to_string(i) + " on (" + std::to_string(p.w[a]) + "," +
                                    std::to_string(p.w[b]) + ") is not extended in the base order");
                hg_ok = false;
            }
        }
    }
    if (hg_ok) rep.pass("h/g");
    return rep;
}

inline bool leq(const Condition& p, const Condition& q) { return leq_report(p, q).ok(); }

}  // namespace forcelab
