#pragma once

// Building conditions: the five-point start, adding an ordinal, raising iota,
// twin copies for the Delta-system step, and amalgamation of two twins.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condition.hpp"
#include "splitrank.hpp"

namespace forcelab {

struct ConstructOptions {
    TailMode tails = TailMode::standard;
    std::uint64_t seed = 0;
    std::size_t extra_levels = 0;
};

/// One level up: a singleton takes its left child, a larger set splits every node.
inline WordSet lift(const WordSet& u) {
    return u.size() == 1 ? extend_level(u, ExtKind::left) : twin_extension(u, 1);
}

/// A member of the component at level ell lying above a member one level lower.
inline WordSet seed(BaseTag tag, std::size_t ell) {
    if (tag == BaseTag::O0) return WordSet(ell, {BitWord(ell)});
    if (ell < 3) throw input_error("a perfect-base seed needs level at least 3");
    const std::size_t L = ell - 1;
    return twin_extension(WordSet(L, {BitWord(L), BitWord::unit(L, L - 1), BitWord::unit(L, L - 2)}), 1);
}

/// Stems of g at a common level, with the order in which eta tails are laid out.
struct Plan {
    std::vector<Label> w;
    std::size_t iota = 0;
    std::size_t ell = 0;
    std::vector<std::vector<WordSet>> v;  // v[i][pair over w]
    std::vector<Label> tail_order;        // a permutation of w
    std::map<Label, BitWord> anchors;     // eta prefixes, length at most ell
};

namespace detail {

// eta and g from a plan; n, M, h, r and the trees are left to the caller.
inline Condition realize(const Plan& plan, const ConstructOptions& opt) {
    const std::size_t k = plan.w.size();
    std::vector<BitWord> heads;
    std::vector<std::pair<std::size_t, std::size_t>> slot;  // (i, pair) of each head
    for (std::size_t q = 0; q < pair_count(k); ++q)
        for (std::size_t i = 0; i < plan.iota; ++i)
            for (const auto& s : plan.v.at(i).at(q)) {
                if (s.size() != plan.ell) throw internal_inconsistency("plan stem off its level");
                heads.push_back(s);
                slot.push_back({i, q});
            }
    const std::size_t A = heads.size();
    for (auto a : plan.tail_order) {
        auto it = plan.anchors.find(a);
        heads.push_back(it == plan.anchors.end() ? BitWord(0) : it->second);
    }
    const std::size_t count = A + k;
    const std::size_t n = plan.ell + count + opt.extra_levels;
    const auto rho = extend_independent(plan.ell, n, count, heads, opt.tails, opt.seed);

    Condition c;
    c.w = plan.w;
    c.n = n;
    c.iota = plan.iota;
    c.eta.assign(k, BitWord(n));
    for (std::size_t t = 0; t < k; ++t) c.eta[c.pos_of(plan.tail_order[t])] = rho[A + t];
    std::vector<std::vector<std::vector<BitWord>>> acc(plan.iota, std::vector<std::vector<BitWord>>(pair_count(k)));
    for (std::size_t a = 0; a < A; ++a) acc[slot[a].first][slot[a].second].push_back(rho[a]);
    c.g.assign(plan.iota, std::vector<WordSet>(pair_count(k)));
    for (std::size_t i = 0; i < plan.iota; ++i)
        for (std::size_t q = 0; q < pair_count(k); ++q) c.g[i][q] = WordSet(n, std::move(acc[i][q]));
    return c;
}

inline void finish(Condition& c) { c.trees = closure_trees(c); }

inline std::vector<Label> sorted_labels(std::vector<Label> w) {
    std::sort(w.begin(), w.end());
    if (std::adjacent_find(w.begin(), w.end()) != w.end()) throw input_error("labels must be distinct");
    return w;
}

}  // namespace detail

/// The starting condition on five labels.
inline Condition genesis(const std::vector<Label>& labels, const IndexedBase& ib, const ConstructOptions& opt = {}) {
    ib.validate();
    if (labels.size() != 5) throw input_error("genesis needs exactly five labels");
    const std::vector<Label> w = detail::sorted_labels(labels);
    const std::size_t iota = ib.initial_iota();
    bool any_per = false;
    for (std::size_t i = 0; i < iota; ++i) any_per = any_per || ib.component(i) == BaseTag::Oper;
    Plan plan;
    plan.w = w;
    plan.iota = iota;
    plan.ell = any_per ? 3 : 2;
    plan.tail_order = w;
    std::size_t cover = 0;
    plan.v.assign(iota, std::vector<WordSet>(pair_count(5)));
    for (std::size_t i = 0; i < iota; ++i) {
        const WordSet s = seed(ib.component(i), plan.ell);
        cover += s.size();
        for (auto& x : plan.v[i]) x = s;
    }
    if (cover < 6)
        throw inapplicable_error("base " + ib.describe() + " offers only " + std::to_string(cover) +
                                 " words per pair; at least 6 are needed");
    Condition c = detail::realize(plan, opt);
    c.M = 10 * iota;
    c.h.assign(iota, std::vector<std::size_t>(pair_count(5)));
    for (std::size_t q = 0; q < pair_count(5); ++q)
        for (std::size_t i = 0; i < iota; ++i) c.h[i][q] = q * iota + i;
    c.r.assign(c.M, c.n);
    detail::finish(c);
    return c;
}

/// A condition below p whose domain also contains beta.
inline Condition add_ordinal(const Condition& p, Label beta, const IndexedBase& ib, const ConstructOptions& opt = {}) {
    ib.validate();
    if (p.contains(beta)) throw input_error("label " + std::to_string(beta) + " is already in w");
    std::vector<Label> w = p.w;
    w.push_back(beta);
    w = detail::sorted_labels(w);
    const std::size_t k = w.size();
    const Label lo = p.w.front(), hi = p.w.back();
    Plan plan;
    plan.w = w;
    plan.iota = p.iota;
    plan.ell = p.n + 1;
    plan.tail_order = p.w;
    plan.tail_order.push_back(beta);
    for (std::size_t a = 0; a < p.w.size(); ++a) plan.anchors[p.w[a]] = p.eta[a];
    plan.v.assign(p.iota, std::vector<WordSet>(pair_count(k)));
    for (std::size_t q = 0; q < pair_count(k); ++q) {
        const auto [a, b] = pair_at(q, k);
        const bool fresh = w[a] == beta || w[b] == beta;
        for (std::size_t i = 0; i < p.iota; ++i)
            plan.v[i][q] = lift(fresh ? p.g_of(i, hi, lo) : p.g_of(i, w[a], w[b]));
    }
    Condition c = detail::realize(plan, opt);
    c.M = p.M + p.iota * p.w.size();
    c.h.assign(p.iota, std::vector<std::size_t>(pair_count(k)));
    for (std::size_t q = 0; q < pair_count(k); ++q) {
        const auto [a, b] = pair_at(q, k);
        for (std::size_t i = 0; i < p.iota; ++i) {
            if (w[a] == beta || w[b] == beta) {
                const Label alpha = w[a] == beta ? w[b] : w[a];
                c.h[i][q] = p.M + p.pos_of(alpha) * p.iota + i;
            } else {
                c.h[i][q] = p.h_of(i, w[a], w[b]);
            }
        }
    }
    c.r = p.r;
    c.r.resize(c.M, c.n);
    detail::finish(c);
    return c;
}

/// A condition below p with one more component; only over an omega base.
inline Condition bump_iota(const Condition& p, const IndexedBase& ib, const ConstructOptions& opt = {}) {
    ib.validate();
    if (!ib.is_omega()) throw inapplicable_error("iota is fixed at i* = " + std::to_string(*ib.istar));
    const std::size_t k = p.w.size();
    Plan plan;
    plan.w = p.w;
    plan.iota = p.iota + 1;
    plan.ell = p.n + 1;
    plan.tail_order = p.w;
    for (std::size_t a = 0; a < k; ++a) plan.anchors[p.w[a]] = p.eta[a];
    plan.v.assign(plan.iota, std::vector<WordSet>(p.pairs()));
    const WordSet fresh = seed(ib.component(p.iota), plan.ell);
    for (std::size_t q = 0; q < p.pairs(); ++q) {
        for (std::size_t i = 0; i < p.iota; ++i) plan.v[i][q] = lift(p.g[i][q]);
        plan.v[p.iota][q] = fresh;
    }
    Condition c = detail::realize(plan, opt);
    c.M = p.M + p.pairs();
    c.h = p.h;
    c.h.emplace_back();
    for (std::size_t q = 0; q < p.pairs(); ++q) c.h.back().push_back(p.M + q);
    c.r = p.r;
    c.r.resize(c.M, c.n);
    detail::finish(c);
    return c;
}

// ---------------------------------------------------------------------------
// Twins and amalgamation

/// p with its labels renamed; labels missing from the map stay fixed. The
/// renaming must keep the order of w.
inline Condition delta_twin(const Condition& p, const std::map<Label, Label>& relabel) {
    Condition c = p;
    for (std::size_t a = 0; a < p.w.size(); ++a) {
        auto it = relabel.find(p.w[a]);
        if (it == relabel.end() || it->second == p.w[a]) continue;
        if (p.contains(it->second))
            throw input_error("label " + std::to_string(p.w[a]) + " is moved onto " + std::to_string(it->second) +
                              ", which is already in w");
        c.w[a] = it->second;
    }
    for (std::size_t a = 1; a < c.w.size(); ++a)
        if (c.w[a - 1] >= c.w[a]) throw input_error("relabelling does not preserve the order of w");
    return c;
}

/// Labels outside the kernel move to their clone-group twin.
inline std::map<Label, Label> twin_map(const Condition& p, const std::vector<Label>& kernel,
                                       const CloneGroupModel& cm) {
    std::map<Label, Label> out;
    for (auto a : p.w) {
        if (std::find(kernel.begin(), kernel.end(), a) != kernel.end()) continue;
        const auto t = cm.twin(a);
        if (!t) throw input_error("label " + std::to_string(a) + " has no twin in the model");
        out[a] = *t;
    }
    return out;
}

/// The demands on a pair of conditions that make them twins over their common labels.
inline Report check_delta(const Condition& p, const Condition& q, const FiniteModel& model,
                          const CatalogOptions& copt = {}) {
    Report rep;
    std::vector<Label> kernel;
    std::set_intersection(p.w.begin(), p.w.end(), q.w.begin(), q.w.end(), std::back_inserter(kernel));
    const std::size_t k = p.w.size();
    if (q.w.size() != k) {
        rep.fail("parameters", "|w| differs");
        return rep;
    }
    bool kernel_ok = true;
    for (std::size_t a = 0; a < k; ++a) {
        const bool in = std::binary_search(kernel.begin(), kernel.end(), p.w[a]);
        if (in && q.w[a] != p.w[a]) {
            rep.fail("kernel", "common label " + std::to_string(p.w[a]) + " is not fixed by the order isomorphism");
            kernel_ok = false;
        }
    }
    if (kernel_ok) rep.pass("kernel", label_text(kernel));
    for (auto a : p.w)
        if (a >= model.size()) throw input_error("label " + std::to_string(a) + " is outside the model");
    for (auto a : q.w)
        if (a >= model.size()) throw input_error("label " + std::to_string(a) + " is outside the model");

    const bool params = p.n == q.n && p.iota == q.iota && p.M == q.M && p.trees == q.trees && p.r == q.r;
    rep.check("parameters", params, "n, iota, M, trees or r differ");

    RankEvaluator ev(model);
    bool rank_ok = true;
    for (OrdSet mask = 1; mask < (OrdSet{1} << k) && rank_ok; ++mask) {
        OrdSet sp = 0, sq = 0;
        for (std::size_t a = 0; a < k; ++a)
            if ((mask >> a) & 1U) {
                sp |= OrdSet{1} << p.w[a];
                sq |= OrdSet{1} << q.w[a];
            }
        const Rank rp = ev.rank(sp), rq = ev.rank(sq);
        std::string why;
        if (rp != rq) why = "rk" + ordset_text(sp) + " = " + rp.str() + " but rk" + ordset_text(sq) + " = " + rq.str();
        else if (!rp.is_infinite()) {
            const auto a = ev.witness(sp), b = ev.witness(sq);
            if (a.zeta != b.zeta || a.k != b.k) why = "witnesses of " + ordset_text(sp) + " and " + ordset_text(sq) + " differ";
        }
        if (!why.empty()) {
            rep.fail("rank transport", why);
            rank_ok = false;
        }
    }
    if (rank_ok) rep.pass("rank transport");
    rep.check("eta transport", p.eta == q.eta, "eta is not carried over by the order isomorphism");
    rep.check("g/h transport", p.g == q.g && p.h == q.h, "g or h is not carried over by the order isomorphism");

    if (params && p.eta == q.eta && p.g == q.g && p.h == q.h) {
        const auto cp = catalog(p, copt), cq = catalog(q, copt);
        bool same = cp.groups.size() == cq.groups.size();
        for (std::size_t x = 0; same && x < cp.groups.size(); ++x) {
            const auto &a = cp.groups[x], &b = cq.groups[x];
            same = a.ell == b.ell && a.pos == b.pos && a.options.size() == b.options.size();
            for (std::size_t y = 0; same && y < a.options.size(); ++y) {
                const auto &x = a.opts(y), &z = b.opts(y);
                same = x.size() == z.size();
                for (std::size_t j = 0; same && j < x.size(); ++j)
                    same = x[j].sigma == z[j].sigma && x[j].trees == z[j].trees;
            }
        }
        rep.check("catalog transport", same, "catalogs differ after relabelling");
    } else {
        rep.fail("catalog transport", "not comparable: the data above differ");
    }

    bool pos_ok = true;
    std::vector<std::size_t> kpos;
    for (std::size_t a = 0; a < k; ++a)
        if (std::binary_search(kernel.begin(), kernel.end(), p.w[a])) kpos.push_back(a);
    for (std::size_t d = 0; d < k && pos_ok; ++d) {
        if (std::binary_search(kernel.begin(), kernel.end(), p.w[d])) continue;
        for (std::size_t mask = 0; mask < (std::size_t{1} << kpos.size()) && pos_ok; ++mask) {
            OrdSet s = OrdSet{1} << p.w[d];
            std::size_t below = 0;
            for (std::size_t j = 0; j < kpos.size(); ++j)
                if ((mask >> j) & 1U) {
                    s |= OrdSet{1} << p.w[kpos[j]];
                    below += p.w[kpos[j]] < p.w[d] ? 1 : 0;
                }
            if (ev.rank(s) != Rank::of(-1)) continue;
            if (ev.witness(s).k == below) {
                rep.fail("kernel positions", "rk" + ordset_text(s) + " = -1 is witnessed at the position of " +
                                                 std::to_string(p.w[d]));
                pos_ok = false;
            }
        }
    }
    if (pos_ok) rep.pass("kernel positions");
    return rep;
}

/// A common extension of twins p and q; throws precondition_error("delta") when
/// they are not twins.
inline Condition amalgamate(const Condition& p, const Condition& q, const IndexedBase& ib, const FiniteModel& model,
                            const ConstructOptions& opt = {}) {
    ib.validate();
    const Report d = check_delta(p, q, model);
    if (!d.ok())
        throw precondition_error("delta", "not twins: " + d.failures().front().clause + ": " + d.failures().front().detail);
    std::vector<Label> D, E, w;  // p-only, q-only, all
    std::set_difference(p.w.begin(), p.w.end(), q.w.begin(), q.w.end(), std::back_inserter(D));
    std::set_difference(q.w.begin(), q.w.end(), p.w.begin(), p.w.end(), std::back_inserter(E));
    std::set_union(p.w.begin(), p.w.end(), q.w.begin(), q.w.end(), std::back_inserter(w));
    const std::size_t k = w.size();
    const auto idx = [](const std::vector<Label>& v, Label a) {
        return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), a) - v.begin());
    };

    Plan plan;
    plan.w = w;
    plan.iota = p.iota;
    plan.ell = p.n + 1;
    plan.tail_order = p.w;
    plan.tail_order.insert(plan.tail_order.end(), E.begin(), E.end());
    for (std::size_t a = 0; a < p.w.size(); ++a) plan.anchors[p.w[a]] = p.eta[a];
    for (auto a : E) plan.anchors[a] = q.eta_of(a);
    plan.v.assign(p.iota, std::vector<WordSet>(pair_count(k)));
    std::vector<std::vector<std::size_t>> h(p.iota, std::vector<std::size_t>(pair_count(k)));
    for (std::size_t x = 0; x < pair_count(k); ++x) {
        const auto [a, b] = pair_at(x, k);
        const Label la = w[a], lb = w[b];
        for (std::size_t i = 0; i < p.iota; ++i) {
            if (p.contains(la) && p.contains(lb)) {
                plan.v[i][x] = lift(p.g_of(i, la, lb));
                h[i][x] = p.h_of(i, la, lb);
            } else if (q.contains(la) && q.contains(lb)) {
                plan.v[i][x] = lift(q.g_of(i, la, lb));
                h[i][x] = q.h_of(i, la, lb);
            } else {
                plan.v[i][x] = seed(ib.component(i), plan.ell);
                const Label from_p = p.contains(la) ? la : lb, from_q = p.contains(la) ? lb : la;
                h[i][x] = p.M + idx(D, from_p) * D.size() + idx(E, from_q);
            }
        }
    }
    Condition c = detail::realize(plan, opt);
    c.M = p.M + D.size() * D.size();
    c.h = std::move(h);
    c.r = p.r;
    c.r.resize(c.M, c.n);
    detail::finish(c);
    return c;
}

}  // namespace forcelab
