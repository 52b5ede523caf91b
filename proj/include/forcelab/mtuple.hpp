#pragma once

// M-tuples over a family of finite trees, their translation action, strict
// extension, restriction, and the finite-depth non-disjointness rank.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bases.hpp"
#include "errors.hpp"
#include "gf2.hpp"
#include "report.hpp"

namespace forcelab {

inline std::size_t pair_count(std::size_t k) noexcept { return k < 2 ? 0 : k * (k - 1) / 2; }

/// Index of the unordered pair {a, b} (a < b) among the pairs of a k-element set,
/// in lexicographic order of (a, b).
inline std::size_t pair_index(std::size_t a, std::size_t b, std::size_t k) {
    if (a > b) std::swap(a, b);
    if (a == b || b >= k) throw input_error("pair index out of range");
    return a * k - a * (a + 1) / 2 + (b - a - 1);
}

/// Inverse of pair_index.
inline std::pair<std::size_t, std::size_t> pair_at(std::size_t p, std::size_t k) {
    for (std::size_t a = 0; a + 1 < k; ++a) {
        const std::size_t row = k - a - 1;
        if (p < row) return {a, a + 1 + p};
        p -= row;
    }
    throw input_error("pair position out of range");
}

/// The six-fold singleton base used by tree catalogs.
inline const IndexedBase& six_singletons() {
    static const IndexedBase ib = IndexedBase::finite(6, BaseTag::O0);
    return ib;
}

/// (ell, iota, u, h, g). Symmetric maps on u<2> are stored once per unordered pair
/// of positions in the sorted u: h[i][pair_index(a, b, |u|)].
struct MTuple {
    std::size_t ell = 0;
    std::size_t iota = 0;
    WordSet u;
    std::vector<std::vector<std::size_t>> h;
    std::vector<std::vector<WordSet>> g;

    std::size_t pairs() const noexcept { return pair_count(u.size()); }

    std::size_t pair(const BitWord& eta, const BitWord& nu) const {
        auto a = u.index_of(eta), b = u.index_of(nu);
        if (!a || !b || *a == *b) throw input_error("not a pair of distinct nodes of u");
        return pair_index(*a, *b, u.size());
    }

    const WordSet& g_of(std::size_t i, const BitWord& eta, const BitWord& nu) const { return g.at(i).at(pair(eta, nu)); }
    std::size_t h_of(std::size_t i, const BitWord& eta, const BitWord& nu) const { return h.at(i).at(pair(eta, nu)); }

    bool well_shaped() const {
        if (h.size() != iota || g.size() != iota) return false;
        for (std::size_t i = 0; i < iota; ++i)
            if (h[i].size() != pairs() || g[i].size() != pairs()) return false;
        return true;
    }

    // Canonical text: ell, u, iota, then each pair's (h, g) per component.
    std::string key() const {
        std::string s = std::to_string(ell) + "|";
        for (const auto& x : u) s += x.str() + ",";
        s += "|" + std::to_string(iota);
        for (std::size_t i = 0; i < h.size(); ++i) {
            s += "|";
            for (std::size_t p = 0; p < h[i].size(); ++p) {
                s += std::to_string(h[i][p]) + ":";
                if (i < g.size() && p < g[i].size())
                    for (const auto& x : g[i][p]) s += x.str() + ".";
                s += ";";
            }
        }
        return s;
    }

    friend bool operator==(const MTuple&, const MTuple&) = default;
};

/// Canonical order: level, then u, then iota, h and g.
inline bool canonical_less(const MTuple& a, const MTuple& b) {
    if (a.ell != b.ell) return a.ell < b.ell;
    if (a.u != b.u) return a.u < b.u;
    if (a.iota != b.iota) return a.iota < b.iota;
    if (a.h != b.h) return a.h < b.h;
    return a.g < b.g;
}

struct CatalogBounds {
    std::size_t max_u = 6;
    std::size_t max_g = 4;
    std::size_t max_iota = 6;  // only used when i* is omega
    unsigned long long budget = 5000000ULL;
};

/// Finite trees t_0..t_{M-1} of a common depth n, an indexed base, and search bounds.
struct Catalog {
    std::vector<FiniteTree> trees;
    std::size_t depth = 0;
    IndexedBase ib = six_singletons();
    CatalogBounds bounds{};

    std::size_t M() const noexcept { return trees.size(); }

    Report validate() const {
        Report rep;
        for (std::size_t m = 0; m < trees.size(); ++m)
            rep.check("depth", trees[m].depth() == depth,
                      "tree " + std::to_string(m) + " has depth " + std::to_string(trees[m].depth()));
        try {
            ib.validate();
            rep.pass("base");
        } catch (const input_error& e) {
            rep.fail("base", e.what());
        }
        return rep;
    }

    // Allowed iota values.
    std::pair<std::size_t, std::size_t> iota_range() const {
        if (ib.istar) return {*ib.istar, *ib.istar};
        return {3, std::max<std::size_t>(3, bounds.max_iota)};
    }
};

inline Report validate_mtuple(const MTuple& m, const Catalog& cat) {
    Report rep;
    const std::size_t k = m.u.size();
    bool a_ok = m.ell > 0 && k >= 2 && m.u.len() == m.ell;
    std::string a_detail;
    if (!a_ok) a_detail = "need ell > 0, |u| >= 2 and u at length ell";
    if (cat.ib.istar && m.iota != *cat.ib.istar) {
        a_ok = false;
        a_detail = "iota " + std::to_string(m.iota) + " differs from i* " + std::to_string(*cat.ib.istar);
    }
    if (!cat.ib.istar && m.iota < 3) {
        a_ok = false;
        a_detail = "iota below 3 over an omega base";
    }
    rep.check("(a)", a_ok, a_detail);
    rep.check("depth", m.ell <= cat.depth,
              "level " + std::to_string(m.ell) + " exceeds depth " + std::to_string(cat.depth));

    bool shape_g = m.g.size() == m.iota, shape_h = m.h.size() == m.iota;
    for (std::size_t i = 0; i < m.iota; ++i) {
        shape_g = shape_g && i < m.g.size() && m.g[i].size() == m.pairs();
        shape_h = shape_h && i < m.h.size() && m.h[i].size() == m.pairs();
    }
    if (!shape_h) rep.fail("(d)", "h needs iota maps over all pairs");
    else rep.pass("(d)");
    if (!shape_g) {
        rep.fail("(b)", "g needs iota maps over all pairs");
        return rep;
    }
    if (!a_ok) return rep;

    for (std::size_t i = 0; i < m.iota; ++i) {
        const BaseTag tag = cat.ib.component(i);
        for (std::size_t p = 0; p < m.pairs(); ++p) {
            const WordSet& s = m.g[i][p];
            const bool ok = s.len() == m.ell && base_member(tag, s);
            rep.check("(b)", ok, "g_" + std::to_string(i) + " on pair " + std::to_string(p) + " is not a level-" +
                                     std::to_string(m.ell) + " member of " + to_string(tag));
        }
    }
    for (std::size_t p = 0; p < m.pairs(); ++p)
        for (std::size_t i = 0; i < m.iota; ++i)
            for (std::size_t j = i + 1; j < m.iota; ++j)
                rep.check("(c)", m.g[i][p].disjoint_from(m.g[j][p]),
                          "g_" + std::to_string(i) + " and g_" + std::to_string(j) + " meet on pair " +
                              std::to_string(p));
    if (!shape_h) return rep;

    for (std::size_t p = 0; p < m.pairs(); ++p) {
        const auto [a, b] = pair_at(p, k);
        for (std::size_t i = 0; i < m.iota; ++i) {
            const std::size_t t = m.h[i][p];
            if (t >= cat.M()) {
                rep.fail("range", "h_" + std::to_string(i) + " on pair " + std::to_string(p) + " is " +
                                      std::to_string(t) + ", not below " + std::to_string(cat.M()));
                continue;
            }
            rep.pass("range");
            for (const auto& sigma : m.g[i][p]) {
                if (sigma.size() != m.ell) continue;
                const bool in = cat.trees[t].contains(m.u[a] + sigma) && cat.trees[t].contains(m.u[b] + sigma);
                rep.check("(e)", in, "sigma " + sigma.str() + " of g_" + std::to_string(i) + " on {" + m.u[a].str() +
                                         "," + m.u[b].str() + "} leaves t_" + std::to_string(t));
            }
        }
    }
    for (const char* c : {"(b)", "(c)", "(e)", "range"})
        if (rep.ok(c)) rep.pass(c);
    return rep;
}

/// m + rho; a longer rho is restricted to the level of m first.
inline MTuple translate_m(const MTuple& m, const BitWord& rho_in) {
    if (rho_in.size() < m.ell) throw input_error("translation vector shorter than the tuple level");
    const BitWord rho = rho_in.prefix(m.ell);
    MTuple out;
    out.ell = m.ell;
    out.iota = m.iota;
    out.u = m.u.translate(rho);
    const std::size_t k = m.u.size();
    std::vector<std::size_t> pos(k);
    for (std::size_t a = 0; a < k; ++a) pos[a] = *out.u.index_of(m.u[a] + rho);
    out.h.assign(m.h.size(), std::vector<std::size_t>(m.pairs()));
    out.g.assign(m.g.size(), std::vector<WordSet>(m.pairs()));
    for (std::size_t p = 0; p < m.pairs(); ++p) {
        const auto [a, b] = pair_at(p, k);
        const std::size_t q = pair_index(pos[a], pos[b], k);
        for (std::size_t i = 0; i < m.h.size(); ++i) out.h[i][q] = m.h[i][p];
        for (std::size_t i = 0; i < m.g.size(); ++i) out.g[i][q] = m.g[i][p].translate(rho);
    }
    return out;
}

/// Strict extension m ⊏ n, with the order of each component taken from `ib`.
inline bool extends(const MTuple& m, const MTuple& n, const IndexedBase& ib = six_singletons()) {
    if (!m.well_shaped() || !n.well_shaped()) return false;
    if (m.ell >= n.ell || m.iota > n.iota) return false;
    if (n.u.len() != n.ell || m.u.len() != m.ell) return false;
    const std::size_t k = n.u.size();
    std::vector<std::size_t> below(k);
    std::vector<char> hit(m.u.size(), 0);
    for (std::size_t a = 0; a < k; ++a) {
        const auto idx = m.u.index_of(n.u[a].prefix(m.ell));
        if (!idx) return false;
        below[a] = *idx;
        hit[*idx] = 1;
    }
    if (std::find(hit.begin(), hit.end(), 0) != hit.end()) return false;
    for (std::size_t p = 0; p < n.pairs(); ++p) {
        const auto [a, b] = pair_at(p, k);
        if (below[a] == below[b]) continue;
        const std::size_t q = pair_index(below[a], below[b], m.u.size());
        for (std::size_t i = 0; i < m.iota; ++i) {
            if (m.h[i][q] != n.h[i][p]) return false;
            if (!base_prec(ib.component(i), m.g[i][q], n.g[i][p])) return false;
        }
    }
    return true;
}

/// m restricted to a subset u' of its nodes.
inline MTuple restrict_m(const MTuple& m, const WordSet& sub) {
    if (sub.size() < 2) throw precondition_error("size", "restriction needs at least two nodes");
    if (sub.len() != m.ell || !sub.subset_of(m.u))
        throw precondition_error("subset", "restriction nodes are not a subset of u");
    MTuple out;
    out.ell = m.ell;
    out.iota = m.iota;
    out.u = sub;
    const std::size_t k = sub.size();
    std::vector<std::size_t> pos(k);
    for (std::size_t a = 0; a < k; ++a) pos[a] = *m.u.index_of(sub[a]);
    out.h.assign(m.h.size(), std::vector<std::size_t>(pair_count(k)));
    out.g.assign(m.g.size(), std::vector<WordSet>(pair_count(k)));
    for (std::size_t q = 0; q < pair_count(k); ++q) {
        const auto [a, b] = pair_at(q, k);
        const std::size_t p = pair_index(pos[a], pos[b], m.u.size());
        for (std::size_t i = 0; i < m.h.size(); ++i) out.h[i][q] = m.h[i][p];
        for (std::size_t i = 0; i < m.g.size(); ++i) out.g[i][q] = m.g[i][p];
    }
    return out;
}

namespace detail {

// Calls f on every subset of `pool` (kept in order) whose size lies in [lo, hi].
template <class F>
void for_each_subset(const std::vector<BitWord>& pool, std::size_t lo, std::size_t hi, std::size_t len, F&& f) {
    std::vector<BitWord> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (cur.size() >= lo && cur.size() <= hi) f(WordSet(len, cur));
        if (cur.size() == hi) return;
        for (std::size_t j = start; j < pool.size(); ++j) {
            cur.push_back(pool[j]);
            rec(j + 1);
            cur.pop_back();
        }
    };
    rec(0);
}

}  // namespace detail

/// Enumeration and rank search over a catalog. Level sets of the trees are cached.
class MCatalogSearch {
public:
    struct Option {
        std::size_t h;
        WordSet g;
    };
    // One choice of (h_i, g_i) for i < iota on a single pair.
    using Assignment = std::vector<Option>;

    explicit MCatalogSearch(const Catalog& cat)
        : cat_(cat), budget_(cat.bounds.budget), levels_(cat.M()) {
        const Report rep = cat.validate();
        if (!rep.ok()) throw input_error("malformed catalog: " + rep.failures().front().detail);
        for (std::size_t t = 0; t < cat.M(); ++t)
            for (std::size_t l = 0; l <= cat.depth; ++l) levels_[t].push_back(cat.trees[t].level(l));
    }

    const Catalog& catalog() const noexcept { return cat_; }
    const Budget& budget() const noexcept { return budget_; }

    /// sigma at level l with eta+sigma and nu+sigma both in t_t.
    std::vector<BitWord> common_translates(std::size_t t, const BitWord& eta, const BitWord& nu) const {
        const WordSet& L = levels_[t][eta.size()];
        std::vector<BitWord> out;
        for (const auto& x : L) {
            BitWord sigma = eta + x;
            if (L.contains(nu + sigma)) out.push_back(std::move(sigma));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// All (h, g) for component i on the pair (eta, nu) with no constraint from below.
    std::vector<Option> free_options(std::size_t i, const BitWord& eta, const BitWord& nu) {
        const BaseTag tag = cat_.ib.component(i);
        std::vector<Option> out;
        for (std::size_t t = 0; t < cat_.M(); ++t) {
            const auto pool = common_translates(t, eta, nu);
            const std::size_t lo = tag == BaseTag::O0 ? 1 : 3;
            const std::size_t hi = tag == BaseTag::O0 ? 1 : cat_.bounds.max_g;
            detail::for_each_subset(pool, lo, std::min(hi, cat_.bounds.max_g), eta.size(), [&](WordSet s) {
                budget_.spend(1, "catalog enumeration");
                out.push_back({t, std::move(s)});
            });
        }
        return out;
    }

    /// (h, g) for component i on (eta, nu) with h fixed and g above `below` in the order of O_i.
    std::vector<Option> extension_options(std::size_t i, std::size_t t, const WordSet& below, const BitWord& eta,
                                          const BitWord& nu) {
        const BaseTag tag = cat_.ib.component(i);
        std::vector<Option> out;
        if (t >= cat_.M()) return out;
        std::vector<BitWord> pool;
        for (auto& s : common_translates(t, eta, nu))
            if (below.contains(s.prefix(below.len()))) pool.push_back(std::move(s));
        const std::size_t lo = tag == BaseTag::O0 ? 1 : 3;
        const std::size_t hi = tag == BaseTag::O0 ? 1 : cat_.bounds.max_g;
        detail::for_each_subset(pool, lo, std::min(hi, cat_.bounds.max_g), eta.size(), [&](WordSet s) {
            budget_.spend(1, "catalog enumeration");
            if (base_prec(tag, below, s)) out.push_back({t, std::move(s)});
        });
        return out;
    }

    /// Per-component options combined with pairwise disjoint g.
    std::vector<Assignment> assignments(const std::vector<std::vector<Option>>& per_component) {
        std::vector<Assignment> out;
        Assignment cur;
        std::function<void(std::size_t)> rec = [&](std::size_t i) {
            if (i == per_component.size()) {
                budget_.spend(1, "catalog enumeration");
                out.push_back(cur);
                return;
            }
            for (const auto& o : per_component[i]) {
                bool clash = false;
                for (const auto& prev : cur) clash = clash || !prev.g.disjoint_from(o.g);
                if (clash) continue;
                cur.push_back(o);
                rec(i + 1);
                cur.pop_back();
            }
        };
        rec(0);
        return out;
    }

    /// Calls f(tuple) for each combination of per-pair assignments; f returns true to stop.
    /// Returns true if stopped.
    template <class F>
    bool for_each_tuple(std::size_t ell, std::size_t iota, const WordSet& u,
                        const std::vector<std::vector<Assignment>>& per_pair, F&& f) {
        for (const auto& opts : per_pair)
            if (opts.empty()) return false;
        MTuple m;
        m.ell = ell;
        m.iota = iota;
        m.u = u;
        m.h.assign(iota, std::vector<std::size_t>(per_pair.size()));
        m.g.assign(iota, std::vector<WordSet>(per_pair.size()));
        std::function<bool(std::size_t)> rec = [&](std::size_t p) -> bool {
            if (p == per_pair.size()) {
                budget_.spend(1, "catalog enumeration");
                return f(static_cast<const MTuple&>(m));
            }
            for (const auto& asg : per_pair[p]) {
                for (std::size_t i = 0; i < iota; ++i) {
                    m.h[i][p] = asg[i].h;
                    m.g[i][p] = asg[i].g;
                }
                if (rec(p + 1)) return true;
            }
            return false;
        };
        return rec(0);
    }

    /// Every valid tuple within the bounds, in canonical order.
    std::vector<MTuple> enumerate() {
        std::vector<MTuple> out;
        const auto [ilo, ihi] = cat_.iota_range();
        for (std::size_t l = 1; l <= cat_.depth; ++l) {
            if (l > 20) throw capacity_error("catalog enumeration is limited to level 20");
            const auto words = all_words(l);
            std::vector<BitWord> cur;
            std::vector<WordSet> us;
            std::function<void(std::size_t)> rec = [&](std::size_t start) {
                if (cur.size() >= 2) us.emplace_back(l, cur);
                if (cur.size() == cat_.bounds.max_u) return;
                for (std::size_t j = start; j < words.size(); ++j) {
                    budget_.spend(1, "catalog enumeration");
                    cur.push_back(words[j]);
                    rec(j + 1);
                    cur.pop_back();
                }
            };
            rec(0);
            std::sort(us.begin(), us.end());
            for (const auto& u : us)
                for (std::size_t iota = ilo; iota <= ihi; ++iota) {
                    std::vector<std::vector<Assignment>> per_pair;
                    for (std::size_t p = 0; p < pair_count(u.size()); ++p) {
                        const auto [a, b] = pair_at(p, u.size());
                        std::vector<std::vector<Option>> comps;
                        for (std::size_t i = 0; i < iota; ++i) comps.push_back(free_options(i, u[a], u[b]));
                        per_pair.push_back(assignments(comps));
                        if (per_pair.back().empty()) break;
                    }
                    if (per_pair.size() < pair_count(u.size())) continue;
                    for_each_tuple(l, iota, u, per_pair, [&](const MTuple& m) {
                        out.push_back(m);
                        return false;
                    });
                }
        }
        return out;
    }

    /// Strict extensions n of m with |u^n| = |u^m| + 1, two nodes of u^n above
    /// u^m[split] and one above every other node, in canonical order. f returns true to stop.
    template <class F>
    bool for_each_splitting_extension(const MTuple& m, std::size_t split, F&& f) {
        const std::size_t k = m.u.size();
        if (k + 1 > cat_.bounds.max_u) return false;
        const auto [ilo, ihi] = cat_.iota_range();
        for (std::size_t l2 = m.ell + 1; l2 <= cat_.depth; ++l2) {
            const std::size_t d = l2 - m.ell;
            if (d > 20) throw capacity_error("extension gap above 20 levels");
            const auto tails = all_words(d);
            std::vector<WordSet> us;
            // Nodes are chosen position by position; cross pairs are checked for at least
            // one admissible extension as soon as both ends are present.
            std::vector<BitWord> chosen;
            std::vector<std::size_t> owner;
            auto cross_ok = [&](std::size_t last) {
                for (std::size_t j = 0; j < last; ++j) {
                    if (owner[j] == owner[last]) continue;
                    const std::size_t q = pair_index(owner[j], owner[last], k);
                    for (std::size_t i = 0; i < m.iota; ++i)
                        if (extension_options(i, m.h[i][q], m.g[i][q], chosen[j], chosen[last]).empty()) return false;
                }
                return true;
            };
            std::function<void(std::size_t)> rec = [&](std::size_t a) {
                if (a == k) {
                    us.emplace_back(l2, chosen);
                    return;
                }
                const std::size_t copies = a == split ? 2 : 1;
                if (copies == 1) {
                    for (const auto& t : tails) {
                        chosen.push_back(m.u[a].concat(t));
                        owner.push_back(a);
                        if (cross_ok(chosen.size() - 1)) rec(a + 1);
                        chosen.pop_back();
                        owner.pop_back();
                    }
                    return;
                }
                for (std::size_t x = 0; x < tails.size(); ++x)
                    for (std::size_t y = x + 1; y < tails.size(); ++y) {
                        chosen.push_back(m.u[a].concat(tails[x]));
                        owner.push_back(a);
                        if (cross_ok(chosen.size() - 1)) {
                            chosen.push_back(m.u[a].concat(tails[y]));
                            owner.push_back(a);
                            if (cross_ok(chosen.size() - 1)) rec(a + 1);
                            chosen.pop_back();
                            owner.pop_back();
                        }
                        chosen.pop_back();
                        owner.pop_back();
                    }
            };
            rec(0);
            std::sort(us.begin(), us.end());
            for (const auto& un : us) {
                const std::size_t kn = un.size();
                std::vector<std::size_t> below(kn);
                for (std::size_t a = 0; a < kn; ++a) below[a] = *m.u.index_of(un[a].prefix(m.ell));
                const std::size_t iota_lo = cat_.ib.istar ? ilo : std::max(ilo, m.iota + 1);
                for (std::size_t iota = iota_lo; iota <= ihi; ++iota) {
                    if (iota < m.iota) continue;
                    std::vector<std::vector<Assignment>> per_pair;
                    bool dead = false;
                    for (std::size_t p = 0; p < pair_count(kn) && !dead; ++p) {
                        const auto [a, b] = pair_at(p, kn);
                        std::vector<std::vector<Option>> comps;
                        for (std::size_t i = 0; i < iota; ++i) {
                            if (below[a] != below[b] && i < m.iota) {
                                const std::size_t q = pair_index(below[a], below[b], k);
                                comps.push_back(extension_options(i, m.h[i][q], m.g[i][q], un[a], un[b]));
                            } else {
                                comps.push_back(free_options(i, un[a], un[b]));
                            }
                        }
                        per_pair.push_back(assignments(comps));
                        dead = per_pair.back().empty();
                    }
                    if (dead) continue;
                    if (for_each_tuple(l2, iota, un, per_pair, f)) return true;
                }
            }
        }
        return false;
    }

    /// Finite-depth rank. A witness for m and a node nu may be restricted to one node
    /// above each other node of u^m and two above nu without lowering its rank, so
    /// only such witnesses are searched.
    std::size_t ndrk(const MTuple& m) {
        const std::string key = m.key();
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        ++evaluations_;
        budget_.spend(1, "ndrk");
        std::size_t best = upper_bound(m);
        for (std::size_t v = 0; v < m.u.size() && best > 0; ++v) {
            std::size_t found = 0;
            bool any = false;
            for_each_splitting_extension(m, v, [&](const MTuple& n) {
                any = true;
                found = std::max(found, 1 + ndrk(n));
                return found >= best;
            });
            best = any ? std::min(best, found) : 0;
        }
        memo_.emplace(key, best);
        return best;
    }

    /// ndrk can never exceed the room left in depth, node count, and (omega) iota.
    std::size_t upper_bound(const MTuple& m) const {
        std::size_t ub = cat_.depth > m.ell ? cat_.depth - m.ell : 0;
        ub = std::min(ub, cat_.bounds.max_u > m.u.size() ? cat_.bounds.max_u - m.u.size() : 0);
        if (!cat_.ib.istar) {
            const std::size_t hi = cat_.iota_range().second;
            ub = std::min(ub, hi > m.iota ? hi - m.iota : 0);
        }
        return ub;
    }

    std::size_t memo_size() const noexcept { return memo_.size(); }
    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    const Catalog& cat_;
    Budget budget_;
    std::vector<std::vector<WordSet>> levels_;
    std::unordered_map<std::string, std::size_t> memo_;
    std::size_t evaluations_ = 0;
};

inline std::size_t ndrk(const MTuple& m, const Catalog& cat) {
    const Report rep = validate_mtuple(m, cat);
    if (!rep.ok()) throw precondition_error("valid", "tuple is not in the catalog: " + rep.failures().front().detail);
    MCatalogSearch s(cat);
    return s.ndrk(m);
}

/// D_0 ⊇ D_1 ⊇ ... over the enumerated catalog. stages[k] holds indices into
/// `tuples` (canonical order); the last stage is empty.
struct DerivativeChain {
    std::vector<MTuple> tuples;
    std::vector<std::vector<std::size_t>> stages;

    std::size_t nonempty_stages() const {
        std::size_t c = 0;
        for (const auto& s : stages) c += s.empty() ? 0 : 1;
        return c;
    }
    // Largest k with tuples[idx] in D_k.
    std::size_t rank_of(std::size_t idx) const {
        std::size_t r = 0;
        for (std::size_t k = 0; k < stages.size(); ++k)
            if (std::binary_search(stages[k].begin(), stages[k].end(), idx)) r = k;
        return r;
    }
};

inline DerivativeChain derivative_chain(const Catalog& cat) {
    MCatalogSearch search(cat);
    DerivativeChain ch;
    ch.tuples = search.enumerate();
    const std::size_t N = ch.tuples.size();

    // Index tuples by (level below, restricted u) to find extension candidates.
    std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>> by_shadow;
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t l = 1; l < ch.tuples[j].ell; ++l) {
            std::string key;
            for (const auto& x : ch.tuples[j].u.restrict(l)) key += x.str() + ",";
            by_shadow[{l, key}].push_back(j);
        }

    struct Edge {
        std::size_t to;
        std::uint64_t splits;  // bit v: two nodes of u^n above u^m[v]
    };
    std::vector<std::vector<Edge>> succ(N);
    Budget budget(cat.bounds.budget);
    for (std::size_t j = 0; j < N; ++j) {
        const MTuple& m = ch.tuples[j];
        std::string key;
        for (const auto& x : m.u) key += x.str() + ",";
        auto it = by_shadow.find({m.ell, key});
        if (it == by_shadow.end()) continue;
        for (std::size_t t : it->second) {
            budget.spend(1, "derivative chain");
            const MTuple& n = ch.tuples[t];
            if (!cat.ib.istar && !(m.iota < n.iota)) continue;
            if (!extends(m, n, cat.ib)) continue;
            std::vector<std::size_t> count(m.u.size(), 0);
            for (const auto& eta : n.u) ++count[*m.u.index_of(eta.prefix(m.ell))];
            std::uint64_t mask = 0;
            for (std::size_t v = 0; v < count.size(); ++v)
                if (count[v] >= 2) mask |= std::uint64_t{1} << v;
            if (mask) succ[j].push_back({t, mask});
        }
    }

    std::vector<char> in(N, 1);
    std::vector<std::size_t> stage(N);
    for (std::size_t j = 0; j < N; ++j) stage[j] = j;
    ch.stages.push_back(stage);
    while (!ch.stages.back().empty()) {
        std::vector<char> next(N, 0);
        std::vector<std::size_t> members;
        for (std::size_t j : ch.stages.back()) {
            const std::uint64_t need = (std::uint64_t{1} << ch.tuples[j].u.size()) - 1;
            std::uint64_t have = 0;
            for (const auto& e : succ[j])
                if (in[e.to]) have |= e.splits;
            if ((have & need) == need) {
                next[j] = 1;
                members.push_back(j);
            }
        }
        if (members == ch.stages.back()) break;  // fixpoint
        in = std::move(next);
        ch.stages.push_back(std::move(members));
    }
    return ch;
}

}  // namespace forcelab
