#pragma once

// Reference implementations used only by the tests. They share the library's
// value types but none of its algorithms.

#include <forcelab/mtuple.hpp>
#include <forcelab/splitrank.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Splitting rank straight from the staged definition: rank >= delta is decided
// by recursion on delta with no memo table.
class StagedRank {
public:
    struct Rel {
        std::size_t zeta, arity;
        std::set<std::vector<std::size_t>> tuples;
    };

    explicit StagedRank(const forcelab::FiniteModel& m) : n_(m.size()), theta_(m.theta()) {
        for (const auto& r : m.relations()) {
            Rel x{r.zeta, r.arity, {}};
            for (auto& t : r.tuples()) x.tuples.insert(t);
            rels_.push_back(std::move(x));
        }
    }

    // -1, a value >= 0, or `infinite` (returned as a large sentinel).
    static constexpr int infinite = 1 << 20;

    int rank(const std::vector<std::size_t>& w) const {
        if (!geq(w, 0)) return -1;
        const int top = static_cast<int>(n_ - w.size()) + 1;
        for (int d = 1; d <= top; ++d)
            if (!geq(w, d)) return d - 1;
        return infinite;
    }

    bool geq(const std::vector<std::size_t>& w, int delta) const {
        for (const auto& R : rels_) {
            if (R.arity != w.size() || !R.tuples.count(w)) continue;
            for (std::size_t k = 0; k < w.size(); ++k) {
                std::size_t count = 0;
                for (std::size_t a = 0; a < n_; ++a) {
                    auto t = w;
                    t[k] = a;
                    if (R.tuples.count(t)) ++count;
                }
                if (count < theta_) return false;
            }
        }
        if (delta == 0) return true;
        for (const auto& R : rels_) {
            if (R.arity != w.size() || !R.tuples.count(w)) continue;
            for (std::size_t k = 0; k < w.size(); ++k) {
                bool found = false;
                for (std::size_t a = 0; a < n_ && !found; ++a) {
                    if (std::find(w.begin(), w.end(), a) != w.end()) continue;
                    auto t = w;
                    t[k] = a;
                    if (!R.tuples.count(t)) continue;
                    auto bigger = w;
                    bigger.push_back(a);
                    std::sort(bigger.begin(), bigger.end());
                    found = geq(bigger, delta - 1);
                }
                if (!found) return false;
            }
        }
        return true;
    }

private:
    std::size_t n_, theta_;
    std::vector<Rel> rels_;
};

inline int as_int(const forcelab::Rank& r) { return r.is_infinite() ? StagedRank::infinite : r.value(); }

// Random model with at most `max_rels` relations of arity <= 3 over N elements;
// tuples are drawn increasing so the model is well formed.
inline forcelab::FiniteModel random_model(forcelab::Rng& rng, std::size_t N, std::size_t max_rels, std::size_t theta) {
    std::vector<forcelab::FiniteModel::RelationSpec> rels;
    const std::size_t count = static_cast<std::size_t>(rng.range(0, static_cast<long long>(max_rels)));
    std::vector<std::size_t> next_zeta(5, 0);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t arity = static_cast<std::size_t>(rng.range(1, std::min<long long>(3, N)));
        forcelab::FiniteModel::RelationSpec spec{next_zeta[arity]++, arity, {}};
        const std::size_t density = static_cast<std::size_t>(rng.range(1, 7));
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << N); ++mask) {
            if (static_cast<std::size_t>(std::popcount(mask)) != arity) continue;
            if (rng.below(8) < density) spec.tuples.push_back(forcelab::elements_of(mask));
        }
        rels.push_back(std::move(spec));
    }
    return forcelab::FiniteModel(N, theta, rels);
}

// Non-disjointness rank straight from the derivative definition, for catalogs
// whose components are all the singleton base and whose iota is fixed. Witnesses
// of every size are searched; membership in D_k is memoized per (tuple, k).
class DerivativeOracle {
public:
    DerivativeOracle(const std::vector<forcelab::FiniteTree>& trees, std::size_t depth, std::size_t iota,
                     std::size_t max_u)
        : depth_(depth), iota_(iota), max_u_(max_u) {
        for (const auto& t : trees) {
            std::set<std::string> nodes;
            for (const auto& top : t.top())
                for (std::size_t l = 0; l <= depth; ++l) nodes.insert(top.str().substr(0, l));
            nodes_.push_back(std::move(nodes));
        }
    }

    bool in_tree(std::size_t t, const forcelab::BitWord& x) const { return nodes_[t].count(x.str()) > 0; }

    // Every tuple of the catalog, straight from the definition.
    std::vector<forcelab::MTuple> all() const {
        std::vector<forcelab::MTuple> out;
        for (std::size_t l = 1; l <= depth_; ++l)
            for (const auto& u : subsets(l))
                product(l, u, [](const forcelab::MTuple&, std::size_t, std::size_t) { return true; },
                        [&](const forcelab::MTuple& m) {
                            out.push_back(m);
                            return false;
                        });
        return out;
    }

    bool extends(const forcelab::MTuple& m, const forcelab::MTuple& n) const {
        if (m.ell >= n.ell) return false;
        std::set<std::string> shadow;
        for (const auto& x : n.u) shadow.insert(x.str().substr(0, m.ell));
        std::set<std::string> mine;
        for (const auto& x : m.u) mine.insert(x.str());
        if (shadow != mine) return false;
        for (std::size_t a = 0; a < n.u.size(); ++a)
            for (std::size_t b = a + 1; b < n.u.size(); ++b) {
                const auto ra = n.u[a].prefix(m.ell), rb = n.u[b].prefix(m.ell);
                if (ra == rb) continue;
                for (std::size_t i = 0; i < iota_; ++i) {
                    if (m.h_of(i, ra, rb) != n.h_of(i, n.u[a], n.u[b])) return false;
                    const auto& gm = m.g_of(i, ra, rb);
                    const auto& gn = n.g_of(i, n.u[a], n.u[b]);
                    if (gm.size() != 1 || gn.size() != 1) return false;
                    if (gn[0].str().substr(0, m.ell) != gm[0].str()) return false;
                }
            }
        return true;
    }

    bool in_D(const forcelab::MTuple& m, std::size_t k) {
        if (k == 0) return true;
        const auto key = std::make_pair(m.key(), k);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        bool all_nodes = true;
        for (std::size_t v = 0; v < m.u.size() && all_nodes; ++v) {
            bool found = false;
            for (std::size_t l = m.ell + 1; l <= depth_ && !found; ++l)
                for (const auto& u : subsets(l)) {
                    if (found) break;
                    if (!(u.restrict(m.ell) == m.u)) continue;
                    std::size_t above = 0;
                    for (const auto& x : u) above += m.u[v].is_prefix_of(x) ? 1 : 0;
                    if (above < 2) continue;
                    product(
                        l, u,
                        [&](const forcelab::MTuple& n, std::size_t a, std::size_t b) {
                            // Local part of the extension clause for the pair just filled.
                            const auto ra = n.u[a].prefix(m.ell), rb = n.u[b].prefix(m.ell);
                            if (!m.u.contains(ra) || !m.u.contains(rb)) return false;
                            if (ra == rb) return true;
                            for (std::size_t i = 0; i < iota_; ++i) {
                                if (m.h_of(i, ra, rb) != n.h_of(i, n.u[a], n.u[b])) return false;
                                if (!m.g_of(i, ra, rb)[0].is_prefix_of(n.g_of(i, n.u[a], n.u[b])[0])) return false;
                            }
                            return true;
                        },
                        [&](const forcelab::MTuple& n) {
                            if (extends(m, n) && in_D(n, k - 1)) found = true;
                            return found;
                        });
                }
            all_nodes = found;
        }
        memo_[key] = all_nodes;
        return all_nodes;
    }

    std::size_t rank(const forcelab::MTuple& m) {
        std::size_t k = 0;
        while (in_D(m, k + 1)) ++k;
        return k;
    }

private:
    const std::vector<forcelab::WordSet>& subsets(std::size_t l) const {
        auto& out = subsets_[l];
        if (!out.empty()) return out;
        const std::uint64_t words = std::uint64_t{1} << l;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << words); ++mask) {
            const auto c = static_cast<std::size_t>(std::popcount(mask));
            if (c < 2 || c > max_u_) continue;
            std::vector<forcelab::BitWord> u;
            for (std::uint64_t x = 0; x < words; ++x)
                if ((mask >> x) & 1U) u.push_back(forcelab::BitWord::from_u64(l, x));
            out.emplace_back(l, u);
        }
        return out;
    }

    // All valid tuples on u: every (h_i, {sigma_i}) per pair, pairwise distinct sigma
    // per pair, each checked against the trees. `keep(n, a, b)` filters a filled pair;
    // `emit(n)` returns true to stop.
    template <class Keep, class Emit>
    bool product(std::size_t l, const forcelab::WordSet& u, Keep&& keep, Emit&& emit) const {
        forcelab::MTuple n;
        n.ell = l;
        n.iota = iota_;
        n.u = u;
        const std::size_t k = u.size(), P = k * (k - 1) / 2;
        n.h.assign(iota_, std::vector<std::size_t>(P));
        n.g.assign(iota_, std::vector<forcelab::WordSet>(P));
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a + 1; b < k; ++b) pairs.push_back({a, b});
        const std::uint64_t words = std::uint64_t{1} << l;
        std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t p, std::size_t i) -> bool {
            if (p == P) return emit(static_cast<const forcelab::MTuple&>(n));
            if (i == iota_) return keep(static_cast<const forcelab::MTuple&>(n), pairs[p].first, pairs[p].second) &&
                                   rec(p + 1, 0);
            const auto& eta = u[pairs[p].first];
            const auto& nu = u[pairs[p].second];
            for (std::size_t t = 0; t < nodes_.size(); ++t)
                for (std::uint64_t s = 0; s < words; ++s) {
                    const auto sigma = forcelab::BitWord::from_u64(l, s);
                    bool clash = false;
                    for (std::size_t j = 0; j < i; ++j) clash = clash || n.g[j][p][0] == sigma;
                    if (clash || !in_tree(t, eta + sigma) || !in_tree(t, nu + sigma)) continue;
                    n.h[i][p] = t;
                    n.g[i][p] = forcelab::WordSet(l, {sigma});
                    if (rec(p, i + 1)) return true;
                }
            return false;
        };
        return rec(0, 0);
    }

    std::size_t depth_, iota_, max_u_;
    std::vector<std::set<std::string>> nodes_;
    std::map<std::pair<std::string, std::size_t>, bool> memo_;
    mutable std::map<std::size_t, std::vector<forcelab::WordSet>> subsets_;
};

// Random tree of the given depth: the top level is a random nonempty set of words.
inline forcelab::FiniteTree random_tree(forcelab::Rng& rng, std::size_t depth, std::uint64_t num, std::uint64_t den) {
    std::vector<forcelab::BitWord> top;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << depth); ++x)
        if (rng.chance(num, den)) top.push_back(forcelab::BitWord::from_u64(depth, x));
    if (top.empty()) top.push_back(forcelab::BitWord::from_u64(depth, rng.below(std::uint64_t{1} << depth)));
    return forcelab::FiniteTree(depth, forcelab::WordSet(depth, top));
}

inline forcelab::FiniteTree full_tree(std::size_t depth) {
    std::vector<forcelab::BitWord> top;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << depth); ++x) top.push_back(forcelab::BitWord::from_u64(depth, x));
    return forcelab::FiniteTree(depth, forcelab::WordSet(depth, top));
}

}  // namespace oracle
