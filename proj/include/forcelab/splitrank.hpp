#pragma once

// Splitting rank on finite relational models with a largeness threshold.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "report.hpp"

namespace forcelab {

/// Finite set of ordinals below 64, one bit per element.
using OrdSet = std::uint64_t;

inline OrdSet ordset_of(const std::vector<std::size_t>& elems) {
    OrdSet s = 0;
    for (auto a : elems) {
        if (a >= 64) throw capacity_error("ordinal " + std::to_string(a) + " exceeds the 64-element universe cap");
        s |= OrdSet{1} << a;
    }
    return s;
}

inline std::vector<std::size_t> elements_of(OrdSet s) {
    std::vector<std::size_t> out;
    for (; s; s &= s - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(s)));
    return out;
}

inline std::string ordset_text(OrdSet s) {
    std::string t = "{";
    bool first = true;
    for (auto a : elements_of(s)) {
        t += (first ? "" : ",") + std::to_string(a);
        first = false;
    }
    return t + "}";
}

/// Integer rank >= -1 or the infinity marker. No arithmetic on infinity.
class Rank {
public:
    static Rank infinity() {
        Rank r;
        r.inf_ = true;
        return r;
    }
    static Rank of(int v) {
        if (v < -1) throw input_error("rank below -1");
        Rank r;
        r.v_ = v;
        return r;
    }

    bool is_infinite() const noexcept { return inf_; }
    int value() const {
        if (inf_) throw model_inconsistency("rank is infinite; no integer value");
        return v_;
    }
    std::string str() const { return inf_ ? "inf" : std::to_string(v_); }

    friend bool operator==(const Rank&, const Rank&) = default;
    friend std::strong_ordering operator<=>(const Rank& a, const Rank& b) {
        if (a.inf_ || b.inf_) return a.inf_ <=> b.inf_;
        return a.v_ <=> b.v_;
    }

private:
    int v_ = -1;
    bool inf_ = false;
};

/// One relation symbol R_{arity,zeta}. Increasing tuples are kept as masks;
/// anything else (only present in malformed models) is kept verbatim.
struct Relation {
    std::size_t zeta = 0;
    std::size_t arity = 0;
    std::vector<OrdSet> increasing;                  // sorted
    std::vector<std::vector<std::size_t>> irregular;  // sorted

    bool holds(const std::vector<std::size_t>& tuple) const {
        if (tuple.size() != arity) return false;
        bool inc = true;
        for (std::size_t i = 1; i < tuple.size(); ++i) inc = inc && tuple[i - 1] < tuple[i];
        if (inc && (tuple.empty() || tuple.back() < 64))
            return std::binary_search(increasing.begin(), increasing.end(), ordset_of(tuple));
        return std::binary_search(irregular.begin(), irregular.end(), tuple);
    }

    std::size_t tuple_count() const { return increasing.size() + irregular.size(); }

    std::vector<std::vector<std::size_t>> tuples() const {
        std::vector<std::vector<std::size_t>> out;
        for (auto m : increasing) out.push_back(elements_of(m));
        for (const auto& t : irregular) out.push_back(t);
        std::sort(out.begin(), out.end());
        return out;
    }
};

class FiniteModel {
public:
    struct RelationSpec {
        std::size_t zeta = 0;
        std::size_t arity = 0;
        std::vector<std::vector<std::size_t>> tuples;
    };

    FiniteModel() = default;
    FiniteModel(std::size_t size, std::size_t theta, const std::vector<RelationSpec>& rels)
        : size_(size), theta_(theta) {
        if (size > 64) throw capacity_error("model universe limited to 64 elements");
        for (const auto& spec : rels) {
            Relation r;
            r.zeta = spec.zeta;
            r.arity = spec.arity;
            for (const auto& t : spec.tuples) {
                bool inc = t.size() == spec.arity;
                for (std::size_t i = 0; i < t.size(); ++i) {
                    inc = inc && t[i] < size && (i == 0 || t[i - 1] < t[i]);
                }
                if (inc)
                    r.increasing.push_back(ordset_of(t));
                else
                    r.irregular.push_back(t);
            }
            add(std::move(r));
        }
    }

    // Relations given directly as masks of increasing tuples.
    void add(Relation r) {
        std::sort(r.increasing.begin(), r.increasing.end());
        r.increasing.erase(std::unique(r.increasing.begin(), r.increasing.end()), r.increasing.end());
        std::sort(r.irregular.begin(), r.irregular.end());
        r.irregular.erase(std::unique(r.irregular.begin(), r.irregular.end()), r.irregular.end());
        rels_.push_back(std::move(r));
        std::stable_sort(rels_.begin(), rels_.end(), [](const Relation& a, const Relation& b) {
            return a.arity != b.arity ? a.arity < b.arity : a.zeta < b.zeta;
        });
    }

    std::size_t size() const noexcept { return size_; }
    std::size_t theta() const noexcept { return theta_; }
    const std::vector<Relation>& relations() const noexcept { return rels_; }

    // Relations of the given arity in increasing zeta order.
    std::vector<const Relation*> of_arity(std::size_t n) const {
        std::vector<const Relation*> out;
        for (const auto& r : rels_)
            if (r.arity == n) out.push_back(&r);
        return out;
    }

    OrdSet universe() const { return size_ == 64 ? ~OrdSet{0} : (OrdSet{1} << size_) - 1; }

private:
    std::size_t size_ = 0;
    std::size_t theta_ = 2;
    std::vector<Relation> rels_;
};

inline Report validate_model(const FiniteModel& m) {
    Report rep;
    rep.check("theta", m.theta() >= 2, "theta = " + std::to_string(m.theta()));
    for (std::size_t i = 0; i < m.relations().size(); ++i) {
        const Relation& r = m.relations()[i];
        const std::string name = "R(" + std::to_string(r.arity) + "," + std::to_string(r.zeta) + ")";
        for (std::size_t j = 0; j < i; ++j) {
            const Relation& o = m.relations()[j];
            if (o.arity == r.arity && o.zeta == r.zeta) rep.fail("unique", name + " declared twice");
        }
        for (const auto& t : r.irregular) {
            std::string txt = "(";
            for (std::size_t k = 0; k < t.size(); ++k) txt += (k ? "," : "") + std::to_string(t[k]);
            txt += ")";
            if (t.size() != r.arity)
                rep.fail("arity", name + " holds a tuple " + txt + " of length " + std::to_string(t.size()));
            else if (std::any_of(t.begin(), t.end(), [&](std::size_t a) { return a >= m.size(); }))
                rep.fail("universe", name + " holds " + txt + " outside the universe");
            else
                rep.fail("increasing", name + " holds non-increasing tuple " + txt);
        }
    }
    if (rep.ok("increasing")) rep.pass("increasing");
    return rep;
}

/// Witness (zeta(v), k(v)) for the rank of v.
struct RankWitness {
    OrdSet v = 0;
    Rank rk;
    std::size_t zeta = 0;
    std::size_t k = 0;
};

/// Memoized rank evaluation for one model. Not shareable across threads.
class RankEvaluator {
public:
    explicit RankEvaluator(const FiniteModel& m, unsigned long long budget = ~0ULL) : m_(m), budget_(budget) {}
    // The evaluator keeps a reference to the model.
    explicit RankEvaluator(FiniteModel&&, unsigned long long = ~0ULL) = delete;

    Rank rank(OrdSet w) {
        check_set(w);
        return eval(w);
    }

    RankWitness witness(OrdSet w) {
        const Rank r = rank(w);
        if (r.is_infinite())
            throw model_inconsistency("set " + ordset_text(w) + " has infinite rank; no witness exists");
        const auto a = elements_of(w);
        for (const Relation* R : m_.of_arity(a.size())) {
            if (!R->holds(a)) continue;
            for (std::size_t k = 0; k < a.size(); ++k) {
                if (r.value() == -1) {
                    if (substitute_count(*R, a, k) < m_.theta()) return {w, r, R->zeta, k};
                    continue;
                }
                bool blocked = true;
                for_each_substitute(*R, a, k, w, [&](std::size_t alpha) {
                    if (blocked && eval(w | (OrdSet{1} << alpha)) >= r) blocked = false;
                });
                if (blocked) return {w, r, R->zeta, k};
            }
        }
        throw model_inconsistency("no witness found for " + ordset_text(w) + " at rank " + r.str());
    }

    std::size_t memo_size() const noexcept { return memo_.size(); }
    unsigned long long evaluations() const noexcept { return budget_.used(); }
    const FiniteModel& model() const noexcept { return m_; }

private:
    void check_set(OrdSet w) const {
        if (w == 0) throw input_error("rank of the empty set is undefined");
        if (w & ~m_.universe()) throw input_error("set " + ordset_text(w) + " leaves the model universe");
    }

    std::size_t substitute_count(const Relation& R, std::vector<std::size_t> a, std::size_t k) const {
        std::size_t c = 0;
        for (std::size_t alpha = 0; alpha < m_.size(); ++alpha) {
            a[k] = alpha;
            if (R.holds(a)) ++c;
        }
        return c;
    }

    template <class F>
    void for_each_substitute(const Relation& R, std::vector<std::size_t> a, std::size_t k, OrdSet w, F&& f) const {
        for (std::size_t alpha = 0; alpha < m_.size(); ++alpha) {
            if ((w >> alpha) & 1U) continue;
            a[k] = alpha;
            if (R.holds(a)) f(alpha);
        }
    }

    Rank eval(OrdSet w) {
        if (auto it = memo_.find(w); it != memo_.end()) return it->second;
        budget_.spend(1, "splitting rank");
        const auto a = elements_of(w);
        std::vector<const Relation*> holding;
        for (const Relation* R : m_.of_arity(a.size()))
            if (R->holds(a)) holding.push_back(R);

        Rank result = Rank::infinity();
        for (const Relation* R : holding)
            for (std::size_t k = 0; k < a.size(); ++k)
                if (substitute_count(*R, a, k) < m_.theta()) {
                    memo_.emplace(w, Rank::of(-1));
                    return Rank::of(-1);
                }
        for (const Relation* R : holding)
            for (std::size_t k = 0; k < a.size(); ++k) {
                std::optional<Rank> best;
                for_each_substitute(*R, a, k, w, [&](std::size_t alpha) {
                    const Rank r = eval(w | (OrdSet{1} << alpha));
                    if (!best || r > *best) best = r;
                });
                Rank contribution = Rank::of(0);
                if (best && best->is_infinite())
                    contribution = Rank::infinity();
                else if (best)
                    contribution = Rank::of(best->value() + 1);
                result = std::min(result, contribution);
            }
        memo_.emplace(w, result);
        return result;
    }

    const FiniteModel& m_;
    Budget budget_;
    std::unordered_map<OrdSet, Rank> memo_;
};

inline Rank rank(OrdSet w, const FiniteModel& m) { return RankEvaluator(m).rank(w); }
inline RankWitness witness(OrdSet w, const FiniteModel& m) { return RankEvaluator(m).witness(w); }

/// Re-check a witness against its defining property by direct enumeration.
inline bool witness_holds(const RankWitness& wt, RankEvaluator& ev) {
    const FiniteModel& m = ev.model();
    const auto a = elements_of(wt.v);
    if (wt.k >= a.size() || wt.rk.is_infinite()) return false;
    const Relation* R = nullptr;
    for (const Relation* c : m.of_arity(a.size()))
        if (c->zeta == wt.zeta) R = c;
    if (!R || !R->holds(a)) return false;
    auto b = a;
    if (wt.rk.value() == -1) {
        std::size_t c = 0;
        for (std::size_t alpha = 0; alpha < m.size(); ++alpha) {
            b[wt.k] = alpha;
            c += R->holds(b) ? 1 : 0;
        }
        return c < m.theta();
    }
    for (std::size_t alpha = 0; alpha < m.size(); ++alpha) {
        if ((wt.v >> alpha) & 1U) continue;
        b[wt.k] = alpha;
        if (R->holds(b) && ev.rank(wt.v | (OrdSet{1} << alpha)) >= wt.rk) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Synthetic background model

/// Universe split into consecutive groups; relations see only the sequence of
/// groups of an increasing tuple with pairwise distinct groups. Swapping the two
/// members of a rich group is therefore an order-preserving automorphism.
class CloneGroupModel {
public:
    struct Options {
        std::vector<std::size_t> group_sizes;
        std::size_t theta = 2;
        std::uint64_t salt = 0x5eed;
        // (arity, zeta, density numerator out of 8)
        std::vector<std::array<std::size_t, 3>> relations;
    };

    static Options default_options() {
        Options o;
        for (std::size_t g = 0; g < 16; ++g) o.group_sizes.push_back(g % 3 == 2 ? 1 : 2);
        o.relations = {{1, 0, 8}, {5, 0, 6}, {5, 1, 3}, {6, 0, 5}, {7, 0, 5}};
        return o;
    }

    explicit CloneGroupModel(Options o = default_options()) : opt_(std::move(o)) {
        std::size_t next = 0;
        for (std::size_t g = 0; g < opt_.group_sizes.size(); ++g) {
            first_.push_back(next);
            for (std::size_t j = 0; j < opt_.group_sizes[g]; ++j) group_.push_back(g);
            next += opt_.group_sizes[g];
        }
        if (next > 64) throw capacity_error("clone-group model exceeds 64 elements");
        model_ = FiniteModel(next, opt_.theta, {});
        for (const auto& spec : opt_.relations) build(spec[0], spec[1], spec[2]);
    }

    const FiniteModel& model() const noexcept { return model_; }
    std::size_t group_of(std::size_t label) const { return group_.at(label); }
    std::size_t groups() const noexcept { return opt_.group_sizes.size(); }
    bool rich(std::size_t g) const { return opt_.group_sizes.at(g) >= 2; }
    std::size_t member(std::size_t g, std::size_t j) const { return first_.at(g) + j; }

    // The other member of a two-element group.
    std::optional<std::size_t> twin(std::size_t label) const {
        const std::size_t g = group_of(label);
        if (opt_.group_sizes[g] != 2) return std::nullopt;
        return label == first_[g] ? first_[g] + 1 : first_[g];
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    void build(std::size_t arity, std::size_t zeta, std::size_t density) {
        Relation r;
        r.arity = arity;
        r.zeta = zeta;
        const std::size_t G = groups();
        std::vector<std::size_t> pick;
        // Enumerate increasing group sequences, keep a pseudo-random fraction,
        // expand each kept sequence over all member choices.
        auto rec = [&](auto&& self, std::size_t from) -> void {
            if (pick.size() == arity) {
                std::uint64_t key = opt_.salt ^ (arity << 56) ^ (zeta << 48);
                for (auto g : pick) key = mix(key ^ (g + 1));
                if (mix(key) % 8 >= density) return;
                expand(r, pick, 0, 0);
                return;
            }
            for (std::size_t g = from; g < G; ++g) {
                pick.push_back(g);
                self(self, g + 1);
                pick.pop_back();
            }
        };
        rec(rec, 0);
        model_.add(std::move(r));
    }

    void expand(Relation& r, const std::vector<std::size_t>& groups, std::size_t i, OrdSet acc) const {
        if (i == groups.size()) {
            r.increasing.push_back(acc);
            return;
        }
        for (std::size_t j = 0; j < opt_.group_sizes[groups[i]]; ++j)
            expand(r, groups, i + 1, acc | (OrdSet{1} << (first_[groups[i]] + j)));
    }

    Options opt_;
    std::vector<std::size_t> group_, first_;
    FiniteModel model_;
};

/// The shared synthetic background model used by tests, demos and the CLI.
inline const CloneGroupModel& bundled_model() {
    static const CloneGroupModel m;
    return m;
}

}  // namespace forcelab
