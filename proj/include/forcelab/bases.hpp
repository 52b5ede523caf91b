#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "gf2.hpp"
#include "report.hpp"

namespace forcelab {

// ---------------------------------------------------------------------------
// Simple bases

enum class BaseTag { O0, Oper };

inline std::string to_string(BaseTag t) { return t == BaseTag::O0 ? "O0" : "per"; }

inline BaseTag parse_base_tag(const std::string& s) {
    if (s == "O0" || s == "o0" || s == "singleton" || s == "0") return BaseTag::O0;
    if (s == "per" || s == "Oper" || s == "perfect") return BaseTag::Oper;
    throw input_error("unknown base tag \"" + s + "\"");
}

namespace detail {
inline bool restriction_counts(const WordSet& u, const WordSet& v, std::size_t& min_count) {
    const std::size_t l = u.len();
    min_count = ~std::size_t{0};
    std::size_t ui = 0, count = 0;
    for (const auto& eta : v) {
        while (ui < u.size() && BitWord::compare_prefix(u[ui], eta, l) < 0) {
            if (count == 0) return false;
            min_count = std::min(min_count, count);
            ++ui;
            count = 0;
        }
        if (ui == u.size() || BitWord::compare_prefix(u[ui], eta, l) != 0) return false;
        ++count;
    }
    if (ui + 1 != u.size() || count == 0) return false;
    min_count = std::min(min_count, count);
    return true;
}
}  // namespace detail

inline bool base_member(BaseTag tag, const WordSet& u) {
    return tag == BaseTag::O0 ? u.size() == 1 : u.size() >= 3;
}

inline bool base_prec(BaseTag tag, const WordSet& u, const WordSet& v) {
    if (!base_member(tag, u) || !base_member(tag, v)) return false;
    if (u.len() >= v.len()) return false;
    std::size_t min_count = 0;
    if (!detail::restriction_counts(u, v, min_count)) return false;
    return tag == BaseTag::O0 || min_count >= 2;
}

// ---------------------------------------------------------------------------
// Compact level sets for exhaustive checks

/// A subset of 2^len for len <= 10 as a bitmask over node indices. The index of
/// a node reads its coordinates as a binary number with coordinate 0 most significant,
/// so restriction is a right shift of the index and translation is an xor.
class LevelMask {
public:
    static constexpr std::size_t kMaxLen = 10;

    LevelMask() = default;
    explicit LevelMask(std::size_t len) : len_(len) {
        if (len > kMaxLen) throw capacity_error("level mask limited to length 10");
    }

    static LevelMask from_bits(std::size_t len, std::uint64_t low) {
        LevelMask m(len);
        m.w_[0] = low;
        return m;
    }

    static LevelMask from(const WordSet& u) {
        LevelMask m(u.len());
        for (const auto& eta : u) m.set(index_of(eta));
        return m;
    }

    static std::size_t index_of(const BitWord& eta) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < eta.size(); ++i) idx = (idx << 1) | (eta.test(i) ? 1U : 0U);
        return idx;
    }

    static BitWord word_of(std::size_t len, std::size_t idx) {
        BitWord b(len);
        for (std::size_t i = 0; i < len; ++i)
            if ((idx >> (len - 1 - i)) & 1U) b.set(i);
        return b;
    }

    WordSet to_wordset() const {
        std::vector<BitWord> v;
        for_each([&](std::size_t idx) { v.push_back(word_of(len_, idx)); });
        return WordSet(len_, std::move(v));
    }

    std::size_t len() const noexcept { return len_; }
    std::size_t nodes() const noexcept { return std::size_t{1} << len_; }
    std::size_t words() const noexcept { return (nodes() + 63) / 64; }

    void set(std::size_t idx) { w_[idx >> 6] |= std::uint64_t{1} << (idx & 63); }
    bool test(std::size_t idx) const { return (w_[idx >> 6] >> (idx & 63)) & 1U; }

    std::size_t count() const {
        std::size_t c = 0;
        for (std::size_t k = 0; k < words(); ++k) c += static_cast<std::size_t>(std::popcount(w_[k]));
        return c;
    }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t k = 0; k < words(); ++k)
            for (std::uint64_t x = w_[k]; x; x &= x - 1)
                f(k * 64 + static_cast<std::size_t>(std::countr_zero(x)));
    }

    std::size_t first() const {
        for (std::size_t k = 0; k < words(); ++k)
            if (w_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(w_[k]));
        return nodes();
    }

    LevelMask restrict(std::size_t l) const {
        LevelMask r(l);
        const std::size_t shift = len_ - l;
        for_each([&](std::size_t idx) { r.set(idx >> shift); });
        return r;
    }

    LevelMask translate(std::size_t rho) const {
        LevelMask r(len_);
        for_each([&](std::size_t idx) { r.set(idx ^ rho); });
        return r;
    }

    // Nodes of this set lying above `node` of a shorter length.
    std::size_t count_above(std::size_t node, std::size_t node_len) const {
        const std::size_t d = len_ - node_len;
        const std::size_t lo = node << d, hi = (node + 1) << d;
        std::size_t c = 0;
        for (std::size_t idx = lo; idx < hi;) {
            const std::size_t k = idx >> 6, off = idx & 63;
            const std::size_t span = std::min<std::size_t>(64 - off, hi - idx);
            std::uint64_t x = w_[k] >> off;
            if (span < 64) x &= (std::uint64_t{1} << span) - 1;
            c += static_cast<std::size_t>(std::popcount(x));
            idx += span;
        }
        return c;
    }

    friend bool operator==(const LevelMask& a, const LevelMask& b) {
        if (a.len_ != b.len_) return false;
        for (std::size_t k = 0; k < a.words(); ++k)
            if (a.w_[k] != b.w_[k]) return false;
        return true;
    }

private:
    std::size_t len_ = 0;
    std::array<std::uint64_t, 16> w_{};
};

inline bool mask_member(BaseTag tag, const LevelMask& u) {
    return tag == BaseTag::O0 ? u.count() == 1 : u.count() >= 3;
}

// Same relation as base_prec, on masks.
inline bool mask_prec(BaseTag tag, const LevelMask& u, const LevelMask& v) {
    if (!mask_member(tag, u) || !mask_member(tag, v) || u.len() >= v.len()) return false;
    if (!(v.restrict(u.len()) == u)) return false;
    if (tag == BaseTag::O0) return true;
    bool ok = true;
    u.for_each([&](std::size_t node) { ok = ok && v.count_above(node, u.len()) >= 2; });
    return ok;
}

/// Interface shared by the concrete bases and planted test doubles.
template <class B>
concept SimpleBase = requires(const B& b, const LevelMask& u) {
    { b.member(u) } -> std::convertible_to<bool>;
    { b.prec(u, u) } -> std::convertible_to<bool>;
    { b.max_size() } -> std::convertible_to<std::optional<std::size_t>>;
    { b.name() } -> std::convertible_to<std::string>;
};

struct TaggedBase {
    BaseTag tag = BaseTag::O0;
    bool member(const LevelMask& u) const { return mask_member(tag, u); }
    bool prec(const LevelMask& u, const LevelMask& v) const { return mask_prec(tag, u, v); }
    bool member(const WordSet& u) const { return base_member(tag, u); }
    bool prec(const WordSet& u, const WordSet& v) const { return base_prec(tag, u, v); }
    std::optional<std::size_t> max_size() const {
        return tag == BaseTag::O0 ? std::optional<std::size_t>(1) : std::nullopt;
    }
    std::string name() const { return to_string(tag); }
};

// Singletons ordered within one length; breaks the length clause on purpose.
struct PlantedEqualLengthBase {
    bool member(const LevelMask& u) const { return u.count() == 1; }
    bool prec(const LevelMask& u, const LevelMask& v) const {
        return member(u) && member(v) && u.len() == v.len() && u.first() < v.first();
    }
    std::optional<std::size_t> max_size() const { return 1; }
    std::string name() const { return "planted-equal-length"; }
};

// ---------------------------------------------------------------------------
// Indexed bases

struct IndexedBase {
    std::optional<std::size_t> istar;  // nullopt is omega
    std::vector<BaseTag> tags;         // cycled when istar is omega

    static IndexedBase finite(std::size_t istar, BaseTag tag) {
        return {istar, std::vector<BaseTag>(istar, tag)};
    }
    static IndexedBase omega(std::vector<BaseTag> pattern) { return {std::nullopt, std::move(pattern)}; }
    static IndexedBase per() { return finite(1, BaseTag::Oper); }

    bool is_omega() const noexcept { return !istar.has_value(); }

    BaseTag component(std::size_t i) const {
        if (tags.empty()) throw input_error("indexed base without tags");
        if (istar) {
            if (i >= *istar) throw input_error("component index beyond i*");
            return tags.size() == 1 ? tags[0] : tags.at(i);
        }
        return tags[i % tags.size()];
    }

    // Iota used by conditions built from scratch.
    std::size_t initial_iota() const { return istar ? *istar : 6; }

    std::vector<BaseTag> distinct_tags() const {
        std::vector<BaseTag> out;
        for (auto t : tags)
            if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        return out;
    }

    std::string describe() const {
        std::string s = "<";
        for (std::size_t i = 0; i < tags.size(); ++i) s += (i ? "," : "") + to_string(tags[i]);
        s += istar ? "> i*=" + std::to_string(*istar) : ">... i*=omega";
        return s;
    }

    void validate() const {
        if (tags.empty()) throw input_error("indexed base needs at least one tag");
        if (istar) {
            if (*istar == 0) throw input_error("i* must be positive");
            if (tags.size() != 1 && tags.size() != *istar)
                throw input_error("finite i* needs one tag or exactly i* tags");
        }
    }

    friend bool operator==(const IndexedBase&, const IndexedBase&) = default;
};



// Canonical one-level extensions of a level set.
enum class ExtKind { left, right, twin, alternate, first_split };

inline WordSet extend_level(const WordSet& u, ExtKind kind) {
    std::vector<BitWord> v;
    std::size_t idx = 0;
    for (const auto& eta : u) {
        switch (kind) {
            case ExtKind::left: v.push_back(eta.child(false)); break;
            case ExtKind::right: v.push_back(eta.child(true)); break;
            case ExtKind::twin:
                v.push_back(eta.child(false));
                v.push_back(eta.child(true));
                break;
            case ExtKind::alternate: v.push_back(eta.child(idx % 2 == 1)); break;
            case ExtKind::first_split:
                v.push_back(eta.child(false));
                if (idx == 0) v.push_back(eta.child(true));
                break;
        }
        ++idx;
    }
    return WordSet(u.len() + 1, std::move(v));
}

inline constexpr ExtKind kAllExtKinds[] = {ExtKind::left, ExtKind::right, ExtKind::twin,
                                           ExtKind::alternate, ExtKind::first_split};

inline WordSet twin_extension(const WordSet& u, std::size_t levels) {
    WordSet v = u;
    for (std::size_t i = 0; i < levels; ++i) v = extend_level(v, ExtKind::twin);
    return v;
}

inline std::vector<WordSet> extension_candidates(const WordSet& u) {
    std::vector<WordSet> out;
    for (auto k : kAllExtKinds) out.push_back(extend_level(u, k));
    out.push_back(twin_extension(u, 2));
    out.push_back(extend_level(extend_level(u, ExtKind::left), ExtKind::twin));
    return out;
}


inline std::vector<BitWord> all_words(std::size_t len) {
    if (len > 20) throw capacity_error("cannot list all words of length " + std::to_string(len));
    std::vector<BitWord> out;
    out.reserve(std::size_t{1} << len);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << len); ++x) out.push_back(BitWord::from_u64(len, x));
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration of level sets and base axiom checks

struct BaseCheckOptions {
    std::size_t cap = 6;
    std::size_t max_violations = 20;
};

namespace detail {

// Subsets of 2^d up to automorphisms of the full binary tree, as masks over node indices.
inline const std::vector<std::uint64_t>& orbit_reps(std::size_t d) {
    static std::vector<std::vector<std::uint64_t>> cache;
    if (d > 5) throw capacity_error("orbit enumeration is limited to length 5");
    if (cache.empty()) cache.push_back({0, 1});
    while (cache.size() <= d) {
        const auto& prev = cache.back();
        const std::size_t half = std::size_t{1} << (cache.size() - 1);
        std::vector<std::uint64_t> next;
        for (std::size_t i = 0; i < prev.size(); ++i)
            for (std::size_t j = i; j < prev.size(); ++j) next.push_back(prev[i] | (prev[j] << half));
        cache.push_back(std::move(next));
    }
    return cache[d];
}

inline std::vector<LevelMask> all_subsets(std::size_t len) {
    std::vector<LevelMask> out;
    const std::size_t nodes = std::size_t{1} << len;
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << nodes); ++m) out.push_back(LevelMask::from_bits(len, m));
    return out;
}

inline std::vector<LevelMask> small_subsets(std::size_t len, std::size_t k) {
    std::vector<LevelMask> out;
    const std::size_t nodes = std::size_t{1} << len;
    for (std::size_t a = 0; a < nodes; ++a) {
        LevelMask m(len);
        m.set(a);
        if (k >= 1) out.push_back(m);
        if (k >= 2)
            for (std::size_t b = a + 1; b < nodes; ++b) {
                LevelMask m2 = m;
                m2.set(b);
                out.push_back(m2);
            }
    }
    return out;
}

}  // namespace detail

/// Members of the base at length `len`: every subset when 2^len <= 4, every small
/// subset when the base caps sizes at 2, otherwise one subset per tree-automorphism orbit.
template <SimpleBase B>
std::vector<LevelMask> level_members(const B& base, std::size_t len) {
    std::vector<LevelMask> cand;
    const auto cap = base.max_size();
    if (len <= 2)
        cand = detail::all_subsets(len);
    else if (cap && *cap <= 2)
        cand = detail::small_subsets(len, *cap);
    else
        for (auto m : detail::orbit_reps(len))
            if (m) cand.push_back(LevelMask::from_bits(len, m));
    std::vector<LevelMask> out;
    for (const auto& u : cand)
        if (base.member(u)) out.push_back(u);
    return out;
}

inline LevelMask extend_mask(const LevelMask& u, ExtKind kind) {
    LevelMask v(u.len() + 1);
    std::size_t pos = 0;
    u.for_each([&](std::size_t idx) {
        switch (kind) {
            case ExtKind::left: v.set(2 * idx); break;
            case ExtKind::right: v.set(2 * idx + 1); break;
            case ExtKind::twin:
                v.set(2 * idx);
                v.set(2 * idx + 1);
                break;
            case ExtKind::alternate: v.set(2 * idx + (pos % 2)); break;
            case ExtKind::first_split:
                v.set(2 * idx);
                if (pos == 0) v.set(2 * idx + 1);
                break;
        }
        ++pos;
    });
    return v;
}

inline std::vector<LevelMask> extension_candidates(const LevelMask& u) {
    std::vector<LevelMask> out;
    if (u.len() + 1 > LevelMask::kMaxLen) return out;
    for (auto k : kAllExtKinds) out.push_back(extend_mask(u, k));
    if (u.len() + 2 <= LevelMask::kMaxLen) {
        out.push_back(extend_mask(extend_mask(u, ExtKind::twin), ExtKind::twin));
        out.push_back(extend_mask(extend_mask(u, ExtKind::left), ExtKind::twin));
    }
    return out;
}

namespace detail {

struct ViolationSink {
    Report& rep;
    std::size_t limit;
    std::size_t count = 0;
    void fail(const std::string& clause, const std::string& detail) {
        if (count++ < limit) rep.fail(clause, detail);
    }
};

inline std::string show(const WordSet& u) {
    std::string s = "{";
    for (std::size_t i = 0; i < u.size(); ++i) s += (i ? "," : "") + u[i].str();
    return s + "}";
}

inline std::string show(const LevelMask& u) { return show(u.to_wordset()); }

// Level sets compared against u for the length-and-restriction clause.
inline std::vector<LevelMask> order_candidates(const LevelMask& u) {
    std::vector<LevelMask> out;
    for (std::size_t l = 0; l < u.len(); ++l) out.push_back(u.restrict(l));
    for (std::size_t j = 0; j < u.len(); ++j) out.push_back(u.translate(std::size_t{1} << j));
    // Single-node additions next to the first few nodes.
    std::size_t seen = 0;
    u.for_each([&](std::size_t idx) {
        if (seen++ >= 3) return;
        for (std::size_t j = 0; j < u.len(); ++j) {
            const std::size_t other = idx ^ (std::size_t{1} << j);
            if (u.test(other)) continue;
            LevelMask w = u;
            w.set(other);
            out.push_back(w);
        }
    });
    for (auto& e : extension_candidates(u)) out.push_back(e);
    return out;
}

}  // namespace detail

/// Bounded check of the simple-base clauses (a) length and restriction form,
/// (b) existence of an extension, (c) translation closure and equivariance, plus
/// irreflexivity and transitivity of the order. Members up to length `depth`.
template <SimpleBase B>
Report check_simple_base(const B& base, std::size_t depth, const BaseCheckOptions& opt = {}) {
    if (depth > opt.cap)
        throw capacity_error("depth " + std::to_string(depth) + " exceeds the exhaustive cap " +
                             std::to_string(opt.cap));
    Report rep;
    detail::ViolationSink sink{rep, opt.max_violations};
    const std::string pfx = base.name() + " ";

    auto check_a = [&](const LevelMask& u, const LevelMask& v) {
        if (!base.prec(u, v)) return;
        if (u.len() >= v.len())
            sink.fail("(a)", pfx + detail::show(u) + " precedes " + detail::show(v) + " without being shorter");
        else if (!(v.restrict(u.len()) == u))
            sink.fail("(a)", pfx + detail::show(u) + " precedes " + detail::show(v) +
                                 " but is not its restriction");
    };

    // Exhaustive pairs among all level sets of length at most 3.
    {
        std::vector<LevelMask> small;
        for (std::size_t l = 1; l <= std::min<std::size_t>(depth, 3); ++l)
            for (const auto& s : detail::all_subsets(l))
                if (base.member(s)) small.push_back(s);
        for (const auto& a : small)
            for (const auto& b : small) check_a(a, b);
    }

    for (std::size_t l = 1; l <= depth; ++l) {
        for (const auto& u : level_members(base, l)) {
            if (base.prec(u, u)) sink.fail("order", pfx + detail::show(u) + " precedes itself");

            for (const auto& c : detail::order_candidates(u)) {
                check_a(u, c);
                check_a(c, u);
            }

            const auto ups = extension_candidates(u);
            bool found = false;
            for (const auto& v : ups) found = found || base.prec(u, v);
            if (!found)
                sink.fail("(b)", pfx + detail::show(u) + " has no extension found within length " +
                                     std::to_string(l + 2));

            // (c): translation closure over all vectors; equivariance over generators
            // (unit vectors) and the all-ones vector, every vector up to length 4.
            for (std::size_t rho = 0; rho < u.nodes(); ++rho)
                if (!base.member(u.translate(rho)))
                    sink.fail("(c)", pfx + detail::show(u) + " + " + LevelMask::word_of(l, rho).str() +
                                         " is not a member");
            for (const auto& v : ups) {
                if (!base.prec(u, v)) continue;
                std::vector<std::size_t> rhos;
                if (v.len() <= 4) {
                    for (std::size_t r = 0; r < v.nodes(); ++r) rhos.push_back(r);
                } else {
                    for (std::size_t j = 0; j < v.len(); ++j) rhos.push_back(std::size_t{1} << j);
                    rhos.push_back(v.nodes() - 1);
                }
                const std::size_t shift = v.len() - l;
                for (auto rho : rhos)
                    if (!base.prec(u.translate(rho >> shift), v.translate(rho)))
                        sink.fail("(c)", pfx + detail::show(u) + " < " + detail::show(v) + " not preserved by " +
                                             LevelMask::word_of(v.len(), rho).str());
                if (v.len() + 1 > LevelMask::kMaxLen) continue;
                for (auto kind : {ExtKind::twin, ExtKind::left}) {
                    const LevelMask w = extend_mask(v, kind);
                    if (base.prec(v, w) && !base.prec(u, w))
                        sink.fail("order", pfx + "transitivity fails at " + detail::show(u) + " < " +
                                               detail::show(v) + " < " + detail::show(w));
                }
            }
        }
    }
    for (const char* c : {"(a)", "(b)", "(c)", "order"})
        if (rep.ok(c)) rep.pass(c);
    return rep;
}

inline Report check_simple_base(BaseTag tag, std::size_t depth, const BaseCheckOptions& opt = {}) {
    return check_simple_base(TaggedBase{tag}, depth, opt);
}

// ---------------------------------------------------------------------------
// Niceness

namespace detail {

// One-point extensions of v to length L: each node of v gets exactly one extension.
inline std::vector<LevelMask> one_point_extensions(const LevelMask& v, std::size_t L) {
    std::vector<LevelMask> out;
    const std::size_t gap = L - v.len();
    const std::size_t span = std::size_t{1} << gap;
    for (int variant = 0; variant < 4; ++variant) {
        LevelMask w(L);
        std::size_t pos = 0;
        v.for_each([&](std::size_t idx) {
            std::size_t tail = 0;
            if (variant == 1) tail = span - 1;
            if (variant == 2) tail = pos % span;
            if (variant == 3) tail = static_cast<std::size_t>((pos * 0x9e3779b97f4a7c15ULL) >> 7) % span;
            w.set((idx << gap) | tail);
            ++pos;
        });
        out.push_back(w);
    }
    return out;
}

// Subsets of u: all of them for |u| <= 6, otherwise one-node deletions and runs.
inline std::vector<LevelMask> sub_selections(const LevelMask& u) {
    std::vector<std::size_t> nodes;
    u.for_each([&](std::size_t idx) { nodes.push_back(idx); });
    const std::size_t k = nodes.size();
    std::vector<LevelMask> out;
    auto build = [&](auto pick) {
        LevelMask w(u.len());
        for (std::size_t i = 0; i < k; ++i)
            if (pick(i)) w.set(nodes[i]);
        out.push_back(w);
    };
    if (k <= 6) {
        for (std::uint64_t m = 1; m < (std::uint64_t{1} << k); ++m) build([&](std::size_t i) { return (m >> i) & 1U; });
        return out;
    }
    for (std::size_t d = 0; d < k; ++d) build([&](std::size_t i) { return i != d; });
    for (std::size_t s = 1; s < k; s += 3) {
        build([&](std::size_t i) { return i < s; });
        build([&](std::size_t i) { return i >= k - s; });
    }
    return out;
}

}  // namespace detail

/// Bounded check of the niceness demands (i)-(v) for an indexed base.
/// Clause (v) is decided from the tag pattern; the others enumerate members up to `depth`.
inline Report check_nice(const IndexedBase& ib, std::size_t depth, const BaseCheckOptions& opt = {}) {
    ib.validate();
    if (depth > opt.cap)
        throw capacity_error("depth " + std::to_string(depth) + " exceeds the exhaustive cap " +
                             std::to_string(opt.cap));
    Report rep;
    detail::ViolationSink sink{rep, opt.max_violations};

    // (i)
    if (!ib.istar || *ib.istar >= 6) {
        rep.pass("(i)", "i* >= 6");
    } else {
        bool some = false;
        std::string why;
        for (auto tag : ib.distinct_tags()) {
            TaggedBase b{tag};
            bool all = true;
            for (std::size_t l = 1; l <= depth && all; ++l)
                for (const auto& u : level_members(b, l)) {
                    bool ok = false;
                    for (const auto& v : extension_candidates(u)) ok = ok || (b.prec(u, v) && v.count() >= 6);
                    if (!ok) {
                        all = false;
                        why = to_string(tag) + ": " + detail::show(u) + " has no extension of size >= 6";
                        break;
                    }
                }
            some = some || all;
        }
        rep.check("(i)", some, "i* = " + std::to_string(*ib.istar) + " < 6 and " + why);
    }

    for (auto tag : ib.distinct_tags()) {
        TaggedBase b{tag};
        const std::string pfx = to_string(tag) + " ";
        for (std::size_t l = 1; l <= depth; ++l) {
            for (const auto& u : level_members(b, l)) {
                const auto ups = extension_candidates(u);
                // (ii): chains u < v < v' < v'' cut out of one top set.
                for (const auto& v : ups) {
                    if (v.len() != l + 1 || !b.prec(u, v) || l + 3 > LevelMask::kMaxLen) continue;
                    for (auto k2 : {ExtKind::twin, ExtKind::left, ExtKind::alternate}) {
                        const LevelMask top = extend_mask(extend_mask(v, k2), ExtKind::twin);
                        const LevelMask v1 = top.restrict(l + 2);
                        if (!(b.prec(v, v1) && b.prec(v1, top))) continue;
                        for (std::size_t L = v.len(); L <= v1.len(); ++L) {
                            const LevelMask r = v1.restrict(L);
                            if (!b.member(r) || !b.prec(u, r) || !b.prec(r, top))
                                sink.fail("(ii)", pfx + "u=" + detail::show(u) + " v'=" + detail::show(v1) +
                                                      " l=" + std::to_string(L));
                        }
                    }
                }
                for (const auto& v : ups) {
                    if (!b.prec(u, v)) continue;
                    // (iii)
                    for (std::size_t L = v.len() + 1; L <= std::min(v.len() + 2, LevelMask::kMaxLen); ++L)
                        for (const auto& w : detail::one_point_extensions(v, L))
                            if (!b.member(w) || !b.prec(u, w))
                                sink.fail("(iii)", pfx + "u=" + detail::show(u) + " v=" + detail::show(v) +
                                                       " v'=" + detail::show(w));
                    // (iv)
                    const std::size_t shift = v.len() - l;
                    for (const auto& us : detail::sub_selections(u)) {
                        if (!b.member(us)) continue;
                        LevelMask vs(v.len());
                        v.for_each([&](std::size_t idx) {
                            if (us.test(idx >> shift)) vs.set(idx);
                        });
                        if (!b.member(vs) || !b.prec(us, vs))
                            sink.fail("(iv)", pfx + "u'=" + detail::show(us) + " v=" + detail::show(v));
                    }
                }
            }
        }
    }
    for (const char* c : {"(ii)", "(iii)", "(iv)"})
        if (rep.ok(c)) rep.pass(c);

    // (v): a cycled tag pattern repeats every tag infinitely often.
    if (ib.istar)
        rep.pass("(v)", "i* finite, vacuous");
    else
        rep.check("(v)", !ib.tags.empty(), "empty tag pattern");
    return rep;
}

// ---------------------------------------------------------------------------
// Finite trees

/// A subtree of 2^{<=depth} whose maximal nodes all have length `depth`, stored
/// by its top level; lower levels are the downward closure.
class FiniteTree {
public:
    FiniteTree() = default;
    explicit FiniteTree(WordSet top) : depth_(top.len()), top_(std::move(top)) {}
    FiniteTree(std::size_t depth, WordSet top) : depth_(depth), top_(std::move(top)) {
        if (top_.len() != depth_ && !top_.empty())
            throw input_error("tree nodes must have length " + std::to_string(depth_));
        if (top_.empty()) top_ = WordSet(depth_);
    }

    std::size_t depth() const noexcept { return depth_; }
    const WordSet& top() const noexcept { return top_; }
    bool empty() const noexcept { return top_.empty(); }

    bool contains(const BitWord& node) const {
        if (node.size() > depth_) return false;
        const BitWord low = node.padded(depth_);
        auto it = std::lower_bound(top_.begin(), top_.end(), low);
        return it != top_.end() && BitWord::compare_prefix(*it, node, node.size()) == 0;
    }

    WordSet level(std::size_t l) const {
        if (l > depth_) throw input_error("level beyond tree depth");
        return top_.restrict(l);
    }

    FiniteTree truncate(std::size_t l) const { return FiniteTree(l, level(l)); }

    std::size_t node_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l <= depth_; ++l) n += empty() ? 0 : level(l).size();
        return n;
    }

    friend bool operator==(const FiniteTree&, const FiniteTree&) = default;

private:
    std::size_t depth_ = 0;
    WordSet top_;
};

// ---------------------------------------------------------------------------
// Towers

class TowerTrunc {
public:
    TowerTrunc(BaseTag base, std::vector<WordSet> levels) : base_(base), levels_(std::move(levels)) {
        if (levels_.empty()) throw input_error("a tower needs at least one level");
        for (std::size_t k = 0; k < levels_.size(); ++k) {
            if (!base_member(base_, levels_[k]))
                throw precondition_error("member", "tower level " + std::to_string(k) +
                                                       " is not a member of " + to_string(base_));
            if (k && !base_prec(base_, levels_[k - 1], levels_[k]))
                throw precondition_error("order", "tower levels " + std::to_string(k - 1) + " and " +
                                                      std::to_string(k) + " are not increasing");
        }
    }

    BaseTag base() const noexcept { return base_; }
    const std::vector<WordSet>& levels() const noexcept { return levels_; }
    const WordSet& front() const { return levels_.front(); }
    const WordSet& back() const { return levels_.back(); }

    std::vector<std::size_t> lengths() const {
        std::vector<std::size_t> out;
        for (const auto& u : levels_) out.push_back(u.len());
        return out;
    }

    friend bool operator==(const TowerTrunc&, const TowerTrunc&) = default;

private:
    BaseTag base_;
    std::vector<WordSet> levels_;
};

/// Every word of length n whose restriction to each level length lies in that level.
inline WordSet tower_cover(const TowerTrunc& tw, std::size_t n, std::size_t max_size = 1u << 20) {
    const WordSet& last = tw.back();
    if (n < last.len())
        throw input_error("cover depth " + std::to_string(n) + " is below the last level length " +
                          std::to_string(last.len()));
    const std::size_t gap = n - last.len();
    if (gap >= 40 || (last.size() << gap) > max_size)
        throw capacity_error("cover at depth " + std::to_string(n) + " is too large to list");
    std::vector<BitWord> out;
    for (const auto& eta : last)
        for (std::uint64_t t = 0; t < (std::uint64_t{1} << gap); ++t)
            out.push_back(eta.concat(BitWord::from_u64(gap, t)));
    WordSet cover(n, std::move(out));
    // Lower levels are restrictions of the last one; the filter is a safeguard.
    for (const auto& lev : tw.levels())
        for (const auto& eta : cover)
            if (!lev.contains(eta.prefix(lev.len())))
                throw internal_inconsistency("tower cover escapes a lower level");
    return cover;
}

inline std::vector<std::size_t> common_lengths(const std::vector<TowerTrunc>& tws) {
    if (tws.empty()) return {};
    std::vector<std::size_t> common = tws.front().lengths();
    for (std::size_t k = 1; k < tws.size(); ++k) {
        auto l = tws[k].lengths();
        std::vector<std::size_t> next;
        std::set_intersection(common.begin(), common.end(), l.begin(), l.end(), std::back_inserter(next));
        common = std::move(next);
    }
    return common;
}

namespace detail {

// Try to give tower `levels` a level of length L without touching protected lengths.
inline bool insert_length(BaseTag tag, std::vector<WordSet>& levels, std::size_t L,
                          const std::vector<std::size_t>& keep) {
    for (const auto& u : levels)
        if (u.len() == L) return true;
    std::size_t pos = 0;
    while (pos < levels.size() && levels[pos].len() < L) ++pos;
    if (pos == 0 || pos == levels.size()) return false;
    auto kept = [&](std::size_t len) {
        return std::find(keep.begin(), keep.end(), len) != keep.end();
    };
    std::vector<WordSet> work = levels;
    WordSet w = work[pos].restrict(L);
    work.insert(work.begin() + static_cast<std::ptrdiff_t>(pos), w);
    // Drop unprotected neighbours until the chain is increasing again.
    std::size_t i = pos;
    while (i > 0 && !base_prec(tag, work[i - 1], work[i])) {
        if (i - 1 == 0 || kept(work[i - 1].len())) return false;
        work.erase(work.begin() + static_cast<std::ptrdiff_t>(i - 1));
        --i;
    }
    while (i + 1 < work.size() && !base_prec(tag, work[i], work[i + 1])) {
        if (i + 1 == work.size() - 1 || kept(work[i + 1].len())) return false;
        work.erase(work.begin() + static_cast<std::ptrdiff_t>(i + 1));
    }
    if (!base_member(tag, work[i])) return false;
    levels = std::move(work);
    return true;
}

}  // namespace detail

/// Re-cut towers so that at least `target_common` lengths occur in all of them,
/// keeping first levels and the cover at the last level.
inline std::vector<TowerTrunc> resync_towers(const std::vector<TowerTrunc>& tws, std::size_t target_common) {
    if (tws.size() < 2) throw input_error("resynchronization needs at least two towers");
    std::size_t lo = 0, hi = ~std::size_t{0};
    for (const auto& t : tws) {
        lo = std::max(lo, t.front().len());
        hi = std::min(hi, t.back().len());
    }
    std::vector<std::vector<WordSet>> work;
    for (const auto& t : tws) work.push_back(t.levels());
    std::vector<std::size_t> chosen;
    for (std::size_t L = lo; L <= hi && chosen.size() < target_common; ++L) {
        auto trial = work;
        bool ok = true;
        for (std::size_t k = 0; k < tws.size() && ok; ++k)
            ok = detail::insert_length(tws[k].base(), trial[k], L, chosen);
        if (!ok) continue;
        work = std::move(trial);
        chosen.push_back(L);
    }
    if (chosen.size() < target_common) {
        const std::size_t need = lo + target_common - 1;
        throw capacity_error("towers share only " + std::to_string(chosen.size()) + " of " +
                             std::to_string(target_common) +
                             " requested lengths; every tower must reach length at least " +
                             std::to_string(std::max(need, hi + (target_common - chosen.size()))));
    }
    std::vector<TowerTrunc> out;
    for (std::size_t k = 0; k < tws.size(); ++k) out.emplace_back(tws[k].base(), std::move(work[k]));
    return out;
}

// ---------------------------------------------------------------------------
// Large-intersection certificates

struct CertificateSlice {
    std::size_t n1 = 0, n2 = 0;
    TowerTrunc tower;
};

struct Certificate {
    std::vector<CertificateSlice> slices;
};

struct CertificateOptions {
    std::size_t max_slices = 6;  // slices examined when i* is omega
    unsigned long long budget = 1000000ULL;
};

namespace detail {

// Tower with top level `top`, completed downward while restrictions stay increasing.
inline TowerTrunc complete_downward(BaseTag tag, const WordSet& top) {
    std::vector<WordSet> levels{top};
    for (std::size_t l = top.len(); l-- > 1;) {
        WordSet r = top.restrict(l);
        if (base_member(tag, r) && base_prec(tag, r, levels.front())) levels.insert(levels.begin(), r);
    }
    return TowerTrunc(tag, std::move(levels));
}

}  // namespace detail

/// Search for towers witnessing that (B+x) and (B+y) have large intersection at
/// finite depth. Returns nullopt when none exists within the search space.
inline std::optional<Certificate> large_certificate(const std::vector<FiniteTree>& trees, const BitWord& x,
                                                    const BitWord& y, const IndexedBase& ib,
                                                    std::size_t depth, const CertificateOptions& opt = {}) {
    ib.validate();
    if (x.size() != depth || y.size() != depth)
        throw input_error("translation vectors must have the certificate depth");
    for (const auto& t : trees)
        if (t.depth() != depth) throw input_error("tree depth differs from certificate depth");
    const std::size_t slices = ib.istar ? *ib.istar : opt.max_slices;
    Budget budget(opt.budget);

    const std::size_t M = trees.size();
    std::vector<WordSet> shifted_x, shifted_y;
    for (const auto& t : trees) {
        shifted_x.push_back(t.top().translate(x));
        shifted_y.push_back(t.top().translate(y));
    }
    std::vector<std::vector<BitWord>> inter(M * M);
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = 0; b < M; ++b)
            std::set_intersection(shifted_x[a].begin(), shifted_x[a].end(), shifted_y[b].begin(),
                                  shifted_y[b].end(), std::back_inserter(inter[a * M + b]));

    Certificate cert;
    WordSet used(depth);
    std::function<bool(std::size_t)> dfs = [&](std::size_t i) -> bool {
        if (i == slices) return true;
        const BaseTag tag = ib.component(i);
        const std::size_t need = tag == BaseTag::O0 ? 1 : 3;
        for (std::size_t a = 0; a < M; ++a)
            for (std::size_t b = 0; b < M; ++b) {
                budget.spend(1, "large certificate search");
                std::vector<BitWord> pick;
                for (const auto& s : inter[a * M + b]) {
                    if (used.contains(s)) continue;
                    pick.push_back(s);
                    if (pick.size() == need) break;
                }
                if (pick.size() < need) continue;
                WordSet top(depth, pick);
                WordSet saved = used;
                for (const auto& s : pick) used.insert(s);
                cert.slices.push_back({a, b, detail::complete_downward(tag, top)});
                if (dfs(i + 1)) return true;
                cert.slices.pop_back();
                used = std::move(saved);
            }
        return false;
    };
    if (!dfs(0)) return std::nullopt;
    return cert;
}

/// Independent re-check of a certificate.
inline Report verify_certificate(const Certificate& cert, const std::vector<FiniteTree>& trees,
                                 const BitWord& x, const BitWord& y, std::size_t depth) {
    Report rep;
    std::vector<WordSet> covers;
    for (std::size_t i = 0; i < cert.slices.size(); ++i) {
        const auto& s = cert.slices[i];
        if (s.n1 >= trees.size() || s.n2 >= trees.size()) {
            rep.fail("index", "slice " + std::to_string(i) + " names a missing tree");
            continue;
        }
        for (const auto& lev : s.tower.levels())
            for (const auto& nu : lev) {
                const BitWord xs = x.prefix(nu.size()), ys = y.prefix(nu.size());
                rep.check("inclusion", trees[s.n1].contains(nu + xs) && trees[s.n2].contains(nu + ys),
                          "slice " + std::to_string(i) + " node " + nu.str());
            }
        covers.push_back(tower_cover(s.tower, depth));
    }
    for (std::size_t i = 0; i < covers.size(); ++i)
        for (std::size_t j = i + 1; j < covers.size(); ++j)
            rep.check("disjoint", covers[i].disjoint_from(covers[j]),
                      "slices " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    if (rep.items().empty()) rep.pass("inclusion");
    return rep;
}

}  // namespace forcelab
