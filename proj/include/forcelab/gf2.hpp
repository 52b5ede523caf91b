#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace forcelab {

/// A word of binary digits of fixed length, an element of 2^len.
/// Coordinate 0 is the leftmost digit of the text form.
class BitWord {
public:
    BitWord() = default;
    explicit BitWord(std::size_t len) : len_(len), w_((len + 63) / 64, 0) {}

    static BitWord from_string(std::string_view s) {
        BitWord b(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1')
                b.set(i);
            else if (s[i] != '0')
                throw input_error("bad digit '" + std::string(1, s[i]) + "' at offset " +
                                  std::to_string(i) + " in word \"" + std::string(s) + "\"");
        }
        return b;
    }

    static BitWord unit(std::size_t len, std::size_t i) {
        BitWord b(len);
        b.set(i);
        return b;
    }

    // Coordinate i receives bit i of `value`.
    static BitWord from_u64(std::size_t len, std::uint64_t value) {
        BitWord b(len);
        if (len) b.w_[0] = len >= 64 ? value : (value & ((std::uint64_t{1} << len) - 1));
        return b;
    }

    std::uint64_t to_u64() const {
        if (len_ > 64) throw capacity_error("word longer than 64 digits");
        return len_ ? w_[0] : 0;
    }

    std::size_t size() const noexcept { return len_; }

    bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1U; }
    bool operator[](std::size_t i) const { return test(i); }

    void set(std::size_t i, bool v = true) {
        const std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (v)
            w_[i >> 6] |= m;
        else
            w_[i >> 6] &= ~m;
    }
    void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    BitWord& operator^=(const BitWord& o) {
        if (o.len_ != len_)
            throw input_error("length mismatch in addition: " + std::to_string(len_) + " vs " +
                              std::to_string(o.len_));
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] ^= o.w_[k];
        return *this;
    }
    BitWord& operator+=(const BitWord& o) { return *this ^= o; }
    friend BitWord operator+(BitWord a, const BitWord& b) { return a ^= b; }

    /// First l digits.
    BitWord prefix(std::size_t l) const {
        if (l > len_)
            throw input_error("restriction to " + std::to_string(l) + " exceeds length " +
                              std::to_string(len_));
        BitWord r(l);
        for (std::size_t k = 0; k < r.w_.size(); ++k) r.w_[k] = w_[k];
        r.trim();
        return r;
    }

    /// Zero-extended copy of length l >= size().
    BitWord padded(std::size_t l) const {
        if (l < len_) throw input_error("padding to a shorter length");
        BitWord r(l);
        for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] = w_[k];
        return r;
    }

    BitWord concat(const BitWord& tail) const {
        BitWord r = padded(len_ + tail.len_);
        for (std::size_t i = 0; i < tail.len_; ++i)
            if (tail.test(i)) r.set(len_ + i);
        return r;
    }

    BitWord child(bool bit) const {
        BitWord r = padded(len_ + 1);
        if (bit) r.set(len_);
        return r;
    }

    bool is_zero() const {
        for (auto x : w_)
            if (x) return false;
        return true;
    }

    std::size_t popcount() const {
        std::size_t c = 0;
        for (auto x : w_) c += static_cast<std::size_t>(std::popcount(x));
        return c;
    }

    /// this ⊴ other
    bool is_prefix_of(const BitWord& other) const {
        return len_ <= other.len_ && compare_prefix(*this, other, len_) == 0;
    }

    std::optional<std::size_t> first_one() const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(w_[k]));
        return std::nullopt;
    }

    std::string str() const {
        std::string s(len_, '0');
        for (std::size_t i = 0; i < len_; ++i)
            if (test(i)) s[i] = '1';
        return s;
    }

    std::size_t hash() const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL ^ len_;
        for (auto x : w_) {
            h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }

    // Lexicographic comparison of the first l digits; 0 precedes 1.
    static int compare_prefix(const BitWord& a, const BitWord& b, std::size_t l) {
        const std::size_t full = l >> 6;
        for (std::size_t k = 0; k < full; ++k) {
            const std::uint64_t x = a.w_[k] ^ b.w_[k];
            if (x) return (a.w_[k] >> std::countr_zero(x)) & 1U ? 1 : -1;
        }
        const std::size_t rem = l & 63;
        if (rem) {
            const std::uint64_t mask = (std::uint64_t{1} << rem) - 1;
            const std::uint64_t x = (a.w_[full] ^ b.w_[full]) & mask;
            if (x) return (a.w_[full] >> std::countr_zero(x)) & 1U ? 1 : -1;
        }
        return 0;
    }

    // Length first, then lexicographic.
    friend std::strong_ordering operator<=>(const BitWord& a, const BitWord& b) {
        if (a.len_ != b.len_) return a.len_ <=> b.len_;
        const int c = compare_prefix(a, b, a.len_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    friend bool operator==(const BitWord& a, const BitWord& b) {
        return a.len_ == b.len_ && std::equal(a.w_.begin(), a.w_.end(), b.w_.begin());
    }

    const auto& blocks() const noexcept { return w_; }

private:
    void trim() {
        const std::size_t rem = len_ & 63;
        if (rem && !w_.empty()) w_.back() &= (std::uint64_t{1} << rem) - 1;
    }

    std::size_t len_ = 0;
    boost::container::small_vector<std::uint64_t, 2> w_;
};

struct BitWordHash {
    std::size_t operator()(const BitWord& b) const noexcept { return b.hash(); }
};

inline BitWord add(const BitWord& a, const BitWord& b) { return a + b; }
inline BitWord restrict(const BitWord& a, std::size_t l) { return a.prefix(l); }

/// A finite set of words sharing one length, kept sorted and duplicate free.
class WordSet {
public:
    WordSet() = default;
    explicit WordSet(std::size_t len) : len_(len) {}
    WordSet(std::size_t len, std::vector<BitWord> members) : len_(len), m_(std::move(members)) {
        for (const auto& b : m_)
            if (b.size() != len_)
                throw input_error("word of length " + std::to_string(b.size()) +
                                  " in a set of length " + std::to_string(len_));
        normalize();
    }

    static WordSet of(std::initializer_list<std::string_view> digits) {
        std::vector<BitWord> v;
        for (auto d : digits) v.push_back(BitWord::from_string(d));
        if (v.empty()) throw input_error("cannot infer length of an empty set");
        const std::size_t l = v.front().size();
        return WordSet(l, std::move(v));
    }

    std::size_t len() const noexcept { return len_; }
    std::size_t size() const noexcept { return m_.size(); }
    bool empty() const noexcept { return m_.empty(); }
    auto begin() const { return m_.begin(); }
    auto end() const { return m_.end(); }
    const BitWord& operator[](std::size_t i) const { return m_[i]; }
    const std::vector<BitWord>& members() const noexcept { return m_; }

    bool contains(const BitWord& b) const {
        return b.size() == len_ && std::binary_search(m_.begin(), m_.end(), b);
    }

    std::optional<std::size_t> index_of(const BitWord& b) const {
        auto it = std::lower_bound(m_.begin(), m_.end(), b);
        if (it == m_.end() || !(*it == b)) return std::nullopt;
        return static_cast<std::size_t>(it - m_.begin());
    }

    void insert(const BitWord& b) {
        if (b.size() != len_) throw input_error("inserted word has the wrong length");
        auto it = std::lower_bound(m_.begin(), m_.end(), b);
        if (it == m_.end() || !(*it == b)) m_.insert(it, b);
    }

    WordSet translate(const BitWord& rho) const {
        std::vector<BitWord> v;
        v.reserve(m_.size());
        for (const auto& b : m_) v.push_back(b + rho);
        return WordSet(len_, std::move(v));
    }

    WordSet restrict(std::size_t l) const {
        std::vector<BitWord> v;
        v.reserve(m_.size());
        for (const auto& b : m_) v.push_back(b.prefix(l));
        return WordSet(l, std::move(v));
    }

    /// All sums a + a' with a, a' in the set (the zero word included when nonempty).
    WordSet sums() const {
        std::vector<BitWord> v;
        for (std::size_t i = 0; i < m_.size(); ++i)
            for (std::size_t j = i; j < m_.size(); ++j) v.push_back(m_[i] + m_[j]);
        return WordSet(len_, std::move(v));
    }

    bool subset_of(const WordSet& o) const {
        if (o.len_ != len_) return empty();
        return std::includes(o.m_.begin(), o.m_.end(), m_.begin(), m_.end());
    }

    bool disjoint_from(const WordSet& o) const {
        if (o.len_ != len_) return true;
        auto a = m_.begin();
        auto b = o.m_.begin();
        while (a != m_.end() && b != o.m_.end()) {
            if (*a == *b) return false;
            if (*a < *b)
                ++a;
            else
                ++b;
        }
        return true;
    }

    friend bool operator==(const WordSet& a, const WordSet& b) {
        return a.len_ == b.len_ && a.m_ == b.m_;
    }
    friend std::strong_ordering operator<=>(const WordSet& a, const WordSet& b) {
        if (a.len_ != b.len_) return a.len_ <=> b.len_;
        return std::lexicographical_compare_three_way(a.m_.begin(), a.m_.end(), b.m_.begin(),
                                                      b.m_.end());
    }

private:
    void normalize() {
        std::sort(m_.begin(), m_.end());
        m_.erase(std::unique(m_.begin(), m_.end()), m_.end());
    }

    std::size_t len_ = 0;
    std::vector<BitWord> m_;
};

/// Incremental echelon basis over GF(2).
class EchelonBasis {
public:
    explicit EchelonBasis(std::size_t len) : len_(len), pivot_(len) {}

    // Reduces v against the basis; adds it and returns true when independent.
    bool insert(BitWord v) {
        if (v.size() != len_) throw input_error("vector length differs from basis length");
        while (auto p = v.first_one()) {
            if (!pivot_[*p]) {
                pivot_[*p] = std::move(v);
                ++rank_;
                return true;
            }
            v ^= *pivot_[*p];
        }
        return false;
    }

    bool spans(BitWord v) const {
        while (auto p = v.first_one()) {
            if (!pivot_[*p]) return false;
            v ^= *pivot_[*p];
        }
        return true;
    }

    std::size_t rank() const noexcept { return rank_; }

private:
    std::size_t len_;
    std::vector<std::optional<BitWord>> pivot_;
    std::size_t rank_ = 0;
};

/// True iff no nonempty sub-multiset of the list sums to zero. Repeats and the
/// zero word make a list dependent.
inline bool is_independent(std::span<const BitWord> list) {
    if (list.empty()) return true;
    const std::size_t l = list.front().size();
    if (list.size() > l) return false;
    EchelonBasis basis(l);
    for (const auto& v : list)
        if (!basis.insert(v)) return false;
    return true;
}

inline bool is_independent(const WordSet& s) { return is_independent(std::span(s.members())); }

inline std::size_t gf2_rank(std::span<const BitWord> list) {
    if (list.empty()) return 0;
    EchelonBasis basis(list.front().size());
    for (const auto& v : list) basis.insert(v);
    return basis.rank();
}

enum class TailMode { standard, random };

/// Words rho_0..rho_{count-1} of length total_len, anchors[a] a prefix of rho_a
/// (missing anchors count as empty), with tails on [prefix_len, total_len) independent.
inline std::vector<BitWord> extend_independent(std::size_t prefix_len, std::size_t total_len,
                                               std::size_t count,
                                               std::span<const BitWord> anchors,
                                               TailMode mode = TailMode::standard,
                                               std::uint64_t seed = 0) {
    if (total_len < prefix_len) throw input_error("total length below prefix length");
    if (count > total_len - prefix_len)
        throw capacity_error("need " + std::to_string(count) + " independent tails but only " +
                             std::to_string(total_len - prefix_len) +
                             " coordinates are free; total length must be at least " +
                             std::to_string(prefix_len + count));
    if (anchors.size() > count) throw input_error("more anchors than requested words");
    for (const auto& a : anchors)
        if (a.size() > prefix_len)
            throw input_error("anchor of length " + std::to_string(a.size()) +
                              " exceeds prefix length " + std::to_string(prefix_len));

    const std::size_t dim = total_len - prefix_len;
    std::vector<BitWord> tails;
    tails.reserve(count);
    if (mode == TailMode::standard) {
        for (std::size_t a = 0; a < count; ++a) tails.push_back(BitWord::unit(dim, a));
    } else {
        Rng rng(seed);
        EchelonBasis basis(dim);
        while (tails.size() < count) {
            BitWord t(dim);
            for (std::size_t i = 0; i < dim; ++i)
                if (rng.coin()) t.set(i);
            if (basis.insert(t)) tails.push_back(t);
        }
    }

    std::vector<BitWord> out;
    out.reserve(count);
    for (std::size_t a = 0; a < count; ++a) {
        BitWord head = a < anchors.size() ? anchors[a].padded(prefix_len) : BitWord(prefix_len);
        out.push_back(head.concat(tails[a]));
    }
    return out;
}

/// The unique x with A + x ⊆ B, for B independent, |A| >= 5 and A + A ⊆ B + B.
inline BitWord unique_translate(const WordSet& A, const WordSet& B) {
    if (A.len() != B.len())
        throw precondition_error("length", "A and B have different word lengths");
    if (!is_independent(B))
        throw precondition_error("independence", "B is not linearly independent");
    if (A.size() < 5)
        throw precondition_error("size", "|A| = " + std::to_string(A.size()) + " < 5");
    if (!A.sums().subset_of(B.sums()))
        throw precondition_error("sumset", "A + A is not contained in B + B");

    std::vector<BitWord> cand;
    cand.reserve(A.size() * B.size());
    for (const auto& a : A)
        for (const auto& b : B) cand.push_back(a + b);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (const auto& x : cand) {
        bool ok = true;
        for (const auto& a : A)
            if (!B.contains(a + x)) {
                ok = false;
                break;
            }
        if (ok) return x;
    }
    throw internal_inconsistency("no translate found although all preconditions hold");
}

/// Every x in 2^len with A + x ⊆ B, by exhaustive scan.
inline std::vector<BitWord> brute_force_translate(const WordSet& A, const WordSet& B,
                                                  std::size_t cap = 20) {
    if (A.len() != B.len()) throw input_error("A and B have different word lengths");
    const std::size_t l = A.len();
    if (l > cap)
        throw capacity_error("brute-force scan over 2^" + std::to_string(l) +
                             " exceeds the cap 2^" + std::to_string(cap));
    std::unordered_set<std::uint64_t> bset;
    for (const auto& b : B) bset.insert(b.to_u64());
    std::vector<std::uint64_t> avals;
    for (const auto& a : A) avals.push_back(a.to_u64());
    std::vector<BitWord> out;
    const std::uint64_t total = std::uint64_t{1} << l;
    for (std::uint64_t x = 0; x < total; ++x) {
        bool ok = true;
        for (auto a : avals)
            if (!bset.count(a ^ x)) {
                ok = false;
                break;
            }
        if (ok) out.push_back(BitWord::from_u64(l, x));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace forcelab

template <>
struct std::hash<forcelab::BitWord> {
    std::size_t operator()(const forcelab::BitWord& b) const noexcept { return b.hash(); }
};
