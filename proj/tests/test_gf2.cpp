#include <gtest/gtest.h>

#include <forcelab/gf2.hpp>

#include <set>

using namespace forcelab;

namespace {

BitWord W(const char* s) { return BitWord::from_string(s); }

// Oracle: a set is independent iff no nonempty subset sums to zero.
bool independent_by_subsets(const std::vector<BitWord>& s) {
    const std::size_t k = s.size();
    if (k == 0) return true;
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << k); ++m) {
        BitWord acc(s.front().size());
        for (std::size_t i = 0; i < k; ++i)
            if ((m >> i) & 1U) acc ^= s[i];
        if (acc.is_zero()) return false;
    }
    return true;
}

WordSet units(std::size_t len, std::size_t count) {
    std::vector<BitWord> v;
    for (std::size_t i = 0; i < count; ++i) v.push_back(BitWord::unit(len, i));
    return WordSet(len, v);
}

}  // namespace

TEST(BitWord, TextRoundTripAndCoordinates) {
    const BitWord b = W("10110");
    EXPECT_EQ(b.size(), 5u);
    EXPECT_TRUE(b.test(0));
    EXPECT_FALSE(b.test(1));
    EXPECT_EQ(b.str(), "10110");
    EXPECT_THROW(BitWord::from_string("10a"), input_error);
}

TEST(BitWord, AdditionExamples) {
    EXPECT_EQ(add(W("101"), W("011")), W("110"));
    EXPECT_TRUE(add(W("1101"), W("1101")).is_zero());
    EXPECT_EQ(add(W("1101"), W("0000")), W("1101"));
    EXPECT_THROW(add(W("10"), W("101")), input_error);
}

TEST(BitWord, RestrictExamples) {
    EXPECT_EQ(restrict(W("10110"), 3), W("101"));
    EXPECT_EQ(restrict(W("10110"), 5), W("10110"));
    EXPECT_EQ(restrict(W("10110"), 0).size(), 0u);
    EXPECT_THROW(restrict(W("101"), 4), input_error);
}

TEST(BitWord, GroupLawsExhaustiveUpToSix) {
    for (std::size_t l = 1; l <= 6; ++l) {
        const std::uint64_t n = std::uint64_t{1} << l;
        for (std::uint64_t a = 0; a < n; ++a)
            for (std::uint64_t b = 0; b < n; ++b) {
                const BitWord x = BitWord::from_u64(l, a), y = BitWord::from_u64(l, b);
                ASSERT_EQ(add(x, add(x, y)), y);
                ASSERT_EQ(add(x, y), add(y, x));
                ASSERT_EQ((x + y).to_u64(), a ^ b);
            }
    }
}

TEST(BitWord, OrderIsLengthThenLexicographic) {
    EXPECT_LT(W("11"), W("000"));
    EXPECT_LT(W("011"), W("100"));
    EXPECT_LT(W("0110"), W("0111"));
    std::vector<BitWord> all;
    for (std::uint64_t x = 0; x < 16; ++x) all.push_back(BitWord::from_u64(4, x));
    std::sort(all.begin(), all.end());
    for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LT(all[i - 1].str(), all[i].str());
}

TEST(BitWord, LongWordsSpanBlocks) {
    BitWord a(130), b(130);
    a.set(0);
    a.set(64);
    a.set(129);
    b.set(129);
    EXPECT_EQ((a + b).popcount(), 2u);
    EXPECT_EQ(a.prefix(65).popcount(), 2u);
    EXPECT_TRUE(a.prefix(70).is_prefix_of(a));
    EXPECT_EQ(BitWord::from_string(a.str()), a);
}

TEST(Independence, Examples) {
    EXPECT_TRUE(is_independent(units(5, 5)));
    EXPECT_FALSE(is_independent(WordSet::of({"110", "011", "101"})));
    EXPECT_FALSE(is_independent(WordSet::of({"000", "100"})));
    EXPECT_TRUE(is_independent(WordSet(4)));
}

TEST(Independence, DuplicatesInListsAreDependent) {
    std::vector<BitWord> v{W("100"), W("100")};
    EXPECT_FALSE(is_independent(std::span<const BitWord>(v)));
}

TEST(Independence, AgreesWithSubsetOracleOnAllSubsetsOfLengthFour) {
    std::vector<BitWord> all;
    for (std::uint64_t x = 0; x < 16; ++x) all.push_back(BitWord::from_u64(4, x));
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << 16); ++m) {
        std::vector<BitWord> s;
        for (std::size_t i = 0; i < 16; ++i)
            if ((m >> i) & 1U) s.push_back(all[i]);
        if (s.size() > 5) {
            ASSERT_FALSE(is_independent(WordSet(4, s)));
            continue;
        }
        ASSERT_EQ(is_independent(WordSet(4, s)), independent_by_subsets(s)) << "mask " << m;
    }
}

TEST(ExtendIndependent, StandardTailsAppended) {
    std::vector<BitWord> anchors{W("00"), W("01"), W("10")};
    auto out = extend_independent(2, 5, 3, anchors);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0], W("00100"));
    EXPECT_EQ(out[1], W("01010"));
    EXPECT_EQ(out[2], W("10001"));
}

TEST(ExtendIndependent, CapacityBoundary) {
    EXPECT_NO_THROW(extend_independent(2, 5, 3, {}));
    EXPECT_THROW(extend_independent(2, 5, 4, {}), capacity_error);
}

TEST(ExtendIndependent, PropertyAnchorsAndIndependentTails) {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t prefix = rng.range(0, 6), count = rng.range(1, 8);
        const std::size_t total = prefix + count + rng.range(0, 4);
        std::vector<BitWord> anchors;
        for (std::size_t a = 0; a < count; ++a)
            anchors.push_back(BitWord::from_u64(rng.range(0, prefix), rng.next()));
        for (auto mode : {TailMode::standard, TailMode::random}) {
            auto out = extend_independent(prefix, total, count, anchors, mode, rng.next());
            std::vector<BitWord> tails;
            for (std::size_t a = 0; a < count; ++a) {
                ASSERT_EQ(out[a].size(), total);
                ASSERT_TRUE(anchors[a].is_prefix_of(out[a]));
                BitWord t(total - prefix);
                for (std::size_t i = prefix; i < total; ++i) t.set(i - prefix, out[a].test(i));
                tails.push_back(t);
            }
            ASSERT_TRUE(is_independent(std::span<const BitWord>(tails)));
        }
    }
}

TEST(UniqueTranslate, IdentityTranslate) {
    const WordSet B = units(5, 5);
    EXPECT_EQ(unique_translate(B, B), W("00000"));
}

TEST(UniqueTranslate, ShiftedUnitsRecoverLastUnit) {
    const WordSet B = units(6, 6);
    std::vector<BitWord> a;
    for (std::size_t i = 0; i < 5; ++i) a.push_back(BitWord::unit(6, i) + BitWord::unit(6, 5));
    const WordSet A(6, a);
    // Frozen from the brute-force scan over all 64 candidates.
    const auto all = brute_force_translate(A, B);
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0], W("000001"));
    EXPECT_EQ(unique_translate(A, B), W("000001"));
}

TEST(UniqueTranslate, PreconditionClausesAreNamed) {
    auto clause_of = [](const WordSet& A, const WordSet& B) -> std::string {
        try {
            unique_translate(A, B);
        } catch (const precondition_error& e) {
            return e.clause();
        }
        return "none";
    };
    const WordSet B = units(6, 6);
    EXPECT_EQ(clause_of(units(5, 5), B), "length");
    EXPECT_EQ(clause_of(units(6, 5), WordSet::of({"110000", "011000", "101000", "000100", "000010"})),
              "independence");
    EXPECT_EQ(clause_of(units(6, 4), B), "size");
    std::vector<BitWord> a;
    for (std::size_t i = 0; i < 4; ++i) a.push_back(BitWord::unit(6, i));
    a.push_back(BitWord::unit(6, 4) + BitWord::unit(6, 5));
    EXPECT_EQ(clause_of(WordSet(6, a), B), "sumset");
}

// Exhaustive scan of length 4 with the standard basis as B: every 4-element A with
// A + A inside B + B. No such A has two translates (translates of an independent
// set are rigid once |A| >= 3), but some have none, so the size clause is what
// keeps the lemma true. Counts are frozen from the scan.
TEST(UniqueTranslate, FourElementSetsAtLengthFour) {
    const WordSet B = units(4, 4);
    const WordSet BB = B.sums();
    std::size_t candidates = 0, without = 0, with_many = 0;
    std::optional<WordSet> first_without;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << 16); ++m) {
        if (std::popcount(m) != 4) continue;
        std::vector<BitWord> a;
        for (std::uint64_t x = 0; x < 16; ++x)
            if ((m >> x) & 1U) a.push_back(BitWord::from_u64(4, x));
        const WordSet A(4, a);
        if (!A.sums().subset_of(BB)) continue;
        ++candidates;
        const auto xs = brute_force_translate(A, B);
        if (xs.empty()) {
            ++without;
            if (!first_without) first_without = A;
        }
        if (xs.size() >= 2) ++with_many;
    }
    EXPECT_EQ(candidates, 32u);
    EXPECT_EQ(with_many, 0u);
    EXPECT_EQ(without, 16u);
    ASSERT_TRUE(first_without.has_value());
    EXPECT_EQ(*first_without, WordSet::of({"0000", "0110", "1010", "1100"}));
    try {
        unique_translate(*first_without, B);
        FAIL() << "expected a precondition error";
    } catch (const precondition_error& e) {
        EXPECT_EQ(e.clause(), "size");
    }
}

TEST(BruteForceTranslate, SmallCases) {
    const auto one = brute_force_translate(WordSet::of({"101"}), WordSet::of({"101"}));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0], W("000"));
    EXPECT_TRUE(brute_force_translate(WordSet::of({"000", "111"}), WordSet::of({"100", "010"})).empty());
    EXPECT_THROW(brute_force_translate(WordSet(21, {BitWord(21)}), WordSet(21, {BitWord(21)})), capacity_error);
    EXPECT_NO_THROW(brute_force_translate(WordSet(21, {BitWord(21)}), WordSet(21, {BitWord(21)}), 21));
}

TEST(UniqueTranslate, AgreesWithBruteForceOnRandomInstances) {
    Rng rng(3);
    for (std::size_t l = 5; l <= 8; ++l)
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t dim = rng.range(5, l);
            std::vector<BitWord> b;
            EchelonBasis basis(l);
            while (b.size() < dim) {
                BitWord w = BitWord::from_u64(l, rng.next());
                if (basis.insert(w)) b.push_back(w);
            }
            const WordSet B(l, b);
            const auto idx = rng.sample(dim, rng.range(5, dim));
            const BitWord x = BitWord::from_u64(l, rng.next());
            std::vector<BitWord> a;
            for (auto i : idx) a.push_back(b[i] + x);
            const WordSet A(l, a);
            const auto all = brute_force_translate(A, B);
            ASSERT_EQ(all.size(), 1u);
            ASSERT_EQ(unique_translate(A, B), all[0]);
            ASSERT_EQ(all[0], x);
        }
}

TEST(WordSetOps, TranslateRestrictSums) {
    const WordSet u = WordSet::of({"001", "010", "111"});
    EXPECT_EQ(u.translate(W("011")), WordSet::of({"010", "001", "100"}));
    EXPECT_EQ(u.restrict(2), WordSet::of({"00", "01", "11"}));
    EXPECT_EQ(u.sums().size(), 4u);
    EXPECT_TRUE(u.sums().contains(W("000")));
    EXPECT_THROW(WordSet(3, {W("01")}), input_error);
}
