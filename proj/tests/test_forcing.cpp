#include <gtest/gtest.h>

#include <forcelab/construct.hpp>
#include <forcelab/recover.hpp>

#include <algorithm>
#include <memory>
#include <set>
#include <string>
#include <vector>

using namespace forcelab;

namespace {

const CloneGroupModel& cm() { return bundled_model(); }
const FiniteModel& model() { return bundled_model().model(); }

// First members of rich clone groups, so every label has a twin one above it.
std::vector<Label> five() { return {cm().member(0, 0), cm().member(1, 0), cm().member(3, 0), cm().member(4, 0), cm().member(6, 0)}; }
Label sixth() { return cm().member(7, 0); }
Label seventh() { return cm().member(9, 0); }

IndexedBase o6() { return IndexedBase::finite(6, BaseTag::O0); }
IndexedBase per() { return IndexedBase::per(); }
IndexedBase omega0() { return IndexedBase::omega({BaseTag::O0}); }

// Level-n node sets of every tree straight from eta, g and h.
std::vector<std::set<std::string>> levels_by_hand(const Condition& p) {
    std::vector<std::set<std::string>> out(p.M);
    for (std::size_t a = 0; a < p.w.size(); ++a)
        for (std::size_t b = a + 1; b < p.w.size(); ++b)
            for (std::size_t i = 0; i < p.iota; ++i) {
                const std::size_t m = p.h_of(i, p.w[a], p.w[b]);
                for (const auto& s : p.g_of(i, p.w[a], p.w[b])) {
                    std::string x = p.eta[a].str(), y = p.eta[b].str();
                    const std::string t = s.str();
                    for (std::size_t j = 0; j < t.size(); ++j) {
                        x[j] = x[j] == t[j] ? '0' : '1';
                        y[j] = y[j] == t[j] ? '0' : '1';
                    }
                    out[m].insert(x);
                    out[m].insert(y);
                }
            }
    return out;
}

// Rank over GF(2) by elimination on character rows.
std::size_t rank_by_hand(std::vector<std::string> rows) {
    std::size_t rank = 0;
    const std::size_t len = rows.empty() ? 0 : rows[0].size();
    for (std::size_t col = 0; col < len && rank < rows.size(); ++col) {
        std::size_t piv = rank;
        while (piv < rows.size() && rows[piv][col] != '1') ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[rank]);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (r != rank && rows[r][col] == '1')
                for (std::size_t j = 0; j < len; ++j) rows[r][j] = rows[r][j] == rows[rank][j] ? '0' : '1';
        ++rank;
    }
    return rank;
}

struct Built {
    std::string name;
    Condition p;
    IndexedBase ib;
};

std::vector<Built> small_constructions() {
    std::vector<Built> out;
    const Condition g6 = genesis(five(), o6());
    out.push_back({"genesis o6", g6, o6()});
    out.push_back({"genesis per", genesis(five(), per()), per()});
    out.push_back({"add o6", add_ordinal(g6, sixth(), o6()), o6()});
    const Condition go = genesis(five(), omega0());
    out.push_back({"bump omega", bump_iota(go, omega0()), omega0()});
    ConstructOptions ro;
    ro.tails = TailMode::random;
    ro.seed = 11;
    out.push_back({"add per random tails", add_ordinal(genesis(five(), per(), ro), sixth(), per(), ro), per()});
    return out;
}

Condition twin_of(const Condition& p, const std::vector<Label>& kernel) { return delta_twin(p, twin_map(p, kernel, cm())); }

}  // namespace

TEST(Genesis, ParametersOverSixSingletons) {
    const Condition p = genesis(five(), o6());
    EXPECT_EQ(p.w, five());
    EXPECT_EQ(p.iota, 6u);
    EXPECT_EQ(p.M, 60u);
    ASSERT_EQ(p.r.size(), p.M);
    for (auto x : p.r) EXPECT_EQ(x, p.n);
    for (std::size_t q = 0; q < 10; ++q)
        for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(p.h[i][q], q * 6 + i);
}

TEST(Genesis, ParametersOverPerfectBase) {
    const Condition p = genesis(five(), per());
    EXPECT_EQ(p.iota, 1u);
    EXPECT_EQ(p.M, 10u);
    for (std::size_t q = 0; q < 10; ++q) EXPECT_EQ(p.h[0][q], q);
}

TEST(Genesis, ValidOverEachNiceBase) {
    for (const auto& ib : {o6(), per(), omega0(), IndexedBase::omega({BaseTag::O0, BaseTag::Oper})}) {
        const Condition p = genesis(five(), ib);
        const Report r = validate(p, model(), ib);
        EXPECT_TRUE(r.ok()) << ib.describe() << "\n" << r.text();
    }
}

TEST(Genesis, NeedsExactlyFiveLabels) {
    EXPECT_THROW(genesis({0, 2, 5, 7}, o6()), input_error);
    EXPECT_THROW(genesis({0, 2, 5, 7, 10, 12}, o6()), input_error);
}

TEST(Genesis, TooFewWordsPerPairIsInapplicable) {
    EXPECT_THROW(genesis(five(), IndexedBase::finite(2, BaseTag::O0)), inapplicable_error);
}

TEST(Genesis, LabelOrderDoesNotMatter) {
    auto shuffled = five();
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(genesis(shuffled, o6()), genesis(five(), o6()));
}

TEST(Genesis, RepeatableAndSeeded) {
    EXPECT_EQ(genesis(five(), per()), genesis(five(), per()));
    ConstructOptions a;
    a.tails = TailMode::random;
    a.seed = 3;
    ConstructOptions b = a;
    b.seed = 4;
    EXPECT_EQ(genesis(five(), per(), a), genesis(five(), per(), a));
    const Condition pa = genesis(five(), per(), a), pb = genesis(five(), per(), b);
    EXPECT_NE(pa, pb);
    EXPECT_TRUE(validate(pb, model(), per()).ok());
}

TEST(Structure, TreeLevelsMatchDirectComputation) {
    for (const auto& c : small_constructions()) {
        const auto want = levels_by_hand(c.p);
        ASSERT_EQ(c.p.trees.size(), want.size()) << c.name;
        for (std::size_t m = 0; m < c.p.M; ++m) {
            std::set<std::string> have;
            for (const auto& x : c.p.trees[m].top()) have.insert(x.str());
            EXPECT_EQ(have, want[m]) << c.name << " tree " << m;
        }
    }
}

TEST(Structure, EtaAndGWordsIndependentByElimination) {
    for (const auto& c : small_constructions()) {
        std::set<std::string> words;
        for (const auto& e : c.p.eta) words.insert(e.str());
        for (const auto& row : c.p.g)
            for (const auto& s : row)
                for (const auto& x : s) words.insert(x.str());
        EXPECT_EQ(rank_by_hand({words.begin(), words.end()}), words.size()) << c.name;
    }
}

TEST(Structure, EveryPairCoveredBySixWords) {
    for (const auto& c : small_constructions())
        for (std::size_t q = 0; q < c.p.pairs(); ++q) {
            std::set<BitWord> cover;
            for (std::size_t i = 0; i < c.p.iota; ++i) {
                EXPECT_TRUE(base_member(c.ib.component(i), c.p.g[i][q])) << c.name;
                cover.insert(c.p.g[i][q].begin(), c.p.g[i][q].end());
            }
            EXPECT_GE(cover.size(), 6u) << c.name;
        }
}

TEST(Add, ExtendsAndValidates) {
    const Condition g = genesis(five(), o6());
    const Condition a = add_ordinal(g, sixth(), o6());
    EXPECT_EQ(a.w.size(), 6u);
    EXPECT_EQ(a.M, 90u);
    EXPECT_TRUE(leq(g, a));
    EXPECT_FALSE(leq(a, g));
    const Report r = validate(a, model(), o6());
    EXPECT_TRUE(r.ok()) << r.text();
}

TEST(Add, NewPairsUseFreshTrees) {
    const Condition g = genesis(five(), per());
    const Condition a = add_ordinal(g, sixth(), per());
    EXPECT_EQ(a.M, 15u);
    for (std::size_t x = 0; x < g.w.size(); ++x) {
        const Label alpha = g.w[x];
        EXPECT_EQ(a.h_of(0, alpha, sixth()), g.M + x);
        EXPECT_EQ(a.r[g.M + x], a.n);
    }
    for (std::size_t m = 0; m < g.M; ++m) EXPECT_EQ(a.r[m], g.r[m]);
}

TEST(Add, LabelAlreadyPresentRejected) {
    const Condition g = genesis(five(), o6());
    EXPECT_THROW(add_ordinal(g, five()[2], o6()), input_error);
}

TEST(Add, TwoStepChain) {
    const Condition g = genesis(five(), per());
    const Condition a = add_ordinal(g, sixth(), per());
    const Condition b = add_ordinal(a, seventh(), per());
    EXPECT_TRUE(leq(g, a));
    EXPECT_TRUE(leq(a, b));
    EXPECT_TRUE(leq(g, b));
    EXPECT_EQ(b.M, a.M + a.w.size());
    const Report r = validate(b, model(), per());
    EXPECT_TRUE(r.ok()) << r.text();
}

TEST(Bump, FiniteBaseInapplicable) {
    EXPECT_THROW(bump_iota(genesis(five(), o6()), o6()), inapplicable_error);
    EXPECT_THROW(bump_iota(genesis(five(), per()), per()), inapplicable_error);
}

TEST(Bump, OmegaBaseGainsAComponent) {
    const Condition g = genesis(five(), omega0());
    const Condition b = bump_iota(g, omega0());
    EXPECT_EQ(b.iota, g.iota + 1);
    EXPECT_EQ(b.M, g.M + 10);
    for (std::size_t i = 0; i < g.iota; ++i) EXPECT_EQ(b.h[i], g.h[i]);
    for (std::size_t q = 0; q < 10; ++q) EXPECT_EQ(b.h[g.iota][q], g.M + q);
    EXPECT_TRUE(leq(g, b));
    const Report r = validate(b, model(), omega0());
    EXPECT_TRUE(r.ok()) << r.text();
}

TEST(Leq, PartialOrderOnConstructedConditions) {
    const Condition g = genesis(five(), o6());
    const Condition a = add_ordinal(g, sixth(), o6());
    const Condition b = add_ordinal(a, seventh(), o6());
    ConstructOptions ro;
    ro.tails = TailMode::random;
    ro.seed = 5;
    const Condition other = add_ordinal(g, seventh(), o6(), ro);
    const std::vector<Condition> all{g, a, b, other};
    for (const auto& x : all) EXPECT_TRUE(leq(x, x));
    for (const auto& x : all)
        for (const auto& y : all) {
            if (leq(x, y) && leq(y, x)) {
                EXPECT_EQ(x, y);
            }
            for (const auto& z : all) {
                if (leq(x, y) && leq(y, z)) {
                    EXPECT_TRUE(leq(x, z));
                }
            }
        }
    EXPECT_FALSE(leq(a, other));
    EXPECT_FALSE(leq(other, a));
}

TEST(Leq, SwappedTreesFail) {
    const Condition g = genesis(five(), per());
    Condition a = add_ordinal(g, sixth(), per());
    std::swap(a.trees[0], a.trees[1]);
    const Report r = leq_report(g, a);
    EXPECT_TRUE(r.failed("trees"));
}

TEST(Leq, MismatchedHFails) {
    const Condition g = genesis(five(), per());
    Condition a = add_ordinal(g, sixth(), per());
    const std::size_t q = pair_index(a.pos_of(five()[0]), a.pos_of(five()[1]), a.w.size());
    a.h[0][q] = (a.h[0][q] + 1) % g.M;
    EXPECT_TRUE(leq_report(g, a).failed("h/g"));
}

TEST(Leq, EtaPrefixMismatchFails) {
    const Condition g = genesis(five(), per());
    Condition a = add_ordinal(g, sixth(), per());
    a.eta[0].flip(0);
    EXPECT_TRUE(leq_report(g, a).failed("eta"));
}

TEST(Validate, TamperedEtaFailsLevels) {
    Condition p = genesis(five(), per());
    p.eta[2].flip(p.n - 1);
    const Report r = validate(p, model(), per());
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(r.failed("levels") || r.failed("independence")) << r.text();
    EXPECT_TRUE(r.ok("sizes"));
}

TEST(Validate, ZeroRFails) {
    Condition p = genesis(five(), o6());
    p.r[3] = 0;
    EXPECT_TRUE(validate(p, model(), o6()).failed("r"));
}

TEST(Validate, MovedTreeNodeFails) {
    Condition p = genesis(five(), o6());
    std::vector<BitWord> t0(p.trees[0].top().begin(), p.trees[0].top().end());
    std::vector<BitWord> t1(p.trees[1].top().begin(), p.trees[1].top().end());
    t1.push_back(t0.back());
    t0.pop_back();
    p.trees[0] = FiniteTree(p.n, WordSet(p.n, t0));
    p.trees[1] = FiniteTree(p.n, WordSet(p.n, t1));
    EXPECT_TRUE(validate(p, model(), o6()).failed("levels"));
}

TEST(Validate, DependentWordsFail) {
    Condition p = genesis(five(), per());
    p.eta[4] = p.eta[0] + p.eta[1] + p.eta[2];
    EXPECT_TRUE(validate_structure(p, per()).failed("independence"));
}

TEST(Validate, WrongBaseFailsG) {
    const Condition p = genesis(five(), per());
    EXPECT_TRUE(validate(p, model(), o6()).failed("sizes"));
    EXPECT_TRUE(validate_structure(p, IndexedBase::finite(1, BaseTag::O0)).failed("g"));
}

TEST(Validate, LabelOutsideModelRejected) {
    const Condition p = genesis({0, 1, 2, 3, 40}, o6());
    EXPECT_THROW(validate(p, model(), o6()), input_error);
}

TEST(Catalog, GenesisHasOneGroupAtTheTop) {
    const Condition p = genesis(five(), o6());
    const ConditionCatalog cat = catalog(p);
    ASSERT_EQ(cat.groups.size(), 1u);
    EXPECT_EQ(cat.groups[0].ell, p.n);
    EXPECT_EQ(cat.groups[0].labels(p), p.w);
    EXPECT_GT(cat.entries(), 0.0L);
}

TEST(Catalog, SampledEntriesPassAndTamperedEntriesFail) {
    const Condition p = genesis(five(), per());
    const ConditionCatalog cat = catalog(p);
    Rng rng(8);
    for (int t = 0; t < 10; ++t) {
        const CatalogEntry e = sample_entry(p, cat.groups[rng.below(cat.groups.size())], rng);
        EXPECT_TRUE(check_entry(p, e).ok()) << check_entry(p, e).text();
        CatalogEntry bad_v = e;
        bad_v.v.back() = sixth();
        EXPECT_TRUE(check_entry(p, bad_v).failed("entry-v"));
        CatalogEntry bad_h = e;
        bad_h.m.h[0][0] = (bad_h.m.h[0][0] + 1) % p.M;
        EXPECT_FALSE(check_entry(p, bad_h).ok());
    }
}

TEST(Catalog, MaterializeRefusesOversizedCatalog) {
    const Condition p = genesis(five(), o6());
    EXPECT_THROW(materialize(p, catalog(p), 1000), budget_exceeded);
}

TEST(Catalog, SmallBudgetExceeded) {
    const Condition p = add_ordinal(genesis(five(), o6()), sixth(), o6());
    CatalogOptions opt;
    opt.budget = 100;
    EXPECT_THROW(catalog(p, opt), budget_exceeded);
}

TEST(Delta, IdentityTwin) {
    const Condition p = genesis(five(), o6());
    EXPECT_EQ(delta_twin(p, {}), p);
    const Report r = check_delta(p, p, model());
    EXPECT_TRUE(r.ok()) << r.text();
}

TEST(Delta, RelabellingOntoExistingLabelRejected) {
    const Condition p = genesis(five(), o6());
    EXPECT_THROW(delta_twin(p, {{five()[0], five()[1]}}), input_error);
}

TEST(Delta, OrderBreakingRelabellingRejected) {
    const Condition p = genesis(five(), o6());
    EXPECT_THROW(delta_twin(p, {{five()[0], 25}}), input_error);
}

TEST(Delta, DifferentEtaFailsTransport) {
    const Condition p = genesis(five(), per());
    ConstructOptions ro;
    ro.tails = TailMode::random;
    ro.seed = 2;
    const Condition q = delta_twin(genesis(five(), per(), ro), twin_map(p, {}, cm()));
    const Report r = check_delta(p, q, model());
    EXPECT_TRUE(r.failed("eta transport"));
    EXPECT_TRUE(r.failed("catalog transport"));
}

TEST(Delta, WitnessAtTheMovedPositionDetected) {
    // {0, 2} has rank -1 witnessed at coordinate 1, the position of 2 above the kernel {0}.
    const FiniteModel m(12, 2, {{0, 2, {{0, 2}, {1, 2}}}});
    const Condition p = genesis({0, 2, 4, 6, 8}, per());
    const Condition q = delta_twin(p, {{2, 3}, {4, 5}, {6, 7}, {8, 9}});
    const Report r = check_delta(p, q, m);
    EXPECT_TRUE(r.failed("kernel positions")) << r.text();
    EXPECT_TRUE(r.failed("rank transport"));
    EXPECT_TRUE(r.ok("eta transport"));
}

TEST(Delta, TwinsInTheCloneModelPass) {
    const Condition p = genesis(five(), o6());
    for (const std::vector<Label>& kernel : {std::vector<Label>{}, {five()[1], five()[3]}, {five()[0], five()[2], five()[4]}}) {
        const Report r = check_delta(p, twin_of(p, kernel), model());
        EXPECT_TRUE(r.ok()) << r.text();
    }
}

TEST(Amalgamate, KernelOfTwo) {
    const Condition p = genesis(five(), o6());
    const Condition q = twin_of(p, {five()[0], five()[2]});
    const Condition r = amalgamate(p, q, o6(), model());
    EXPECT_EQ(r.M, 69u);
    EXPECT_EQ(r.w.size(), 8u);
    EXPECT_TRUE(leq(p, r));
    EXPECT_TRUE(leq(q, r));
    const Report rep = validate(r, model(), o6());
    EXPECT_TRUE(rep.ok()) << rep.text();
}

TEST(Amalgamate, CrossPairsUseDistinctFreshTrees) {
    const Condition p = genesis(five(), per());
    const Condition q = twin_of(p, {five()[1]});
    const Condition r = amalgamate(p, q, per(), model());
    EXPECT_EQ(r.M, p.M + 16);
    std::vector<Label> D, E;
    for (auto a : p.w)
        if (!q.contains(a)) D.push_back(a);
    for (auto a : q.w)
        if (!p.contains(a)) E.push_back(a);
    std::set<std::size_t> used;
    for (std::size_t x = 0; x < D.size(); ++x)
        for (std::size_t y = 0; y < E.size(); ++y) {
            const std::size_t m = r.h_of(0, D[x], E[y]);
            EXPECT_EQ(m, p.M + x * D.size() + y);
            used.insert(m);
            EXPECT_EQ(r.r[m], r.n);
        }
    EXPECT_EQ(used.size(), 16u);
    for (std::size_t m = 0; m < p.M; ++m) EXPECT_EQ(r.r[m], p.r[m]);
}

TEST(Amalgamate, IdenticalConditionsKeepM) {
    const Condition p = genesis(five(), per());
    const Condition r = amalgamate(p, p, per(), model());
    EXPECT_EQ(r.M, p.M);
    EXPECT_EQ(r.w, p.w);
    EXPECT_TRUE(leq(p, r));
    EXPECT_TRUE(validate(r, model(), per()).ok());
}

TEST(Amalgamate, NonTwinsRejected) {
    const Condition p = genesis(five(), per());
    ConstructOptions ro;
    ro.tails = TailMode::random;
    ro.seed = 2;
    const Condition q = delta_twin(genesis(five(), per(), ro), twin_map(p, {}, cm()));
    try {
        amalgamate(p, q, per(), model());
        FAIL() << "expected a precondition failure";
    } catch (const precondition_error& e) {
        EXPECT_EQ(e.clause(), "delta");
    }
}

TEST(Amalgamate, CatalogBelowPMatchesCatalogOfP) {
    const Condition p = genesis(five(), o6());
    const Condition q = twin_of(p, {five()[0], five()[2]});
    const Condition r = amalgamate(p, q, o6(), model());
    const ConditionCatalog cp = catalog(p), cr = catalog(r);

    std::size_t matched = 0;
    Rng rng(4);
    for (const auto& gr : cr.groups) {
        if (gr.ell != p.n) continue;
        const auto v = gr.labels(r);
        if (!std::all_of(v.begin(), v.end(), [&](Label a) { return p.contains(a); })) continue;
        // Keep only trees of p.
        CatalogGroup low = gr;
        bool alive = true;
        for (auto& list : low.options) {
            std::vector<SigmaOption> keep;
            for (auto o : *list) {
                std::erase_if(o.trees, [&](std::size_t t) { return t >= p.M; });
                if (!o.trees.empty()) keep.push_back(std::move(o));
            }
            alive = alive && keep.size() >= 6;
            list = std::make_shared<const std::vector<SigmaOption>>(std::move(keep));
        }
        const auto it = std::find_if(cp.groups.begin(), cp.groups.end(),
                                     [&](const CatalogGroup& x) { return x.ell == gr.ell && x.labels(p) == v; });
        if (!alive) {
            EXPECT_EQ(it, cp.groups.end());
            continue;
        }
        ASSERT_NE(it, cp.groups.end()) << label_text(v);
        ++matched;
        ASSERT_EQ(it->options.size(), low.options.size());
        for (std::size_t x = 0; x < low.options.size(); ++x) {
            ASSERT_EQ(it->opts(x).size(), low.opts(x).size());
            for (std::size_t j = 0; j < low.opts(x).size(); ++j) {
                EXPECT_EQ(it->opts(x)[j].sigma, low.opts(x)[j].sigma);
                EXPECT_EQ(it->opts(x)[j].trees, low.opts(x)[j].trees);
            }
        }
        for (int s = 0; s < 5; ++s) {
            EXPECT_TRUE(check_entry(p, sample_entry(r, low, rng)).ok());
            EXPECT_TRUE(check_entry(r, sample_entry(p, *it, rng)).ok());
        }
    }
    std::size_t top_of_p = 0;
    for (const auto& g : cp.groups) top_of_p += g.ell == p.n ? 1 : 0;
    EXPECT_EQ(matched, top_of_p);
    EXPECT_GT(matched, 0u);
}

TEST(Recover, HarvestedTuplesComeBack) {
    Rng rng(3);
    const Condition g = genesis(five(), o6());
    const Condition a = add_ordinal(g, sixth(), o6());
    const Condition gp = genesis(five(), per());
    for (const auto& [p, ib] : std::vector<std::pair<Condition, IndexedBase>>{{g, o6()}, {a, o6()}, {gp, per()}})
        for (const auto& h : harvest(p, rng, 8)) {
            const Recovery r = recover_membership(p, h.m, ib);
            EXPECT_EQ(r.rho, h.tau);
            EXPECT_TRUE(check_entry(p, r.entry).ok());
            EXPECT_GE(r.v.size(), 5u);
        }
}

TEST(Recover, UntranslatedEntryGivesZero) {
    const Condition p = genesis(five(), o6());
    const ConditionCatalog cat = catalog(p);
    const CatalogEntry e = first_entry(p, cat.groups[0]);
    const Recovery r = recover_membership(p, e.m, o6());
    EXPECT_EQ(r.rho, BitWord(p.n));
    EXPECT_EQ(r.v, e.v);
    EXPECT_EQ(r.entry.m, e.m);
}

TEST(Recover, FourNodesRefused) {
    const Condition p = genesis(five(), o6());
    const CatalogEntry e = first_entry(p, catalog(p).groups[0]);
    std::vector<BitWord> keep(e.m.u.begin(), e.m.u.end());
    keep.pop_back();
    const MTuple m4 = restrict_m(e.m, WordSet(p.n, keep));
    try {
        recover_membership(p, m4, o6());
        FAIL() << "expected a precondition failure";
    } catch (const precondition_error& e) {
        EXPECT_EQ(e.clause(), "size");
    }
}

TEST(Recover, ForeignTupleNeverPassesSilently) {
    const Condition p = genesis(five(), per());
    ConstructOptions ro;
    ro.tails = TailMode::random;
    ro.seed = 9;
    const Condition other = genesis(five(), per(), ro);
    Rng rng(1);
    for (const auto& h : harvest(other, rng, 3)) {
        try {
            const Recovery r = recover_membership(p, h.m, per());
            EXPECT_TRUE(check_entry(p, r.entry).ok());
        } catch (const precondition_error& e) {
            EXPECT_EQ(e.clause(), "valid");
        }
    }
}

TEST(ChainLimit, SingleCondition) {
    const Condition g = genesis(five(), o6());
    const ChainLimit lim = chain_limit({g}, o6());
    EXPECT_TRUE(lim.report.ok()) << lim.report.text();
    EXPECT_EQ(lim.trees.size(), g.M);
    EXPECT_EQ(lim.eta.size(), 5u);
}

TEST(ChainLimit, GrowingChain) {
    const Condition g = genesis(five(), per());
    const Condition a = add_ordinal(g, sixth(), per());
    const Condition b = add_ordinal(a, seventh(), per());
    const ChainLimit lim = chain_limit({g, a, b}, per());
    EXPECT_TRUE(lim.report.ok()) << lim.report.text();
    EXPECT_EQ(lim.eta.size(), 7u);
    for (std::size_t x = 0; x < g.w.size(); ++x) EXPECT_TRUE(g.eta[x].is_prefix_of(lim.eta.at(g.w[x])));
}

TEST(ChainLimit, ShuffledChainRejected) {
    const Condition g = genesis(five(), per());
    const Condition a = add_ordinal(g, sixth(), per());
    try {
        chain_limit({a, g}, per());
        FAIL() << "expected a precondition failure";
    } catch (const precondition_error& e) {
        EXPECT_EQ(e.clause(), "ordered");
    }
}
