#pragma once

// Seeded property campaigns. Every trial draws from its own generator, seeded
// from the campaign seed and the trial index, so a single trial can be rerun.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "condition.hpp"
#include "construct.hpp"
#include "mtuple.hpp"
#include "rng.hpp"
#include "splitrank.hpp"

namespace forcelab::stress {

enum class Campaign { litlem, ranks, forcing, amalg };

inline const char* to_string(Campaign c) {
    switch (c) {
        case Campaign::litlem: return "litlem";
        case Campaign::ranks: return "ranks";
        case Campaign::forcing: return "forcing";
        case Campaign::amalg: return "amalg";
    }
    return "?";
}

inline Campaign parse_campaign(std::string_view s) {
    for (auto c : {Campaign::litlem, Campaign::ranks, Campaign::forcing, Campaign::amalg})
        if (s == to_string(c)) return c;
    throw input_error("unknown campaign '" + std::string(s) + "' (litlem, ranks, forcing, amalg)");
}

struct Options {
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    std::size_t first = 0;  // index of the first trial
    bool plant = false;     // inject the campaign's known defect
};

struct Counterexample {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::string detail;
};

struct Summary {
    Campaign campaign = Campaign::litlem;
    Options options;
    std::size_t checks = 0;
    std::size_t skipped = 0;
    std::vector<Counterexample> counterexamples;

    bool ok() const noexcept { return counterexamples.empty(); }

    std::string text() const {
        std::ostringstream os;
        os << "campaign " << to_string(campaign) << ": " << options.trials << " trials from seed " << options.seed
           << (options.plant ? " (planted defect)" : "") << ", " << checks << " checks, " << skipped << " skipped, "
           << counterexamples.size() << " violations\n";
        for (const auto& c : counterexamples)
            os << "  trial " << c.trial << " (rerun: --seed " << options.seed << " --first " << c.trial
               << " --trials 1, trial seed " << c.seed << "): " << c.detail << "\n";
        return os.str();
    }
};

/// splitmix64 of the campaign seed and the trial index.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct TrialResult {
    std::size_t checks = 0;
    bool skipped = false;
    std::vector<std::string> failures;

    void check(bool ok, const std::string& what) {
        ++checks;
        if (!ok) failures.push_back(what);
    }
};

namespace detail {

inline BitWord random_word(Rng& rng, std::size_t len) {
    return BitWord::from_u64(len, rng.below(std::uint64_t{1} << len));
}

inline std::string first_failure(const Report& r) {
    const auto f = r.failures();
    return f.empty() ? std::string() : f.front().clause + ": " + f.front().detail;
}

// Splitting rank from the staged definition, recomputed from scratch at every
// stage: -1, a natural number, or -2 for infinite.
class StagedSplitRank {
public:
    explicit StagedSplitRank(const FiniteModel& m) : m_(m) {}

    int rank(OrdSet w) const {
        if (!geq(w, 0)) return -1;
        const int top = static_cast<int>(m_.size()) - std::popcount(w) + 1;
        for (int d = 1; d <= top; ++d)
            if (!geq(w, d)) return d - 1;
        return -2;
    }

private:
    bool geq(OrdSet w, int delta) const {
        const auto a = elements_of(w);
        for (const Relation* R : m_.of_arity(a.size())) {
            if (!R->holds(a)) continue;
            for (std::size_t k = 0; k < a.size(); ++k) {
                std::size_t subs = 0;
                bool extends = delta == 0;
                for (std::size_t x = 0; x < m_.size(); ++x) {
                    auto b = a;
                    b[k] = x;
                    if (!R->holds(b)) continue;
                    ++subs;
                    if (!extends && !((w >> x) & 1U)) extends = geq(w | (OrdSet{1} << x), delta - 1);
                }
                if (subs < m_.theta() || !extends) return false;
            }
        }
        return true;
    }

    const FiniteModel& m_;
};

inline int as_int(const Rank& r) { return r.is_infinite() ? -2 : r.value(); }

inline FiniteModel random_model(Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(rng.range(1, 6));
    const std::size_t theta = static_cast<std::size_t>(rng.range(2, 3));
    std::vector<FiniteModel::RelationSpec> rels;
    std::vector<std::size_t> next_zeta(4, 0);
    const auto count = rng.range(0, 3);
    for (long long r = 0; r < count; ++r) {
        const auto arity = static_cast<std::size_t>(rng.range(1, std::min<long long>(3, static_cast<long long>(n))));
        FiniteModel::RelationSpec spec{next_zeta[arity]++, arity, {}};
        const std::uint64_t density = static_cast<std::uint64_t>(rng.range(2, 7));
        for (OrdSet mask = 1; mask < (OrdSet{1} << n); ++mask)
            if (static_cast<std::size_t>(std::popcount(mask)) == arity && rng.chance(density, 8))
                spec.tuples.push_back(elements_of(mask));
        rels.push_back(std::move(spec));
    }
    return FiniteModel(n, theta, rels);
}

inline FiniteTree random_tree(Rng& rng, std::size_t depth, std::uint64_t num, std::uint64_t den) {
    std::vector<BitWord> top;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << depth); ++x)
        if (rng.chance(num, den)) top.push_back(BitWord::from_u64(depth, x));
    if (top.empty()) top.push_back(BitWord::from_u64(depth, rng.below(std::uint64_t{1} << depth)));
    return FiniteTree(depth, WordSet(depth, top));
}

inline std::vector<Label> pick_labels(Rng& rng, const std::vector<Label>& pool, std::size_t k) {
    std::vector<Label> out;
    for (auto i : rng.sample(pool.size(), k)) out.push_back(pool[i]);
    return out;
}

inline std::vector<Label> rich_labels(const CloneGroupModel& cm) {
    std::vector<Label> out;
    for (std::size_t g = 0; g < cm.groups(); ++g)
        if (cm.rich(g)) out.push_back(cm.member(g, 0));
    return out;
}

// Lemma trial: B independent of size 5..ell; A a translate of part of B,
// possibly disturbed. unique_translate must agree with exhaustive search.
inline TrialResult litlem_trial(std::size_t trial, Rng& rng, bool plant) {
    TrialResult out;
    const std::size_t ell = 5 + trial % 4;
    const std::size_t k = static_cast<std::size_t>(rng.range(5, static_cast<long long>(ell)));
    std::vector<BitWord> b;
    while (b.size() < k) {
        b.push_back(random_word(rng, ell));
        if (!is_independent(std::span<const BitWord>(b))) b.pop_back();
    }
    const WordSet B(ell, b);
    const BitWord x = random_word(rng, ell);
    std::vector<BitWord> a;
    for (auto i : rng.sample(k, static_cast<std::size_t>(rng.range(5, static_cast<long long>(k))))) a.push_back(b[i] + x);
    switch (rng.below(3)) {
        case 0: break;
        case 1: a.push_back(random_word(rng, ell)); break;
        default: a[rng.below(a.size())] = b[rng.below(k)] + b[rng.below(k)] + x; break;
    }
    const WordSet A(ell, a);
    if (A.size() < 5) {
        out.skipped = true;
        return out;
    }
    const auto brute = brute_force_translate(A, B);
    try {
        BitWord got = unique_translate(A, B);
        if (plant) got.flip(0);
        out.check(brute.size() == 1 && brute.front() == got,
                  "unique_translate gives " + got.str() + ", exhaustive search finds " + std::to_string(brute.size()) +
                      " translates");
    } catch (const precondition_error& e) {
        out.check(e.clause() == "sumset" && brute.empty(),
                  std::string("precondition ") + e.clause() + " refused, exhaustive search finds " +
                      std::to_string(brute.size()) + " translates");
    } catch (const internal_inconsistency& e) {
        out.check(false, e.what());
    }
    return out;
}

// A random tuple of the catalog at level ell with k nodes, if one is found.
inline std::optional<MTuple> random_tuple(MCatalogSearch& search, Rng& rng, std::size_t ell, std::size_t k) {
    const Catalog& cat = search.catalog();
    std::vector<BitWord> nodes;
    for (const auto& t : cat.trees)
        for (const auto& x : t.level(ell)) nodes.push_back(x);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.size() < k) return std::nullopt;
    for (int attempt = 0; attempt < 20; ++attempt) {
        std::vector<BitWord> pick;
        for (auto i : rng.sample(nodes.size(), k)) pick.push_back(nodes[i]);
        MTuple m;
        m.ell = ell;
        m.iota = 1;
        m.u = WordSet(ell, pick);
        m.h.assign(1, {});
        m.g.assign(1, {});
        bool dead = false;
        for (std::size_t q = 0; q < pair_count(k) && !dead; ++q) {
            const auto [a, b] = pair_at(q, k);
            const auto opts = search.free_options(0, m.u[a], m.u[b]);
            dead = opts.empty();
            if (dead) break;
            const auto& o = opts[rng.below(opts.size())];
            m.h[0].push_back(o.h);
            m.g[0].push_back(o.g);
        }
        if (!dead) return m;
    }
    return std::nullopt;
}

// Some strict extension of m found by splitting a random node, if any.
inline std::optional<MTuple> random_extension(MCatalogSearch& search, Rng& rng, const MTuple& m) {
    std::vector<MTuple> found;
    const std::size_t split = rng.below(m.u.size());
    search.for_each_splitting_extension(m, split, [&](const MTuple& n) {
        found.push_back(n);
        return found.size() >= 16;
    });
    if (found.empty()) return std::nullopt;
    return found[rng.below(found.size())];
}

inline void rank_laws(TrialResult& out, std::size_t trial, Rng& rng, bool plant) {
    // Whole derivative chain over a small catalog.
    Catalog small{{random_tree(rng, 3, 6, 8)}, 3, IndexedBase::finite(1, BaseTag::O0), {}};
    small.bounds.max_u = 3;
    const DerivativeChain ch = derivative_chain(small);
    const auto& all = ch.tuples;
    bool nested = true;
    for (std::size_t s = 1; s < ch.stages.size(); ++s)
        nested = nested && std::includes(ch.stages[s - 1].begin(), ch.stages[s - 1].end(), ch.stages[s].begin(),
                                         ch.stages[s].end());
    out.check(nested, "derivative stages are not decreasing");
    if (!all.empty()) {
        MCatalogSearch search(small);
        for (int s = 0; s < 10; ++s) {
            const std::size_t idx = rng.below(all.size());
            out.check(search.ndrk(all[idx]) == ch.rank_of(idx),
                      "ndrk of " + all[idx].key() + " disagrees with the derivative chain");
        }
        for (int s = 0; s < 300; ++s) {
            const MTuple& a = all[rng.below(all.size())];
            const MTuple& b = all[rng.below(all.size())];
            const MTuple& c = all[rng.below(all.size())];
            const bool ab = extends(a, b, small.ib), bc = extends(b, c, small.ib);
            out.check(!extends(a, a, small.ib), "extends is reflexive at " + a.key());
            out.check(!(ab && extends(b, a, small.ib)), "extends is symmetric at " + a.key() + ", " + b.key());
            out.check(!(ab && bc) || extends(a, c, small.ib), "extends is not transitive at " + a.key());
        }
    }

    // Sampled tuples of a deeper catalog.
    const std::size_t depth = 3 + trial % 4;
    static constexpr std::uint64_t density[] = {6, 5, 4, 3};
    std::vector<FiniteTree> trees;
    const auto M = rng.range(1, 2);
    for (long long t = 0; t < M; ++t) trees.push_back(random_tree(rng, depth, density[depth - 3], 8));
    Catalog cat{trees, depth, IndexedBase::finite(1, BaseTag::O0), {}};
    cat.bounds.max_u = 4;
    cat.bounds.max_g = 2;
    cat.bounds.budget = 50000000ULL;
    MCatalogSearch search(cat);
    for (int s = 0; s < 6; ++s) {
        const std::size_t ell = static_cast<std::size_t>(rng.range(1, static_cast<long long>(depth) - 1));
        const auto m = random_tuple(search, rng, ell, static_cast<std::size_t>(rng.range(2, 3)));
        if (!m) continue;
        out.check(validate_mtuple(*m, cat).ok(), "sampled tuple " + m->key() + " is not in the catalog");
        const std::size_t r = search.ndrk(*m);
        for (std::uint64_t x = 1; x < (std::uint64_t{1} << ell); ++x) {
            const BitWord rho = BitWord::from_u64(ell, x);
            const std::size_t rt = search.ndrk(translate_m(*m, rho)) + (plant ? 1 : 0);
            out.check(rt == r, "ndrk of " + m->key() + " changes under translation by " + rho.str());
        }
        for (std::size_t drop = 0; m->u.size() > 2 && drop < m->u.size(); ++drop) {
            std::vector<BitWord> keep;
            for (std::size_t a = 0; a < m->u.size(); ++a)
                if (a != drop) keep.push_back(m->u[a]);
            out.check(r <= search.ndrk(restrict_m(*m, WordSet(ell, keep))),
                      "restriction of " + m->key() + " lowers ndrk");
        }
        const auto b = random_extension(search, rng, *m);
        if (!b) continue;
        out.check(extends(*m, *b, cat.ib) && !extends(*b, *m, cat.ib),
                  "splitting extension " + b->key() + " is not strictly above " + m->key());
        if (const auto c = random_extension(search, rng, *b))
            out.check(extends(*m, *c, cat.ib), "extends is not transitive along " + m->key() + " < " + b->key());
    }
}

inline void split_laws(TrialResult& out, Rng& rng, bool plant) {
    const FiniteModel model = random_model(rng);
    RankEvaluator ev(model);
    const StagedSplitRank ref(model);
    for (OrdSet w = 1; w < (OrdSet{1} << model.size()); ++w) {
        const Rank r = ev.rank(w);
        const int got = as_int(r) + (plant && !r.is_infinite() ? 1 : 0);
        out.check(got == ref.rank(w), "splitting rank of " + ordset_text(w) + " is " + r.str() + ", reference " +
                                          std::to_string(ref.rank(w)));
        if (!r.is_infinite()) out.check(witness_holds(ev.witness(w), ev), "witness for " + ordset_text(w) + " fails");
    }
}

inline TrialResult ranks_trial(std::size_t trial, Rng& rng, bool plant) {
    TrialResult out;
    rank_laws(out, trial, rng, plant);
    split_laws(out, rng, plant);
    return out;
}

// Constructions over random labels, validated and compared with their input.
inline TrialResult forcing_trial(std::size_t trial, Rng& rng, bool plant) {
    TrialResult out;
    const CloneGroupModel& cm = bundled_model();
    const FiniteModel& model = cm.model();
    std::vector<Label> universe(model.size());
    for (std::size_t a = 0; a < universe.size(); ++a) universe[a] = a;
    const std::vector<Label> labels = pick_labels(rng, universe, 6);
    const std::vector<Label> w(labels.begin(), labels.begin() + 5);
    ConstructOptions opt;
    if (rng.coin()) {
        opt.tails = TailMode::random;
        opt.seed = rng.next();
    }

    const std::size_t kind = trial % 3;
    const IndexedBase ib = kind == 2 ? IndexedBase::omega({BaseTag::O0})
                                     : (rng.coin() ? IndexedBase::finite(6, BaseTag::O0) : IndexedBase::per());
    Condition before = genesis(w, ib, opt);
    Condition after = before;
    if (kind == 1) {
        after = add_ordinal(before, labels[5], ib, opt);
    } else if (kind == 2) {
        if (rng.chance(1, 4)) before = add_ordinal(before, labels[5], ib, opt);
        after = bump_iota(before, ib, opt);
    }
    if (plant) after.eta[rng.below(after.eta.size())].flip(after.n - 1);

    const std::string what = kind == 0 ? "genesis" : kind == 1 ? "add" : "bump";
    const Report rep = validate(after, model, ib);
    out.check(rep.ok(), what + " on " + label_text(w) + " over " + ib.describe() + " fails " + first_failure(rep));
    const Report ord = leq_report(before, after);
    out.check(ord.ok(), what + " output is not stronger than its input: " + first_failure(ord));
    return out;
}

// Twin conditions over the clone-group model with kernels of size 0, 2 and 3.
inline TrialResult amalg_trial(std::size_t trial, Rng& rng, bool plant) {
    TrialResult out;
    const CloneGroupModel& cm = bundled_model();
    const FiniteModel& model = cm.model();
    static constexpr std::size_t kernels[] = {0, 2, 3};
    const std::size_t ksize = kernels[trial % 3];
    const std::vector<Label> w = pick_labels(rng, rich_labels(cm), 5);
    std::vector<Label> kernel = pick_labels(rng, w, ksize);
    const IndexedBase ib = rng.coin() ? IndexedBase::finite(6, BaseTag::O0) : IndexedBase::per();
    ConstructOptions opt;
    if (rng.coin()) {
        opt.tails = TailMode::random;
        opt.seed = rng.next();
    }
    const Condition p = genesis(w, ib, opt);
    const Condition q = delta_twin(p, twin_map(p, kernel, cm));
    const std::string where = label_text(w) + " kernel " + label_text(kernel) + " over " + ib.describe();

    const Report delta = check_delta(p, q, model);
    out.check(delta.ok(), "twins " + where + " fail " + first_failure(delta));
    if (!delta.ok()) return out;
    const Condition r = amalgamate(p, q, ib, model);
    const Report rep = validate(r, model, ib);
    out.check(rep.ok(), "amalgamation of " + where + " fails " + first_failure(rep));
    out.check(leq(p, r), "amalgamation of " + where + " is not below p");
    out.check(leq(q, r), "amalgamation of " + where + " is not below q");
    const std::size_t d = w.size() - ksize;
    const std::size_t expected = p.M + d * d + (plant ? 1 : 0);
    out.check(r.M == expected, "amalgamation of " + where + " has M = " + std::to_string(r.M) + ", expected " +
                                   std::to_string(expected));
    return out;
}

}  // namespace detail

/// One trial; exceptions other than property failures are reported as failures too.
inline TrialResult run_trial(Campaign c, std::size_t trial, std::uint64_t seed, bool plant) {
    Rng rng(seed);
    try {
        switch (c) {
            case Campaign::litlem: return detail::litlem_trial(trial, rng, plant);
            case Campaign::ranks: return detail::ranks_trial(trial, rng, plant);
            case Campaign::forcing: return detail::forcing_trial(trial, rng, plant);
            case Campaign::amalg: return detail::amalg_trial(trial, rng, plant);
        }
    } catch (const budget_exceeded&) {
        throw;
    } catch (const std::exception& e) {
        TrialResult out;
        out.check(false, std::string("unexpected error: ") + e.what());
        return out;
    }
    return {};
}

inline Summary run(Campaign c, const Options& opt) {
    Summary s;
    s.campaign = c;
    s.options = opt;
    for (std::size_t t = opt.first; t < opt.first + opt.trials; ++t) {
        const std::uint64_t ts = trial_seed(opt.seed, t);
        TrialResult r = run_trial(c, t, ts, opt.plant);
        s.checks += r.checks;
        s.skipped += r.skipped ? 1 : 0;
        if (!r.failures.empty()) {
            std::string detail = r.failures.front();
            if (r.failures.size() > 1) detail += " (+" + std::to_string(r.failures.size() - 1) + " more)";
            s.counterexamples.push_back({t, ts, std::move(detail)});
        }
    }
    return s;
}

}  // namespace forcelab::stress
