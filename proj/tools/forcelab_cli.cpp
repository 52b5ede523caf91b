// forcelab: command-line front end.
//
// Exit codes: 0 ok, 1 a demand or property failed, 2 input error, 3 budget exceeded.

#include <forcelab/campaigns.hpp>
#include <forcelab/construct.hpp>
#include <forcelab/io.hpp>
#include <forcelab/recover.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace {

using namespace forcelab;
using json = io::json;

enum Exit : int { exit_ok = 0, exit_violation = 1, exit_input = 2, exit_budget = 3 };

struct Global {
    std::uint64_t seed = 0;
    std::optional<unsigned long long> budget;
    std::string format = "text";
    std::string model_path;
    std::string base = "o6";

    bool json_out() const { return format == "json"; }
};

Global g;

constexpr std::size_t detail_lines = 5;

const FiniteModel& model() {
    static std::optional<FiniteModel> loaded;
    if (g.model_path.empty()) return bundled_model().model();
    if (!loaded) loaded = io::model_from_json(io::read_file(g.model_path));
    return *loaded;
}

IndexedBase base() { return io::parse_base_spec(g.base); }

Condition load_condition(const std::string& path) {
    try {
        return io::condition_from_json(io::read_file(path));
    } catch (const input_error& e) {
        throw input_error(path + ": " + e.what());
    }
}

MTuple load_tuple(const std::string& path) {
    try {
        return io::mtuple_from_json(io::read_file(path));
    } catch (const input_error& e) {
        throw input_error(path + ": " + e.what());
    }
}

void emit(const json& j) { std::cout << io::dump(j); }

int report_exit(const Report& r) { return r.ok() ? exit_ok : exit_violation; }

// ---- validate

int cmd_validate(const std::string& path) {
    const Condition p = load_condition(path);
    ValidateOptions vo;
    if (g.budget) vo.catalog.budget = vo.rank_budget = *g.budget;
    const Report rep = validate(p, model(), base(), vo);
    if (g.json_out()) {
        emit(io::to_json(rep));
    } else {
        std::cout << path << ": n = " << p.n << ", w = " << label_text(p.w) << ", M = " << p.M << "\n" << rep.text(detail_lines);
        std::cout << (rep.ok() ? "valid\n" : "INVALID\n");
    }
    return report_exit(rep);
}

// ---- construct

struct ConstructArgs {
    std::string kind;
    std::vector<Label> labels;
    std::string input;
    std::string second;
    Label beta = 0;
    std::vector<Label> kernel;
    bool kernel_given = false;
    std::string tails = "standard";
    std::size_t extra_levels = 0;
    std::string out;
    bool check = false;
};

int cmd_construct(const ConstructArgs& a) {
    const IndexedBase ib = base();
    ConstructOptions opt;
    opt.tails = a.tails == "random" ? TailMode::random : TailMode::standard;
    opt.seed = g.seed;
    opt.extra_levels = a.extra_levels;

    Condition result;
    std::vector<Condition> below;
    if (a.kind == "genesis") {
        result = genesis(a.labels, ib, opt);
    } else {
        if (a.input.empty()) throw input_error(a.kind + " needs an input condition file");
        const Condition p = load_condition(a.input);
        below.push_back(p);
        if (a.kind == "add") {
            result = add_ordinal(p, a.beta, ib, opt);
        } else if (a.kind == "bump") {
            result = bump_iota(p, ib, opt);
        } else {
            Condition q;
            if (!a.second.empty()) {
                q = load_condition(a.second);
            } else if (a.kernel_given) {
                if (!g.model_path.empty())
                    throw input_error("--kernel builds twins in the bundled model; give a second file with --model");
                q = delta_twin(p, twin_map(p, a.kernel, bundled_model()));
            } else {
                throw input_error("amalgamate needs a second condition or --kernel");
            }
            below.push_back(q);
            result = amalgamate(p, q, ib, model(), opt);
        }
    }

    int code = exit_ok;
    for (const auto& p : below) {
        const Report r = leq_report(p, result);
        if (!r.ok()) {
            std::cerr << "forcelab: result is not an extension of its input\n" << r.text(detail_lines);
            code = exit_violation;
        }
    }
    if (a.check) {
        ValidateOptions vo;
        if (g.budget) vo.catalog.budget = vo.rank_budget = *g.budget;
        const Report r = validate(result, model(), ib, vo);
        if (!r.ok()) {
            std::cerr << "forcelab: result fails validation\n" << r.text(detail_lines);
            code = exit_violation;
        }
    }
    if (a.out.empty())
        emit(io::to_json(result));
    else
        io::write_file(a.out, io::to_json(result));
    if (!g.json_out())
        std::cerr << a.kind << ": w = " << label_text(result.w) << ", n = " << result.n << ", iota = " << result.iota
                  << ", M = " << result.M << "\n";
    return code;
}

// ---- rank

struct RankArgs {
    std::string kind;
    std::string catalog_path;
    std::size_t full_tree = 0;
    std::size_t max_u = 3;
    std::string tuple_path;
    bool chain = false;
    std::vector<std::size_t> set;
    bool stats = false;
};

int cmd_rank_ndrk(const RankArgs& a) {
    Catalog cat;
    if (!a.catalog_path.empty()) {
        cat = io::catalog_from_json(io::read_file(a.catalog_path));
    } else if (a.full_tree > 0) {
        if (a.full_tree > 20) throw capacity_error("full trees are limited to depth 20");
        std::vector<BitWord> top;
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << a.full_tree); ++x)
            top.push_back(BitWord::from_u64(a.full_tree, x));
        cat.depth = a.full_tree;
        cat.trees.emplace_back(a.full_tree, WordSet(a.full_tree, top));
        cat.ib = IndexedBase::finite(1, BaseTag::O0);
        cat.bounds.max_u = a.max_u;
    } else {
        throw input_error("rank ndrk needs --catalog or --full-tree");
    }
    if (g.budget) cat.bounds.budget = *g.budget;
    const Report crep = cat.validate();
    if (!crep.ok()) throw input_error("catalog: " + crep.failures().front().detail);

    json out = json::object();
    if (!a.tuple_path.empty()) {
        const MTuple m = load_tuple(a.tuple_path);
        const Report mr = validate_mtuple(m, cat);
        if (!mr.ok()) {
            if (g.json_out())
                emit({{"tuple", io::to_json(mr)}});
            else
                std::cout << "tuple is not in the catalog\n" << mr.text(detail_lines);
            return exit_violation;
        }
        MCatalogSearch search(cat);
        const std::size_t r = search.ndrk(m);
        out["ndrk"] = r;
        if (a.stats) out["stats"] = {{"evaluations", search.evaluations()}, {"memo", search.memo_size()},
                                     {"inspections", search.budget().used()}};
    }
    if (a.chain) {
        const DerivativeChain ch = derivative_chain(cat);
        json sizes = json::array();
        for (const auto& s : ch.stages) sizes.push_back(s.size());
        out["chain"] = {{"tuples", ch.tuples.size()}, {"stage_sizes", sizes}};
    }
    if (a.tuple_path.empty() && !a.chain) throw input_error("rank ndrk needs --tuple or --chain");

    if (g.json_out()) {
        emit(out);
    } else {
        if (out.contains("ndrk")) std::cout << "ndrk = " << out["ndrk"].get<std::size_t>() << "\n";
        if (out.contains("stats"))
            std::cout << "evaluations = " << out["stats"]["evaluations"] << ", memo = " << out["stats"]["memo"]
                      << ", inspections = " << out["stats"]["inspections"] << "\n";
        if (out.contains("chain")) {
            std::cout << "tuples = " << out["chain"]["tuples"] << "\nstage sizes:";
            for (const auto& s : out["chain"]["stage_sizes"]) std::cout << " " << s;
            std::cout << "\n";
        }
    }
    return exit_ok;
}

int cmd_rank_split(const RankArgs& a) {
    const FiniteModel& m = model();
    if (a.set.empty()) throw input_error("rank split needs --set");
    RankEvaluator ev(m, g.budget.value_or(~0ULL));
    const OrdSet w = ordset_of(a.set);
    const Rank r = ev.rank(w);
    json out = {{"set", a.set}, {"rank", r.str()}};
    if (!r.is_infinite()) {
        const RankWitness wt = ev.witness(w);
        out["witness"] = {{"zeta", wt.zeta}, {"k", wt.k}, {"verified", witness_holds(wt, ev)}};
    }
    if (a.stats) out["stats"] = {{"memo", ev.memo_size()}, {"evaluations", ev.evaluations()}};
    if (g.json_out()) {
        emit(out);
    } else {
        std::cout << "rank " << ordset_text(w) << " = " << r.str() << "\n";
        if (out.contains("witness"))
            std::cout << "witness: relation zeta = " << out["witness"]["zeta"] << " of arity " << a.set.size()
                      << ", coordinate k = " << out["witness"]["k"]
                      << (out["witness"]["verified"].get<bool>() ? " (verified)" : " (NOT verified)") << "\n";
        if (out.contains("stats"))
            std::cout << "memo = " << out["stats"]["memo"] << ", evaluations = " << out["stats"]["evaluations"] << "\n";
    }
    if (out.contains("witness") && !out["witness"]["verified"].get<bool>()) return exit_violation;
    return exit_ok;
}

// ---- catalog

int cmd_catalog(const std::string& path, std::size_t max_v, std::optional<std::size_t> limit) {
    const Condition p = load_condition(path);
    CatalogOptions opt;
    opt.max_v = max_v;
    if (g.budget) opt.budget = *g.budget;
    const ConditionCatalog cat = catalog(p, opt);
    json groups = json::array();
    for (const auto& grp : cat.groups)
        groups.push_back({{"ell", grp.ell}, {"v", grp.labels(p)}, {"entries", static_cast<double>(entry_count(grp))}});
    json out = {{"groups", groups}, {"entries", static_cast<double>(cat.entries())}};
    if (limit) {
        json entries = json::array();
        for (const auto& e : materialize(p, cat, *limit)) entries.push_back(io::to_json(e));
        out["materialized"] = entries;
    }
    if (g.json_out()) {
        emit(out);
        return exit_ok;
    }
    std::cout << path << ": " << cat.groups.size() << " groups, " << static_cast<double>(cat.entries())
              << " entries\n";
    for (const auto& grp : cat.groups)
        std::cout << "  level " << grp.ell << " v = " << label_text(grp.labels(p)) << ": "
                  << static_cast<double>(entry_count(grp)) << " entries\n";
    if (limit)
        for (const auto& e : out["materialized"]) std::cout << "  " << e.dump() << "\n";
    return exit_ok;
}

// ---- recover

int cmd_recover(const std::string& path, const std::string& tuple_path, std::size_t count) {
    const Condition p = load_condition(path);
    const IndexedBase ib = base();
    if (!tuple_path.empty()) {
        const MTuple m = load_tuple(tuple_path);
        try {
            const Recovery r = recover_membership(p, m, ib);
            if (g.json_out())
                emit({{"ok", true}, {"rho", r.rho.str()}, {"v", r.v}});
            else
                std::cout << "rho = " << r.rho.str() << "\nv = " << label_text(r.v) << "\n";
            return exit_ok;
        } catch (const theorem_violation& e) {
            if (g.json_out())
                emit({{"ok", false}, {"violation", e.what()}});
            else
                std::cout << "ALARM: " << e.what() << "\n";
            return exit_violation;
        }
    }
    Rng rng(g.seed);
    CatalogOptions opt;
    if (g.budget) opt.budget = *g.budget;
    const auto got = harvest(p, rng, count, opt);
    json failures = json::array();
    for (std::size_t t = 0; t < got.size(); ++t) {
        try {
            const Recovery r = recover_membership(p, got[t].m, ib);
            if (!(r.rho == got[t].tau))
                failures.push_back({{"tuple", t}, {"detail", "recovered " + r.rho.str() + ", planted " + got[t].tau.str()}});
        } catch (const theorem_violation& e) {
            failures.push_back({{"tuple", t}, {"detail", e.what()}});
        }
    }
    if (g.json_out()) {
        emit({{"harvested", got.size()}, {"violations", failures}});
    } else {
        std::cout << "harvested " << got.size() << " tuples, " << failures.size() << " violations\n";
        for (const auto& f : failures)
            std::cout << "  tuple " << f["tuple"] << ": " << f["detail"].get<std::string>() << "\n";
    }
    return failures.empty() ? exit_ok : exit_violation;
}

// ---- chain

int cmd_chain(const std::vector<std::string>& paths) {
    std::vector<Condition> chain;
    for (const auto& path : paths) chain.push_back(load_condition(path));
    const ChainLimit lim = chain_limit(chain, base());
    if (g.json_out()) {
        json eta = json::object();
        for (const auto& [a, x] : lim.eta) eta[std::to_string(a)] = x.str();
        emit({{"eta", eta}, {"trees", lim.trees.size()}, {"report", io::to_json(lim.report)}});
    } else {
        std::cout << "limit: " << lim.eta.size() << " labels, " << lim.trees.size() << " trees\n" << lim.report.text(detail_lines);
    }
    return report_exit(lim.report);
}

// ---- nice-check

int cmd_nice(std::size_t depth, bool planted) {
    Report all;
    if (planted) {
        all.merge(check_simple_base(PlantedEqualLengthBase{}, depth), "planted ");
    } else {
        const IndexedBase ib = base();
        std::set<BaseTag> tags(ib.tags.begin(), ib.tags.end());
        for (auto t : tags) all.merge(check_simple_base(t, depth), to_string(t) + std::string(" "));
        all.merge(check_nice(ib, depth), "nice ");
    }
    if (g.json_out())
        emit(io::to_json(all));
    else
        std::cout << all.text(detail_lines);
    return report_exit(all);
}

// ---- stress

int cmd_stress(const std::string& campaign, std::size_t trials, std::size_t first, bool plant) {
    stress::Options opt;
    opt.trials = trials;
    opt.seed = g.seed;
    opt.first = first;
    opt.plant = plant;
    const stress::Summary s = stress::run(stress::parse_campaign(campaign), opt);
    if (g.json_out()) {
        json cx = json::array();
        for (const auto& c : s.counterexamples) cx.push_back({{"trial", c.trial}, {"seed", c.seed}, {"detail", c.detail}});
        emit({{"campaign", campaign}, {"trials", trials}, {"seed", g.seed}, {"checks", s.checks},
              {"skipped", s.skipped}, {"counterexamples", cx}});
    } else {
        std::cout << s.text();
    }
    return s.ok() ? exit_ok : exit_violation;
}

int fail(const char* kind, const std::exception& e, int code) {
    std::cerr << "forcelab: " << kind << ": " << e.what() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forcelab: conditions, catalogs and ranks over GF(2) words"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "Seed for every randomized choice");
    app.add_option("--budget", g.budget, "Inspection budget for searches");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--model", g.model_path, "Model file (default: bundled clone-group model)");
    app.add_option("--base", g.base, "Indexed base: o6, per, omega, omega:T,..., N:T,...");

    std::function<int()> run;

    auto* v = app.add_subcommand("validate", "Check every demand on a condition");
    std::string v_path;
    v->add_option("file", v_path, "Condition file")->required();
    v->callback([&] { run = [&] { return cmd_validate(v_path); }; });

    auto* c = app.add_subcommand("construct", "Build a condition");
    ConstructArgs ca;
    c->add_option("kind", ca.kind, "genesis, add, bump or amalgamate")
        ->required()
        ->check(CLI::IsMember({"genesis", "add", "bump", "amalgamate"}));
    c->add_option("input", ca.input, "Input condition (add, bump, amalgamate)");
    c->add_option("second", ca.second, "Second condition (amalgamate)");
    c->add_option("--labels", ca.labels, "Five labels (genesis)")->delimiter(',');
    c->add_option("--beta", ca.beta, "New label (add)");
    auto* kopt = c->add_option("--kernel", ca.kernel, "Common labels; the twin comes from the bundled model")
                     ->delimiter(',')
                     ->expected(0, -1);
    c->add_option("--tails", ca.tails, "Tail words")->check(CLI::IsMember({"standard", "random"}));
    c->add_option("--extra-levels", ca.extra_levels, "Levels added beyond the minimum");
    c->add_option("-o,--output", ca.out, "Write the condition here instead of stdout");
    c->add_flag("--check", ca.check, "Validate the result");
    c->callback([&] {
        ca.kernel_given = kopt->count() > 0;
        if (ca.kind == "genesis" && ca.labels.empty()) throw CLI::RequiredError("--labels");
        if (ca.kind == "add" && c->count("--beta") == 0) throw CLI::RequiredError("--beta");
        run = [&] { return cmd_construct(ca); };
    });

    auto* r = app.add_subcommand("rank", "Non-disjointness rank or splitting rank");
    RankArgs ra;
    r->add_option("kind", ra.kind, "ndrk or split")->required()->check(CLI::IsMember({"ndrk", "split"}));
    r->add_option("--catalog", ra.catalog_path, "Catalog file (ndrk)");
    r->add_option("--full-tree", ra.full_tree, "Use one full binary tree of this depth (ndrk)");
    r->add_option("--max-u", ra.max_u, "Node bound with --full-tree");
    r->add_option("--tuple", ra.tuple_path, "Tuple file (ndrk)");
    r->add_flag("--chain", ra.chain, "Print derivative chain sizes (ndrk)");
    r->add_option("--set", ra.set, "Labels of the set (split)")->delimiter(',');
    r->add_flag("--stats", ra.stats, "Print memo statistics");
    r->callback([&] { run = [&] { return ra.kind == "ndrk" ? cmd_rank_ndrk(ra) : cmd_rank_split(ra); }; });

    auto* k = app.add_subcommand("catalog", "Catalog of a condition");
    std::string k_path;
    std::size_t k_max_v = 7;
    std::optional<std::size_t> k_limit;
    k->add_option("file", k_path, "Condition file")->required();
    k->add_option("--max-v", k_max_v, "Largest label set");
    k->add_option("--limit", k_limit, "Materialize at most this many entries");
    k->callback([&] { run = [&] { return cmd_catalog(k_path, k_max_v, k_limit); }; });

    auto* rc = app.add_subcommand("recover", "Locate level-n tuples in the catalog");
    std::string rc_path, rc_tuple;
    std::size_t rc_count = 20;
    rc->add_option("file", rc_path, "Condition file")->required();
    rc->add_option("--tuple", rc_tuple, "Tuple file");
    rc->add_option("--harvest", rc_count, "Number of harvested tuples when no tuple is given");
    rc->callback([&] { run = [&] { return cmd_recover(rc_path, rc_tuple, rc_count); }; });

    auto* ch = app.add_subcommand("chain", "Limit of an increasing chain, weakest first");
    std::vector<std::string> ch_paths;
    ch->add_option("files", ch_paths, "Condition files")->required();
    ch->callback([&] { run = [&] { return cmd_chain(ch_paths); }; });

    auto* nc = app.add_subcommand("nice-check", "Base axioms and niceness up to a depth");
    std::size_t nc_depth = 5;
    bool nc_planted = false;
    nc->add_option("--depth", nc_depth, "Depth");
    nc->add_flag("--planted", nc_planted, "Check the planted defective base instead");
    nc->callback([&] { run = [&] { return cmd_nice(nc_depth, nc_planted); }; });

    auto* st = app.add_subcommand("stress", "Seeded property campaign");
    std::string st_campaign;
    std::size_t st_trials = 100, st_first = 0;
    bool st_plant = false;
    st->add_option("campaign", st_campaign, "litlem, ranks, forcing or amalg")
        ->required()
        ->check(CLI::IsMember({"litlem", "ranks", "forcing", "amalg"}));
    st->add_option("--trials", st_trials, "Number of trials");
    st->add_option("--first", st_first, "Index of the first trial");
    st->add_flag("--plant-bug", st_plant, "Inject a known defect; the campaign must report it");
    st->callback([&] { run = [&] { return cmd_stress(st_campaign, st_trials, st_first, st_plant); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        return run();
    } catch (const budget_exceeded& e) {
        return fail("budget exceeded", e, exit_budget);
    } catch (const inapplicable_error& e) {
        return fail("inapplicable", e, exit_input);
    } catch (const precondition_error& e) {
        return fail(("precondition " + e.clause()).c_str(), e, exit_input);
    } catch (const capacity_error& e) {
        return fail("capacity", e, exit_input);
    } catch (const input_error& e) {
        return fail("input error", e, exit_input);
    } catch (const theorem_violation& e) {
        return fail("theorem violation", e, exit_violation);
    } catch (const model_inconsistency& e) {
        return fail("model inconsistency", e, exit_violation);
    } catch (const internal_inconsistency& e) {
        return fail("internal inconsistency", e, exit_violation);
    } catch (const std::exception& e) {
        return fail("error", e, exit_input);
    }
}
