#pragma once

// Canonical JSON for conditions, trees, bases, models, M-tuples and reports.
// Objects are written with sorted keys; parsing maps every failure to input_error.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>  // vendored nlohmann json

#include "condition.hpp"
#include "splitrank.hpp"

namespace forcelab::io {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key) {
    if (!j.is_object()) throw input_error(std::string("expected an object holding \"") + key + "\"");
    auto it = j.find(key);
    if (it == j.end()) throw input_error(std::string("missing field \"") + key + "\"");
    return *it;
}

inline std::size_t natural(const json& j, const std::string& what) {
    if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<long long>() < 0))
        throw input_error(what + " must be a non-negative integer");
    return j.get<std::size_t>();
}

inline std::string text(const json& j, const std::string& what) {
    if (!j.is_string()) throw input_error(what + " must be a string");
    return j.get<std::string>();
}

inline BitWord word(const json& j, const std::string& what, std::size_t len) {
    const std::string s = text(j, what);
    BitWord b;
    try {
        b = BitWord::from_string(s);
    } catch (const input_error& e) {
        throw input_error(what + ": " + e.what());
    }
    if (b.size() != len)
        throw input_error(what + " has length " + std::to_string(b.size()) + ", expected " + std::to_string(len));
    return b;
}

inline json words(const WordSet& s) {
    json a = json::array();
    for (const auto& x : s) a.push_back(x.str());
    return a;
}

inline WordSet word_set(const json& j, const std::string& what, std::size_t len) {
    if (!j.is_array()) throw input_error(what + " must be an array of digit strings");
    std::vector<BitWord> v;
    for (std::size_t k = 0; k < j.size(); ++k) v.push_back(word(j[k], what + "[" + std::to_string(k) + "]", len));
    return WordSet(len, std::move(v));
}

inline std::string pair_key(Label a, Label b) { return std::to_string(a) + "," + std::to_string(b); }

}  // namespace detail

/// Parses text, reporting the byte offset of a syntax error.
inline json parse(const std::string& s) {
    try {
        return json::parse(s);
    } catch (const json::parse_error& e) {
        throw input_error("JSON syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

inline json read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    try {
        return parse(os.str());
    } catch (const input_error& e) {
        throw input_error(path + ": " + e.what());
    }
}

inline std::string dump(const json& j) { return j.dump(1) + "\n"; }

inline void write_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write " + path);
    out << dump(j);
}

// ---------------------------------------------------------------------------

inline json to_json(const FiniteTree& t) { return {{"depth", t.depth()}, {"level_n_nodes", detail::words(t.top())}}; }

inline FiniteTree tree_from_json(const json& j) {
    const std::size_t depth = detail::natural(detail::field(j, "depth"), "depth");
    return FiniteTree(depth, detail::word_set(detail::field(j, "level_n_nodes"), "level_n_nodes", depth));
}

inline json to_json(const IndexedBase& ib) {
    json tags = json::array();
    for (auto t : ib.tags) tags.push_back(to_string(t));
    json istar = ib.istar ? json(*ib.istar) : json("omega");
    return {{"istar", istar}, {"tags", tags}};
}

inline IndexedBase base_from_json(const json& j) {
    IndexedBase ib;
    const json& is = detail::field(j, "istar");
    if (is.is_string()) {
        if (is.get<std::string>() != "omega") throw input_error("istar must be a number or \"omega\"");
    } else {
        ib.istar = detail::natural(is, "istar");
    }
    const json& tags = detail::field(j, "tags");
    if (!tags.is_array()) throw input_error("tags must be an array");
    for (const auto& t : tags) ib.tags.push_back(parse_base_tag(detail::text(t, "tag")));
    ib.validate();
    return ib;
}

/// Short names: "o6" (six singleton components), "per", "omega" (singleton
/// components with i* = omega), "omega:T,T,..." (cycled pattern), "N:T" or
/// "N:T,...,T" (finite i*).
inline IndexedBase parse_base_spec(const std::string& s) {
    if (s == "o6" || s == "O6") return IndexedBase::finite(6, BaseTag::O0);
    if (s == "per") return IndexedBase::per();
    if (s == "omega") return IndexedBase::omega({BaseTag::O0});
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw input_error("unknown base \"" + s + "\"");
    std::vector<BaseTag> tags;
    std::stringstream rest(s.substr(colon + 1));
    for (std::string t; std::getline(rest, t, ',');) tags.push_back(parse_base_tag(t));
    const std::string head = s.substr(0, colon);
    IndexedBase ib;
    if (head == "omega") {
        ib = IndexedBase::omega(tags);
    } else {
        std::size_t used = 0;
        std::size_t istar = 0;
        try {
            istar = std::stoul(head, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != head.size() || head.empty()) throw input_error("bad i* \"" + head + "\" in base \"" + s + "\"");
        ib.istar = istar;
        ib.tags = tags;
    }
    ib.validate();
    return ib;
}

inline json to_json(const FiniteModel& m) {
    json rels = json::array();
    for (const auto& r : m.relations()) rels.push_back({{"zeta", r.zeta}, {"arity", r.arity}, {"tuples", r.tuples()}});
    return {{"size", m.size()}, {"theta", m.theta()}, {"relations", rels}};
}

inline FiniteModel model_from_json(const json& j) {
    const std::size_t size = detail::natural(detail::field(j, "size"), "size");
    const std::size_t theta = detail::natural(detail::field(j, "theta"), "theta");
    const json& rels = detail::field(j, "relations");
    if (!rels.is_array()) throw input_error("relations must be an array");
    std::vector<FiniteModel::RelationSpec> specs;
    for (const auto& r : rels) {
        FiniteModel::RelationSpec s;
        s.zeta = detail::natural(detail::field(r, "zeta"), "zeta");
        s.arity = detail::natural(detail::field(r, "arity"), "arity");
        const json& ts = detail::field(r, "tuples");
        if (!ts.is_array()) throw input_error("tuples must be an array");
        for (const auto& t : ts) {
            if (!t.is_array()) throw input_error("each tuple must be an array");
            std::vector<std::size_t> v;
            for (const auto& x : t) v.push_back(detail::natural(x, "tuple entry"));
            s.tuples.push_back(std::move(v));
        }
        specs.push_back(std::move(s));
    }
    return FiniteModel(size, theta, specs);
}

inline json to_json(const MTuple& m) {
    json h = json::array(), g = json::array();
    for (const auto& row : m.h) h.push_back(row);
    for (const auto& row : m.g) {
        json r = json::array();
        for (const auto& s : row) r.push_back(detail::words(s));
        g.push_back(r);
    }
    return {{"ell", m.ell}, {"iota", m.iota}, {"u", detail::words(m.u)}, {"h", h}, {"g", g}};
}

/// Pairs are indexed by the position pairs of u in increasing order.
inline MTuple mtuple_from_json(const json& j) {
    MTuple m;
    m.ell = detail::natural(detail::field(j, "ell"), "ell");
    m.iota = detail::natural(detail::field(j, "iota"), "iota");
    m.u = detail::word_set(detail::field(j, "u"), "u", m.ell);
    const json& h = detail::field(j, "h");
    const json& g = detail::field(j, "g");
    if (!h.is_array() || !g.is_array()) throw input_error("h and g must be arrays");
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!h[i].is_array()) throw input_error("h[" + std::to_string(i) + "] must be an array");
        std::vector<std::size_t> row;
        for (const auto& x : h[i]) row.push_back(detail::natural(x, "h entry"));
        m.h.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g[i].is_array()) throw input_error("g[" + std::to_string(i) + "] must be an array");
        std::vector<WordSet> row;
        for (std::size_t q = 0; q < g[i].size(); ++q)
            row.push_back(detail::word_set(g[i][q], "g[" + std::to_string(i) + "][" + std::to_string(q) + "]", m.ell));
        m.g.push_back(std::move(row));
    }
    if (!m.well_shaped()) throw input_error("tuple needs iota rows of h and g over all pairs of u");
    return m;
}

inline json to_json(const Condition& p) {
    json eta = json::object();
    for (std::size_t a = 0; a < p.w.size(); ++a) eta[std::to_string(p.w[a])] = p.eta[a].str();
    json trees = json::array();
    for (const auto& t : p.trees) trees.push_back({{"level_n_nodes", detail::words(t.top())}});
    json h = json::array(), g = json::array();
    for (std::size_t i = 0; i < p.iota; ++i) {
        json hi = json::object(), gi = json::object();
        for (std::size_t q = 0; q < p.pairs(); ++q) {
            const auto [a, b] = pair_at(q, p.w.size());
            const std::string key = detail::pair_key(p.w[a], p.w[b]);
            hi[key] = p.h[i][q];
            gi[key] = detail::words(p.g[i][q]);
        }
        h.push_back(hi);
        g.push_back(gi);
    }
    return {{"w", p.w}, {"n", p.n}, {"iota", p.iota}, {"M", p.M}, {"eta", eta},
            {"trees", trees}, {"r", p.r}, {"h", h}, {"g", g}};
}

inline Condition condition_from_json(const json& j) {
    Condition p;
    const json& w = detail::field(j, "w");
    if (!w.is_array()) throw input_error("w must be an array");
    for (const auto& x : w) p.w.push_back(detail::natural(x, "w entry"));
    for (std::size_t a = 1; a < p.w.size(); ++a)
        if (p.w[a - 1] >= p.w[a]) throw input_error("w must be strictly increasing");
    p.n = detail::natural(detail::field(j, "n"), "n");
    p.iota = detail::natural(detail::field(j, "iota"), "iota");
    p.M = detail::natural(detail::field(j, "M"), "M");

    const json& eta = detail::field(j, "eta");
    if (!eta.is_object()) throw input_error("eta must be an object keyed by label");
    if (eta.size() != p.w.size()) throw input_error("eta must have one entry per label of w");
    for (auto a : p.w) {
        auto it = eta.find(std::to_string(a));
        if (it == eta.end()) throw input_error("eta has no entry for label " + std::to_string(a));
        p.eta.push_back(detail::word(*it, "eta[" + std::to_string(a) + "]", p.n));
    }

    const json& trees = detail::field(j, "trees");
    if (!trees.is_array()) throw input_error("trees must be an array");
    for (std::size_t m = 0; m < trees.size(); ++m)
        p.trees.emplace_back(p.n, detail::word_set(detail::field(trees[m], "level_n_nodes"),
                                                   "trees[" + std::to_string(m) + "]", p.n));
    const json& r = detail::field(j, "r");
    if (!r.is_array()) throw input_error("r must be an array");
    for (const auto& x : r) p.r.push_back(detail::natural(x, "r entry"));

    const json& h = detail::field(j, "h");
    const json& g = detail::field(j, "g");
    if (!h.is_array() || !g.is_array() || h.size() != p.iota || g.size() != p.iota)
        throw input_error("h and g must be arrays of length iota");
    p.h.assign(p.iota, std::vector<std::size_t>(p.pairs()));
    p.g.assign(p.iota, std::vector<WordSet>(p.pairs()));
    for (std::size_t i = 0; i < p.iota; ++i) {
        if (!h[i].is_object() || !g[i].is_object() || h[i].size() != p.pairs() || g[i].size() != p.pairs())
            throw input_error("h[" + std::to_string(i) + "] and g[" + std::to_string(i) +
                              "] must map every pair \"a,b\" with a < b");
        for (std::size_t q = 0; q < p.pairs(); ++q) {
            const auto [a, b] = pair_at(q, p.w.size());
            const std::string key = detail::pair_key(p.w[a], p.w[b]);
            const std::string where = "[" + std::to_string(i) + "][\"" + key + "\"]";
            auto hit = h[i].find(key);
            auto git = g[i].find(key);
            if (hit == h[i].end() || git == g[i].end()) throw input_error("h or g has no entry " + where);
            p.h[i][q] = detail::natural(*hit, "h" + where);
            p.g[i][q] = detail::word_set(*git, "g" + where, p.n);
        }
    }
    return p;
}

inline json to_json(const Catalog& c) {
    json trees = json::array();
    for (const auto& t : c.trees) trees.push_back(detail::words(t.top()));
    return {{"depth", c.depth},
            {"base", to_json(c.ib)},
            {"trees", trees},
            {"max_u", c.bounds.max_u},
            {"max_g", c.bounds.max_g},
            {"max_iota", c.bounds.max_iota}};
}

/// Bounds default when absent; "trees" lists the top-level nodes of each tree.
inline Catalog catalog_from_json(const json& j) {
    Catalog c;
    c.depth = detail::natural(detail::field(j, "depth"), "depth");
    if (j.contains("base")) c.ib = base_from_json(j["base"]);
    const json& trees = detail::field(j, "trees");
    if (!trees.is_array()) throw input_error("trees must be an array");
    for (std::size_t m = 0; m < trees.size(); ++m)
        c.trees.emplace_back(c.depth, detail::word_set(trees[m], "trees[" + std::to_string(m) + "]", c.depth));
    if (j.contains("max_u")) c.bounds.max_u = detail::natural(j["max_u"], "max_u");
    if (j.contains("max_g")) c.bounds.max_g = detail::natural(j["max_g"], "max_g");
    if (j.contains("max_iota")) c.bounds.max_iota = detail::natural(j["max_iota"], "max_iota");
    return c;
}

inline json to_json(const CatalogEntry& e) { return {{"ell", e.ell}, {"v", e.v}, {"m", to_json(e.m)}}; }

inline json to_json(const Report& r) {
    json items = json::array();
    for (const auto& f : r.items()) items.push_back({{"clause", f.clause}, {"ok", f.ok}, {"detail", f.detail}});
    json verdicts = json::object();
    for (const auto& c : r.clauses()) verdicts[c] = r.ok(c);
    return {{"ok", r.ok()}, {"clauses", verdicts}, {"findings", items}};
}

}  // namespace forcelab::io
