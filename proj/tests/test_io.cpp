#include <gtest/gtest.h>

#include <forcelab/construct.hpp>
#include <forcelab/io.hpp>

#include <string>

using namespace forcelab;
using io::json;

namespace {

std::vector<Label> five() { return {0, 2, 5, 7, 10}; }

Condition reparse(const Condition& p) { return io::condition_from_json(io::parse(io::dump(io::to_json(p)))); }

json condition_json() { return io::to_json(genesis(five(), IndexedBase::per())); }

std::string error_of(const json& j) {
    try {
        io::condition_from_json(j);
    } catch (const input_error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(IoCondition, RoundTripOverConstructions) {
    const Condition g = genesis(five(), IndexedBase::finite(6, BaseTag::O0));
    const Condition a = add_ordinal(g, 12, IndexedBase::finite(6, BaseTag::O0));
    const auto om = IndexedBase::omega({BaseTag::O0});
    const Condition b = bump_iota(genesis(five(), om), om);
    for (const auto& p : {g, a, b, genesis(five(), IndexedBase::per())}) EXPECT_EQ(reparse(p), p);
}

TEST(IoCondition, SerializationIsCanonical) {
    const json j = condition_json();
    const std::string once = io::dump(j);
    EXPECT_EQ(io::dump(io::to_json(io::condition_from_json(io::parse(once)))), once);
    // Keys come out sorted.
    EXPECT_LT(once.find("\"M\""), once.find("\"eta\""));
    EXPECT_LT(once.find("\"eta\""), once.find("\"w\""));
    EXPECT_EQ(once.back(), '\n');
}

TEST(IoCondition, MalformedDigitsNamed) {
    json j = condition_json();
    std::string s = j["eta"]["5"];
    s[3] = '2';
    j["eta"]["5"] = s;
    const std::string e = error_of(j);
    EXPECT_NE(e.find("eta[5]"), std::string::npos) << e;
    EXPECT_NE(e.find("bad digit"), std::string::npos) << e;
}

TEST(IoCondition, WrongLengthNamed) {
    json j = condition_json();
    j["eta"]["7"] = "0101";
    EXPECT_NE(error_of(j).find("length 4"), std::string::npos);
}

TEST(IoCondition, MissingAndMistypedFields) {
    json j = condition_json();
    j.erase("r");
    EXPECT_NE(error_of(j).find("\"r\""), std::string::npos);
    j = condition_json();
    j["n"] = -3;
    EXPECT_NE(error_of(j).find("n must be"), std::string::npos);
    j = condition_json();
    j["w"] = {5, 2, 7, 10, 12};
    EXPECT_NE(error_of(j).find("increasing"), std::string::npos);
    j = condition_json();
    j["h"][0].erase("0,2");
    EXPECT_FALSE(error_of(j).empty());
}

TEST(IoCondition, TamperedButWellFormedParses) {
    json j = condition_json();
    std::string s = j["eta"]["0"];
    s.back() = s.back() == '0' ? '1' : '0';
    j["eta"]["0"] = s;
    EXPECT_NO_THROW(io::condition_from_json(j));
}

TEST(IoParse, SyntaxErrorReportsByte) {
    try {
        io::parse("{\"a\": [1, 2,}");
        FAIL() << "expected a syntax error";
    } catch (const input_error& e) {
        EXPECT_NE(std::string(e.what()).find("byte 13"), std::string::npos) << e.what();
    }
}

TEST(IoParse, MissingFileRejected) { EXPECT_THROW(io::read_file("/nonexistent/condition.json"), input_error); }

TEST(IoBase, RoundTripAndShortNames) {
    for (const auto& ib : {IndexedBase::finite(6, BaseTag::O0), IndexedBase::per(), IndexedBase::omega({BaseTag::O0, BaseTag::Oper})})
        EXPECT_EQ(io::base_from_json(io::to_json(ib)).describe(), ib.describe());
    EXPECT_EQ(io::parse_base_spec("o6").describe(), IndexedBase::finite(6, BaseTag::O0).describe());
    EXPECT_EQ(io::parse_base_spec("per").describe(), IndexedBase::per().describe());
    EXPECT_EQ(io::parse_base_spec("omega:O0,per").describe(), IndexedBase::omega({BaseTag::O0, BaseTag::Oper}).describe());
    EXPECT_EQ(io::parse_base_spec("3:O0,O0,per").istar, std::optional<std::size_t>(3));
    EXPECT_THROW(io::parse_base_spec("seven"), input_error);
    EXPECT_THROW(io::parse_base_spec("x:O0"), input_error);
    EXPECT_THROW(io::parse_base_spec("2:O0,bogus"), input_error);
}

TEST(IoTree, RoundTrip) {
    const FiniteTree t(3, WordSet::of({"001", "010", "111"}));
    EXPECT_EQ(io::tree_from_json(io::to_json(t)), t);
}

TEST(IoModel, RoundTrip) {
    const FiniteModel m(5, 2, {{0, 2, {{0, 1}, {1, 3}}}, {0, 3, {{0, 2, 4}}}, {1, 2, {{2, 4}}}});
    const FiniteModel back = io::model_from_json(io::to_json(m));
    EXPECT_EQ(io::to_json(back), io::to_json(m));
    EXPECT_EQ(back.size(), 5u);
    EXPECT_EQ(back.theta(), 2u);
}

TEST(IoModel, NonIncreasingTupleParsesButFailsValidation) {
    json j = io::to_json(FiniteModel(4, 2, {{0, 2, {{0, 1}}}}));
    j["relations"][0]["tuples"][0] = {1, 0};
    const Report r = validate_model(io::model_from_json(j));
    EXPECT_FALSE(r.ok());
    j["relations"][0]["tuples"][0] = {1, -1};
    EXPECT_THROW(io::model_from_json(j), input_error);
}

TEST(IoMTuple, RoundTrip) {
    MTuple m;
    m.ell = 2;
    m.iota = 1;
    m.u = WordSet::of({"00", "01", "11"});
    m.h = {{0, 1, 0}};
    m.g = {{WordSet::of({"10"}), WordSet::of({"01"}), WordSet::of({"00"})}};
    EXPECT_EQ(io::mtuple_from_json(io::to_json(m)), m);
    json j = io::to_json(m);
    j["g"][0].erase(2);
    EXPECT_THROW(io::mtuple_from_json(j), input_error);
}

TEST(IoCatalog, RoundTripWithDefaults) {
    Catalog c{{FiniteTree(2, WordSet::of({"00", "11"}))}, 2, IndexedBase::finite(1, BaseTag::O0), {}};
    c.bounds.max_u = 3;
    const Catalog back = io::catalog_from_json(io::to_json(c));
    EXPECT_EQ(back.trees, c.trees);
    EXPECT_EQ(back.depth, 2u);
    EXPECT_EQ(back.bounds.max_u, 3u);
    EXPECT_EQ(back.ib.describe(), c.ib.describe());
    const Catalog bare = io::catalog_from_json(json{{"depth", 2}, {"trees", {{"01"}}}});
    EXPECT_EQ(bare.bounds.max_u, CatalogBounds{}.max_u);
}

TEST(IoReport, VerdictsPerClause) {
    Report r;
    r.pass("levels");
    r.fail("independence", "dependent");
    const json j = io::to_json(r);
    EXPECT_FALSE(j["ok"].get<bool>());
    EXPECT_TRUE(j["clauses"]["levels"].get<bool>());
    EXPECT_FALSE(j["clauses"]["independence"].get<bool>());
    EXPECT_EQ(j["findings"].size(), 2u);
}
