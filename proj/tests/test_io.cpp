#include <gtest/gtest.h>

#include <random>

#include "ccm/io.hpp"

using namespace ccm;
using io::json;

namespace {

std::string data(const char* name) { return std::string(CCM_DATA_DIR) + "/" + name; }

std::string message_of(const json& doc) {
  try {
    io::parse_problem(doc);
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Parse, Fixtures) {
  const auto town = io::load_problem(data("town.json"));
  ASSERT_TRUE(town.collective);
  EXPECT_EQ(town.collective->utility(), Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));

  const auto rooms = io::load_problem(data("roommates.json"));
  ASSERT_TRUE(rooms.matching);
  EXPECT_EQ(rooms.matching->matchings().size(), 4u);

  const auto office = io::load_problem(data("office.json"));
  ASSERT_TRUE(office.economy);
  EXPECT_EQ(office.economy->value(1, 0b110), 7.0);

  const auto upgrades = io::load_problem(data("office2.json"));
  ASSERT_TRUE(upgrades.economy);
  EXPECT_EQ(upgrades.economy->goods(), 5u);
  EXPECT_EQ(upgrades.economy->value(2, 0b11100), 10.0);
  EXPECT_EQ(upgrades.economy->value(2, 0b01000), 0.0);

  const auto cake = io::load_problem(data("cakes-bargaining.json"));
  ASSERT_TRUE(cake.bargaining);
  EXPECT_TRUE(contains(*cake.bargaining, Vec{0.75, 0.5}));
  EXPECT_THROW(io::collective_of(cake), InvalidInput);

  const auto three = io::load_problem(data("3person.json"));
  EXPECT_EQ(io::bargaining_set(three).dim(), 3u);
}

TEST(Parse, CakeCollectiveAndBargainingFilesAgree) {
  const auto a = io::bargaining_set(io::load_problem(data("cakes.json")));
  const auto b = io::bargaining_set(io::load_problem(data("cakes-bargaining.json")));
  EXPECT_TRUE(same_point_set(efficient_vertices(a), efficient_vertices(b), 1e-12));
}

TEST(Hash, MatchesIndependentDigest) {
  // sha256 of the compact key-sorted serialization, computed outside this code base.
  EXPECT_EQ(io::load_problem(data("town.json")).hash,
            "fafc533903b29fe8c7b2ce99035e4d0f30b4ea7534af06c7c00f95fc98ec8714");
}

TEST(Hash, IgnoresKeyOrderAndWhitespaceButNotValues) {
  const json a = json::parse(R"({"type":"collective","utility":[["1","0"],["0","1"]]})");
  const json b = json::parse(R"({ "utility" : [ ["1","0"], ["0","1"] ],
                                  "type" : "collective" })");
  const json c = json::parse(R"({"type":"collective","utility":[["1","0"],["0","2"]]})");
  EXPECT_EQ(io::problem_hash(a), io::problem_hash(b));
  EXPECT_NE(io::problem_hash(a), io::problem_hash(c));
  EXPECT_EQ(io::problem_hash(a).size(), 64u);
}

TEST(Numbers, StringsAndNumbers) {
  EXPECT_EQ(io::number(json("0.5"), "x"), 0.5);
  EXPECT_EQ(io::number(json("1e-3"), "x"), 1e-3);
  EXPECT_EQ(io::number(json(2), "x"), 2.0);
  EXPECT_EQ(io::number(json(0.1), "x"), io::number(json("0.1"), "x"));
  EXPECT_THROW(io::number(json("abc"), "x"), InvalidInput);
  EXPECT_THROW(io::number(json("1.5x"), "x"), InvalidInput);
  EXPECT_THROW(io::number(json(""), "x"), InvalidInput);
  EXPECT_THROW(io::number(json("inf"), "x"), InvalidInput);
  EXPECT_THROW(io::number(json(nullptr), "x"), InvalidInput);
  EXPECT_THROW(io::matrix_of(json::parse(R"([["1"],["1","2"]])"), "m"), InvalidInput);
}

TEST(Errors, NameTheField) {
  EXPECT_NE(message_of(json::parse(R"({"utility":[[1]]})")).find("'type'"), std::string::npos);
  EXPECT_NE(message_of(json::parse(R"({"type":"poll"})")).find("unknown type"), std::string::npos);
  EXPECT_NE(message_of(json::parse(R"({"type":"collective","utility":[["1","x"]]})")).find("collective.utility[0][1]"),
            std::string::npos);
  EXPECT_NE(message_of(json::parse(R"({"type":"economy","goods":2,"utility":{"kind":"fancy"}})")).find("fancy"),
            std::string::npos);
  EXPECT_NE(message_of(json::parse(R"({"type":"economy","goods":-1})")).find("economy.goods"), std::string::npos);
  EXPECT_NE(message_of(json::parse(R"({"type":"collective","utility":[[1]],"solver":{"sweep":"ten"}})"))
                .find("solver.sweep"),
            std::string::npos);
  EXPECT_THROW(io::read_json(data("missing.json")), InvalidInput);
}

TEST(Parse, SolverOverrides) {
  const auto p = io::parse_problem(
      json::parse(R"({"type":"collective","utility":[[1,0],[0,1]],"solver":{"tol":"1e-7","sweep":8,"c":["0.5",0]}})"));
  EXPECT_EQ(*p.solver.tol, 1e-7);
  EXPECT_EQ(*p.solver.sweep, 8u);
  EXPECT_EQ(*p.solver.c, (Vec{0.5, 0.0}));
  EXPECT_FALSE(p.solver.grid);
}

TEST(Parse, TwoSidedMatchings) {
  const auto p = io::parse_problem(
      json::parse(R"({"type":"matching","partner_utility":[[0,0,1,2],[0,0,3,1],[1,1,0,0],[2,1,0,0]],"sides":[0,0,1,1]})"));
  ASSERT_TRUE(p.matching);
  EXPECT_EQ(p.matching->matchings().size(), 7u);
}

TEST(EconomyJson, RoundTrips) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> val(0.0, 3.0);
  std::vector<Economy> economies{io::load_problem(data("office.json")).economy.value(),
                                 io::load_problem(data("office2.json")).economy.value(),
                                 Economy::additive({{val(rng), val(rng), val(rng)}, {val(rng), 0.0, val(rng)}})};
  for (const Economy& e : economies) {
    const auto back = io::parse_problem(json::parse(io::economy_json(e).dump()));
    ASSERT_TRUE(back.economy);
    ASSERT_EQ(back.economy->agents(), e.agents());
    for (std::size_t i = 0; i < e.agents(); ++i) EXPECT_EQ(back.economy->table(i), e.table(i)) << i;
  }
}

TEST(Allocations, JsonRoundTrip) {
  const Allocation a{0b101, 0, 0b010};
  const json j = io::allocation_json(a, 3);
  EXPECT_EQ(j, json::parse("[[0,2],[],[1]]"));
  EXPECT_EQ(io::allocation_of(j, 3, 3, "a"), a);
  EXPECT_THROW(io::allocation_of(j, 2, 3, "a"), InvalidInput);
  EXPECT_THROW(io::allocation_of(json::parse("[[3],[],[]]"), 3, 3, "a"), InvalidInput);
}

TEST(Certificate, HeaderCarriesHashAndTolerances) {
  auto p = io::load_problem(data("town.json"));
  const json h = io::certificate_header("lindahl", p);
  EXPECT_EQ(h.at("format"), io::kCertificateFormat);
  EXPECT_EQ(h.at("kind"), "lindahl");
  EXPECT_EQ(h.at("problem_hash"), p.hash);
  EXPECT_EQ(h.at("version"), CCM_VERSION);
  EXPECT_EQ(h.at("tolerances").at("verify").get<double>(), tol::kVerify);
  p.solver.tol = 1e-6;
  EXPECT_EQ(io::certificate_header("lindahl", p).at("tolerances").at("verify").get<double>(), 1e-6);
}

TEST(Certificate, LindahlSerialization) {
  const auto p = io::load_problem(data("town.json"));
  const auto cert = lindahl_from_nash(*p.collective, Vec{0.0, 0.0});
  ASSERT_TRUE(cert);
  const json j = io::to_json(*cert);
  EXPECT_EQ(io::matrix_of(j.at("prices"), "prices"), cert->prices);
  EXPECT_EQ(io::vector_of(j.at("lottery"), "lottery"), cert->lottery);
  EXPECT_EQ(io::vector_of(j.at("witness").at("scale"), "scale"), cert->alpha);
  const json v = io::to_json(verify_lindahl(*p.collective, cert->prices, cert->lottery));
  EXPECT_TRUE(v.at("passed").get<bool>());
  EXPECT_TRUE(v.at("violations").empty());
}
