#include <gtest/gtest.h>

#include <random>

#include "ccm/market.hpp"
#include "ccm/matching.hpp"
#include "ccm/solutions.hpp"

using namespace ccm;

namespace {

const Assignment kStay2{0, 1};
const Assignment kSwap2{1, 0};

MatchingProblem mutual_pair() {
  return MatchingProblem({kStay2, kSwap2}, Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
}

MatchingProblem triangle() {
  return MatchingProblem({{0, 1, 2}, {1, 0, 2}, {2, 1, 0}, {0, 2, 1}},
                         Matrix::from_rows({{0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}, {1.0, 1.0, 0.0}}));
}

// Involutions of n points: T(n) = T(n-1) + (n-1) T(n-2).
std::size_t involution_count(std::size_t n) {
  std::size_t a = 1, b = 1;
  for (std::size_t k = 2; k <= n; ++k) {
    const std::size_t c = b + (k - 1) * a;
    a = b;
    b = c;
  }
  return b;
}

std::size_t choose(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::size_t bipartite_count(std::size_t a, std::size_t b) {
  std::size_t total = 0, fact = 1;
  for (std::size_t k = 0; k <= std::min(a, b); ++k) {
    if (k > 0) fact *= k;
    total += choose(a, k) * choose(b, k) * fact;
  }
  return total;
}

std::optional<MatchingProblem> random_matching_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> agents(2, 5);
  const std::size_t n = agents(rng);
  auto all = all_involutions(n);
  std::shuffle(all.begin() + 1, all.end(), rng);
  std::uniform_int_distribution<std::size_t> keep(2, std::min<std::size_t>(30, all.size()));
  all.resize(keep(rng));
  std::uniform_real_distribution<double> value(0.0, 5.0);
  std::bernoulli_distribution zero(0.2);
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t m = 0; m < n; ++m)
      if (i != m) w(i, m) = zero(rng) ? 0.0 : value(rng);
  try {
    return MatchingProblem(all, w);
  } catch (const InvalidInput&) {
    return std::nullopt;
  }
}

}  // namespace

TEST(Involutions, CountsMatchRecurrence) {
  for (std::size_t n = 1; n <= 6; ++n) EXPECT_EQ(all_involutions(n).size(), involution_count(n)) << n;
  EXPECT_EQ(involution_count(6), 76u);
  EXPECT_EQ(all_involutions(3).front(), (Assignment{0, 1, 2}));
  for (const auto& a : all_involutions(5))
    for (std::size_t i = 0; i < 5; ++i) ASSERT_EQ(a[a[i]], i);
  EXPECT_THROW(all_involutions(7), InvalidInput);
}

TEST(TwoSided, CountsMatchFormula) {
  EXPECT_EQ(two_sided_matchings({0, 0, 1, 1}).size(), bipartite_count(2, 2));
  EXPECT_EQ(two_sided_matchings({0, 1, 1, 1}).size(), bipartite_count(1, 3));
  EXPECT_EQ(two_sided_matchings({0, 0, 0, 1, 1}).size(), bipartite_count(3, 2));
  for (const auto& a : two_sided_matchings({0, 1, 0, 1}))
    for (std::size_t i = 0; i < 4; ++i)
      if (a[i] != i) ASSERT_NE(i % 2, a[i] % 2);
  EXPECT_THROW(two_sided_matchings({0, 2}), InvalidInput);
}

TEST(Construction, Validation) {
  EXPECT_THROW(MatchingProblem({kStay2}, Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}})), InvalidInput);
  EXPECT_THROW(MatchingProblem({{1, 1}}, Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}})), InvalidInput);
  EXPECT_THROW(MatchingProblem({kSwap2}, Matrix::from_rows({{1.0, 1.0}, {1.0, 0.0}})), InvalidInput);
  EXPECT_THROW(MatchingProblem({kSwap2}, Matrix::from_rows({{0.0, -1.0}, {1.0, 0.0}})), InvalidInput);
  // An agent who values no partner has no stake.
  EXPECT_THROW(MatchingProblem({kStay2, kSwap2}, Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}})), InvalidInput);
}

TEST(Construction, ZeroesUnreachablePartners) {
  // Agent 0 can only ever meet agent 1 or stay alone.
  const MatchingProblem m({{0, 1, 2}, {1, 0, 2}, {0, 2, 1}},
                          Matrix::from_rows({{0.0, 2.0, 5.0}, {2.0, 0.0, 1.0}, {4.0, 1.0, 0.0}}));
  EXPECT_EQ(m.partners(0), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(m.partner_utility()(0, 2), 0.0);
  EXPECT_EQ(m.partner_utility()(2, 0), 0.0);
  EXPECT_TRUE(m.reachable(2, 1));
  EXPECT_FALSE(m.reachable(0, 2));
}

TEST(ToCollective, Examples) {
  const auto p = to_collective(mutual_pair());
  EXPECT_EQ(p.utility(), Matrix::from_rows({{0.0, 1.0}, {0.0, 1.0}}));
  const auto t = to_collective(triangle());
  EXPECT_EQ(t.utility().row_vec(0), (Vec{0.0, 1.0, 1.0, 0.0}));
  EXPECT_EQ(t.utility().row_vec(2), (Vec{0.0, 0.0, 1.0, 1.0}));
}

TEST(PricesToPartner, CheapestDeliveringMatching) {
  const auto pi = prices_to_partner(Matrix::from_rows({{0.0, 2.0}, {0.0, 2.0}}), mutual_pair());
  EXPECT_EQ(pi(0, 1), 2.0);
  EXPECT_EQ(pi(0, 0), 0.0);
  // Agents 0 and 1 meet under two matchings priced 3 and 1.
  const MatchingProblem four({{0, 1, 2, 3}, {1, 0, 3, 2}, {1, 0, 2, 3}},
                             Matrix::from_rows({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}));
  const Matrix prices = Matrix::from_rows({{0, 3, 1}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const auto pi4 = prices_to_partner(prices, four);
  EXPECT_EQ(pi4(0, 1), 1.0);
  EXPECT_EQ(pi4(0, 2), 0.0);
}

TEST(AllocationToDemand, Examples) {
  const auto half = allocation_to_demand(Vec{0.5, 0.5}, mutual_pair());
  EXPECT_EQ(half(0, 1), 0.5);
  EXPECT_EQ(half(1, 0), 0.5);
  const auto one = allocation_to_demand(Vec{0.0, 0.0, 1.0, 0.0}, triangle());
  EXPECT_EQ(one(0, 2), 1.0);
  EXPECT_EQ(one(2, 0), 1.0);
  EXPECT_EQ(one(1, 0) + one(1, 2), 0.0);
  const auto none = allocation_to_demand(Vec{0.0, 0.0}, mutual_pair());
  EXPECT_EQ(none, Matrix(2, 2));
}

TEST(VerifyWalras, MutualLiking) {
  const auto m = mutual_pair();
  const Matrix pi = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const Matrix xi = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  EXPECT_TRUE(verify_walras_matching(m, pi, xi, Vec{0.0, 1.0}).passed());

  const Matrix dear = Matrix::from_rows({{0.0, 3.0}, {1.0, 0.0}});
  const auto v = verify_walras_matching(m, dear, xi, Vec{0.0, 1.0});
  EXPECT_FALSE(v.passed());
  EXPECT_NE(v.summary().find("budget"), std::string::npos) << v.summary();
}

TEST(VerifyWalras, FirmMustMaximizeRevenue) {
  const auto m = mutual_pair();
  const Matrix pi = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const auto v = verify_walras_matching(m, pi, Matrix(2, 2), Vec{1.0, 0.0});
  EXPECT_FALSE(v.passed());
  EXPECT_NE(v.summary().find("firm_revenue"), std::string::npos) << v.summary();
}

TEST(VerifyWalras, MarketClearing) {
  const auto m = mutual_pair();
  const Matrix pi = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const Matrix xi = Matrix::from_rows({{0.0, 1.0}, {0.5, 0.0}});
  const auto v = verify_walras_matching(m, pi, xi, Vec{0.0, 1.0});
  EXPECT_NE(v.summary().find("market_clearing"), std::string::npos) << v.summary();
}

TEST(Conversion, MutualPairBothWays) {
  const auto m = mutual_pair();
  const auto cert = lindahl_from_nash(to_collective(m), Vec{0.0, 0.0});
  ASSERT_TRUE(cert);
  const auto eq = lindahl_to_walras(m, cert->prices, cert->lottery);
  EXPECT_NEAR(eq.partner_prices(0, 1), 1.0, 1e-9);
  EXPECT_NEAR(eq.partner_prices(1, 0), 1.0, 1e-9);
  const auto back = walras_to_lindahl(m, eq);
  EXPECT_NEAR(back.prices(0, 1), 1.0, 1e-9);
  EXPECT_NEAR(back.prices(1, 1), 1.0, 1e-9);
}

TEST(Conversion, TriangleIsSymmetric) {
  const auto m = triangle();
  const auto cert = lindahl_from_nash(to_collective(m), Vec{0.0, 0.0, 0.0});
  ASSERT_TRUE(cert);
  const auto eq = lindahl_to_walras(m, cert->prices, cert->lottery);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(eq.partner_prices(i, k), eq.partner_prices(k, i), 1e-8);
  EXPECT_NEAR(max_abs_diff(partner_payoffs(m, eq.demand), Vec{2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0}), 0.0, 1e-8);
}

TEST(Conversion, RejectsNonEquilibrium) {
  const auto m = mutual_pair();
  EXPECT_THROW(lindahl_to_walras(m, Matrix::from_rows({{0.0, 1.0}, {0.0, 1.0}}), Vec{1.0, 0.0}), InvalidInput);
  PartnerEquilibrium bad{Matrix::from_rows({{0.0, 3.0}, {1.0, 0.0}}), Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}),
                         Vec{0.0, 1.0}};
  EXPECT_THROW(walras_to_lindahl(m, bad), InvalidInput);
}

TEST(Conversion, RandomRoundTripPreservesPayoffs) {
  std::mt19937_64 rng(606);
  std::size_t instances = 0;
  while (instances < 60) {
    const auto m = random_matching_problem(rng);
    if (!m) continue;
    ++instances;
    const auto p = to_collective(*m);
    const auto cert = lindahl_from_nash(p, Vec(m->agents(), 0.0));
    ASSERT_TRUE(cert);
    const auto eq = lindahl_to_walras(*m, cert->prices, cert->lottery);
    ASSERT_TRUE(verify_walras_matching(*m, eq.partner_prices, eq.demand, eq.lottery).passed());
    const auto back = walras_to_lindahl(*m, eq);
    ASSERT_TRUE(verify_lindahl(p, back.prices, back.lottery).passed());
    // Lotteries pass through both maps, so u.q is unchanged bit for bit.
    ASSERT_EQ(p.payoffs(back.lottery), p.payoffs(cert->lottery));
    const auto walras_pay = partner_payoffs(*m, eq.demand);
    ASSERT_NEAR(max_abs_diff(walras_pay, cert->payoffs), 0.0, 1e-12);
    ASSERT_TRUE(minimal_cost_lint(*m, cert->prices, cert->lottery).empty());
    const auto b = bargaining_of(p);
    if (b.full_dimensional() && m->agents() <= 3) ASSERT_TRUE(equitable_contains(b, walras_pay).member());
  }
}

TEST(Lint, FlagsCostlyDuplicate) {
  // Matchings 1 and 2 both pair agents 0 and 1; the lottery buys the dearer one.
  const MatchingProblem m({{0, 1, 2, 3}, {1, 0, 2, 3}, {1, 0, 3, 2}},
                          Matrix::from_rows({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}));
  const Matrix prices = Matrix::from_rows({{0, 1, 2}, {0, 1, 1}, {0, 0, 1}, {0, 0, 1}});
  const auto lint = minimal_cost_lint(m, prices, Vec{0.0, 0.0, 1.0});
  ASSERT_EQ(lint.size(), 1u);
  EXPECT_EQ(lint[0].agent, 0u);
  EXPECT_EQ(lint[0].bought, 2u);
  EXPECT_EQ(lint[0].cheaper, 1u);
}
