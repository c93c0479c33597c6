#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ccm/market.hpp"
#include "ccm/solutions.hpp"

using namespace ccm;

namespace {

CollectiveProblem town() { return CollectiveProblem(Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}})); }
CollectiveProblem cake_market() { return CollectiveProblem(Matrix::from_rows({{1.0, 0.5, 0.0}, {0.0, 1.0, 1.0}})); }

CollectiveProblem random_problem(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::uniform_real_distribution<double> entry(0.0, 10.0);
  std::bernoulli_distribution zero(0.25);
  Matrix u(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) u(i, j) = zero(rng) ? 0.0 : entry(rng);
    u(i, (i * 7) % k) += 1.0;
  }
  return CollectiveProblem(u);
}

// A random admissible floor: each agent's floor is a fraction of the lowest
// utility it gets from one randomly chosen outcome.
Vec random_floor(std::mt19937_64& rng, const CollectiveProblem& p) {
  std::uniform_int_distribution<std::size_t> pick(0, p.outcomes() - 1);
  std::uniform_real_distribution<double> frac(0.0, 0.9);
  const std::size_t j = pick(rng);
  Vec c(p.agents());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = frac(rng) * p.utility()(i, j);
  return c;
}

double firm_revenue(const LindahlCertificate& cert) {
  double r = 0.0;
  for (std::size_t i = 0; i < cert.prices.rows(); ++i) r += dot(cert.prices.row(i), cert.lottery);
  return r;
}

bool has_violation(const Verdict& v, const std::string& condition, std::ptrdiff_t agent) {
  return std::any_of(v.violations.begin(), v.violations.end(),
                     [&](const Violation& x) { return x.condition == condition && x.agent == agent; });
}

}  // namespace

TEST(Problem, RejectsBadUtilities) {
  EXPECT_THROW(CollectiveProblem(Matrix::from_rows({{1.0, -1.0}})), InvalidInput);
  EXPECT_THROW(CollectiveProblem(Matrix::from_rows({{1.0, 1.0}, {0.0, 0.0}})), InvalidInput);
  EXPECT_THROW(CollectiveProblem(Matrix(0, 0)), InvalidInput);
  EXPECT_THROW(town().payoffs(Vec{1.0}), InvalidInput);
}

TEST(BargainingOf, Examples) {
  EXPECT_TRUE(dominates(bargaining_of(town()), unit_simplex(2)));
  EXPECT_TRUE(dominates(unit_simplex(2), bargaining_of(town())));
  const auto b = bargaining_of(cake_market());
  EXPECT_TRUE(dominates(b, Polytope::coco_hull({{0.0, 0.0}, {1.0, 0.0}, {0.5, 1.0}, {0.0, 1.0}})));
  EXPECT_TRUE(dominates(Polytope::coco_hull({{0.0, 0.0}, {1.0, 0.0}, {0.5, 1.0}, {0.0, 1.0}}), b));
  const auto single = bargaining_of(CollectiveProblem(Matrix::from_rows({{2.0}, {3.0}})));
  EXPECT_EQ(single.bliss(), (Point{2.0, 3.0}));
  EXPECT_EQ(single.disagreement(), (Point{0.0, 0.0}));
}

TEST(VerifyLindahl, TownPasses) {
  const Matrix prices = Matrix::from_rows({{2.0, 0.0}, {0.0, 2.0}});
  EXPECT_TRUE(verify_lindahl(town(), prices, Vec{0.5, 0.5}).passed());
}

TEST(VerifyLindahl, TownWrongLotteryFails) {
  const Matrix prices = Matrix::from_rows({{2.0, 0.0}, {0.0, 2.0}});
  const auto v = verify_lindahl(town(), prices, Vec{1.0, 0.0});
  EXPECT_FALSE(v.passed());
  EXPECT_TRUE(has_violation(v, "consumer_optimum", 1)) << v.summary();
}

TEST(VerifyLindahl, CheapPricesFail) {
  const Matrix prices = Matrix::from_rows({{1.0, 0.0}, {0.0, 2.0}});
  const auto v = verify_lindahl(town(), prices, Vec{0.5, 0.5});
  EXPECT_TRUE(has_violation(v, "consumer_optimum", 0)) << v.summary();
}

TEST(VerifyLindahl, LotteryShape) {
  const Matrix prices = Matrix::from_rows({{2.0, 0.0}, {0.0, 2.0}});
  EXPECT_TRUE(has_violation(verify_lindahl(town(), prices, Vec{0.5, 0.4}), "lottery_total", -1));
  EXPECT_TRUE(has_violation(verify_lindahl(town(), prices, Vec{1.5, -0.5}), "lottery_sign", -1));
  EXPECT_THROW(verify_lindahl(town(), Matrix(1, 2), Vec{0.5, 0.5}), InvalidInput);
}

TEST(VerifyLindahl, SingleOutcome) {
  const CollectiveProblem p(Matrix::from_rows({{5.0}, {3.0}}));
  EXPECT_TRUE(verify_lindahl(p, Matrix::from_rows({{1.0}, {1.0}}), Vec{1.0}).passed());
}

TEST(ShiftedUtilities, Examples) {
  const CollectiveProblem p(Matrix::from_rows({{10.0, 4.0, 2.0}}));
  EXPECT_EQ(shifted_utilities(p, Vec{3.0}).utility().row_vec(0), (Vec{7.0, 1.0, 0.0}));
  EXPECT_EQ(shifted_utilities(town(), Vec{0.0, 0.0}).utility(), town().utility());
  EXPECT_EQ(shifted_utilities(town(), Vec{0.5, 0.0}).utility().row_vec(0), (Vec{0.5, 0.0}));
  EXPECT_THROW(shifted_utilities(town(), Vec{1.0, 0.0}), InvalidInput);
  EXPECT_THROW(shifted_utilities(town(), Vec{-0.1, 0.0}), InvalidInput);
  EXPECT_THROW(shifted_utilities(town(), Vec{0.0}), InvalidInput);
}

TEST(NashAllocationTest, Examples) {
  const auto t = nash_allocation(town());
  EXPECT_NEAR(t.lottery[0], 0.5, 1e-9);
  EXPECT_NEAR(t.lottery[1], 0.5, 1e-9);
  const auto two = nash_allocation(CollectiveProblem(Matrix::from_rows({{2.0, 1.0}, {1.0, 3.0}})));
  EXPECT_NEAR(two.lottery[0], 0.25, 1e-9);
  EXPECT_NEAR(two.payoffs[0], 1.25, 1e-9);
  EXPECT_NEAR(two.payoffs[1], 2.5, 1e-9);
  const auto c = nash_allocation(cake_market());
  EXPECT_NEAR(c.lottery[1], 1.0, 1e-9);
  EXPECT_LE(c.condition_residual, tol::kOpt);
}

TEST(Admissible, Examples) {
  const CollectiveProblem p(Matrix::from_rows({{10.0, 1.0}}));
  EXPECT_TRUE(admissible(p, Vec{0.0}, Vec{0.3, 0.7}));
  EXPECT_FALSE(admissible(p, Vec{5.0}, Vec{0.0, 1.0}));
  EXPECT_TRUE(admissible(p, Vec{5.0}, Vec{1.0, 0.0}));
}

TEST(LindahlFromNash, Town) {
  const auto cert = lindahl_from_nash(town(), Vec{0.0, 0.0});
  ASSERT_TRUE(cert.has_value());
  EXPECT_NEAR(max_abs_diff(cert->prices.row(0), Vec{2.0, 0.0}), 0.0, 1e-8);
  EXPECT_NEAR(max_abs_diff(cert->prices.row(1), Vec{0.0, 2.0}), 0.0, 1e-8);
  EXPECT_NEAR(max_abs_diff(cert->payoffs, Vec{0.5, 0.5}), 0.0, 1e-9);
}

TEST(LindahlFromNash, CakeFloors) {
  const auto nash = lindahl_from_nash(cake_market(), Vec{0.0, 0.0});
  ASSERT_TRUE(nash.has_value());
  EXPECT_NEAR(max_abs_diff(nash->payoffs, Vec{0.5, 1.0}), 0.0, 1e-9);
  const auto pm = lindahl_from_nash(cake_market(), Vec{0.5, 0.0});
  ASSERT_TRUE(pm.has_value());
  EXPECT_NEAR(max_abs_diff(pm->payoffs, Vec{0.75, 0.5}), 0.0, 1e-9);
  EXPECT_TRUE(equitable_contains(bargaining_of(cake_market()), pm->payoffs).member());
}

TEST(LindahlFromNash, InadmissibleFloorGivesNothing) {
  // Agent 0 demands more than the shared outcome offers, so agent 1 gets nothing.
  const CollectiveProblem p(Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  EXPECT_FALSE(lindahl_from_nash(p, Vec{0.5, 0.5}).has_value());
}

TEST(LindahlFromNash, RandomCertificateProperties) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> agents(2, 4), outcomes(2, 7);
  std::size_t produced = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_problem(rng, agents(rng), outcomes(rng));
    const Vec c = trial % 3 == 0 ? Vec(p.agents(), 0.0) : random_floor(rng, p);
    const auto cert = lindahl_from_nash(p, c);
    if (trial % 3 == 0) ASSERT_TRUE(cert.has_value()) << "zero floor must give an equilibrium";
    if (!cert) continue;
    ++produced;
    ASSERT_TRUE(verify_lindahl(p, cert->prices, cert->lottery).passed());
    ASSERT_TRUE(admissible(p, c, cert->lottery));
    const auto b = bargaining_of(p);
    // Equilibria are efficient, spend every budget and pay alpha + c.
    ASSERT_TRUE(is_pareto_efficient(b, cert->payoffs, 1e-8)) << trial;
    ASSERT_NEAR(firm_revenue(*cert), static_cast<double>(p.agents()), 1e-8);
    const auto shifted = shifted_utilities(p, c).payoffs(cert->lottery);
    for (std::size_t i = 0; i < p.agents(); ++i) {
      ASSERT_NEAR(cert->payoffs[i], cert->alpha[i] + cert->c[i], 1e-9);
      ASSERT_NEAR(shifted[i] + c[i], cert->payoffs[i], 1e-9);
      for (std::size_t j = 0; j < p.outcomes(); ++j) {
        const double gap = cert->alpha[i] * cert->prices(i, j) - (p.utility()(i, j) - c[i]);
        ASSERT_GE(gap, -1e-8);
        if (cert->lottery[j] > tol::kSupport) ASSERT_NEAR(gap, 0.0, 1e-8);
      }
    }
    ASSERT_TRUE(cert->witness().dominates(b, 1e-8));
    if (b.full_dimensional() && p.agents() <= 3) ASSERT_TRUE(equitable_contains(b, cert->payoffs).member()) << trial;
  }
  EXPECT_GT(produced, 100u);
}

TEST(LindahlFromNash, RowScalingScalesPayoff) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_problem(rng, 3, 5);
    Matrix u = p.utility();
    for (std::size_t j = 0; j < u.cols(); ++j) u(2, j) *= 3.5;
    const auto a = lindahl_from_nash(p, Vec(3, 0.0));
    const auto b = lindahl_from_nash(CollectiveProblem(u), Vec(3, 0.0));
    ASSERT_TRUE(a && b);
    EXPECT_NEAR(b->payoffs[0], a->payoffs[0], 1e-7);
    EXPECT_NEAR(b->payoffs[1], a->payoffs[1], 1e-7);
    EXPECT_NEAR(b->payoffs[2], 3.5 * a->payoffs[2], 1e-6);
  }
}

TEST(Sweep, TownSinglePayoff) {
  const auto r = sweep_lindahl_payoffs(town(), 16);
  ASSERT_EQ(r.certificates.size(), 1u);
  EXPECT_NEAR(max_abs_diff(r.certificates[0].payoffs, Vec{0.5, 0.5}), 0.0, 1e-9);
  EXPECT_EQ(r.cells, 256u);
  EXPECT_EQ(r.failures, 0u);
}

TEST(Sweep, SingleOutcome) {
  const auto r = sweep_lindahl_payoffs(CollectiveProblem(Matrix::from_rows({{2.0}, {3.0}})), 8);
  ASSERT_EQ(r.certificates.size(), 1u);
  EXPECT_NEAR(max_abs_diff(r.certificates[0].payoffs, Vec{2.0, 3.0}), 0.0, 1e-12);
}

TEST(Sweep, CakeCoversEquitableSegment) {
  const auto r = sweep_lindahl_payoffs(cake_market(), 64);
  const auto b = bargaining_of(cake_market());
  for (const auto& cert : r.certificates) ASSERT_TRUE(equitable_contains(b, cert.payoffs).member());
  const auto segs = equitable_set_2d(b);
  ASSERT_EQ(segs.size(), 1u);
  for (int s = 0; s <= 50; ++s) {
    const double t = s / 50.0;
    const Point x{segs[0].from[0] + t * (segs[0].to[0] - segs[0].from[0]),
                  segs[0].from[1] + t * (segs[0].to[1] - segs[0].from[1])};
    double best = 1e9;
    for (const auto& cert : r.certificates) best = std::min(best, max_abs_diff(cert.payoffs, x));
    EXPECT_LE(best, 2.0 / 64.0) << format_vec(x);
  }
}

TEST(Sweep, RandomPayoffsAreEquitable) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 2 + trial % 2;
    const auto p = random_problem(rng, n, 5);
    const auto r = sweep_lindahl_payoffs(p, n == 2 ? 24 : 8);
    const auto b = bargaining_of(p);
    ASSERT_FALSE(r.certificates.empty());
    EXPECT_EQ(r.failures, 0u);
    if (!b.full_dimensional()) continue;
    for (const auto& cert : r.certificates) ASSERT_TRUE(equitable_contains(b, cert.payoffs).member()) << trial;
  }
}

TEST(Sweep, SerialAndParallelAgree) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 4; ++trial) {
    const auto p = random_problem(rng, 3, 6);
    const auto s = sweep_lindahl_payoffs(p, 10, Exec::serial);
    const auto q = sweep_lindahl_payoffs(p, 10, Exec::parallel);
    ASSERT_EQ(s.certificates.size(), q.certificates.size());
    EXPECT_EQ(s.admissible_cells, q.admissible_cells);
    for (std::size_t e = 0; e < s.certificates.size(); ++e) {
      EXPECT_EQ(s.certificates[e].payoffs, q.certificates[e].payoffs);
      EXPECT_EQ(s.certificates[e].c, q.certificates[e].c);
    }
  }
}

TEST(Sweep, RejectsHugeGrid) {
  const auto p = CollectiveProblem(Matrix(5, 2, 1.0));
  EXPECT_THROW(sweep_lindahl_payoffs(p, 100), InvalidInput);
  EXPECT_THROW(sweep_lindahl_payoffs(town(), 0), InvalidInput);
}

TEST(UtilityShift, TownReverifies) {
  const auto shifted = utility_shift_embed(town(), Vec{1.0, 0.0});
  EXPECT_EQ(shifted.utility().row_vec(0), (Vec{2.0, 1.0}));
  const Matrix prices = Matrix::from_rows({{2.0, 0.0}, {0.0, 2.0}});
  EXPECT_TRUE(verify_lindahl(shifted, prices, Vec{0.5, 0.5}).passed());
  EXPECT_NEAR(max_abs_diff(shifted.payoffs(Vec{0.5, 0.5}), Vec{1.5, 0.5}), 0.0, 1e-12);
  EXPECT_EQ(utility_shift_embed(town(), Vec{0.0, 0.0}).utility(), town().utility());
  EXPECT_THROW(utility_shift_embed(town(), Vec{-1.0, 0.0}), InvalidInput);
}

TEST(UtilityShift, RandomCertificatesCarryOver) {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> lift(0.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_problem(rng, 3, 5);
    const auto cert = lindahl_from_nash(p, Vec(3, 0.0));
    ASSERT_TRUE(cert);
    const Vec lambda{lift(rng), lift(rng), lift(rng)};
    const auto shifted = utility_shift_embed(p, lambda);
    ASSERT_TRUE(verify_lindahl(shifted, cert->prices, cert->lottery).passed()) << trial;
    const auto pay = shifted.payoffs(cert->lottery);
    for (std::size_t i = 0; i < 3; ++i) ASSERT_NEAR(pay[i], cert->payoffs[i] + lambda[i], 1e-9);
  }
}

TEST(Certify, RepairsSlackBudget) {
  // Agent 1 is indifferent and spends only 0.3 of its budget.
  const CollectiveProblem p(Matrix::from_rows({{1.0, 0.0}, {1.0, 1.0}}));
  const Matrix prices = Matrix::from_rows({{1.0, 0.0}, {0.3, 0.3}});
  ASSERT_TRUE(verify_lindahl(p, prices, Vec{1.0, 0.0}).passed());
  const auto cert = certify_lindahl(p, prices, Vec{1.0, 0.0});
  EXPECT_EQ(cert.prices.row_vec(1), (Vec{1.0, 1.0}));
  EXPECT_NEAR(cert.alpha[1], 1.0, 1e-12);
  EXPECT_NEAR(cert.c[1], 0.0, 1e-12);
  EXPECT_NEAR(cert.alpha[0] + cert.c[0], 1.0, 1e-12);
  EXPECT_TRUE(verify_lindahl(p, cert.prices, cert.lottery).passed());
}

TEST(Certify, SingleOutcome) {
  const CollectiveProblem p(Matrix::from_rows({{5.0}, {3.0}}));
  const auto cert = certify_lindahl(p, Matrix::from_rows({{0.5}, {0.5}}), Vec{1.0});
  EXPECT_NEAR(cert.alpha[0], 5.0, 1e-12);
  EXPECT_NEAR(cert.alpha[1], 3.0, 1e-12);
  EXPECT_NEAR(cert.c[0], 0.0, 1e-12);
}

TEST(Certify, RejectsNonEquilibrium) {
  EXPECT_THROW(certify_lindahl(town(), Matrix::from_rows({{2.0, 0.0}, {0.0, 2.0}}), Vec{1.0, 0.0}), InvalidInput);
}

TEST(Certify, RecoversSweepCertificates) {
  const auto r = sweep_lindahl_payoffs(cake_market(), 16);
  for (const auto& cert : r.certificates) {
    const auto again = certify_lindahl(cake_market(), cert.prices, cert.lottery);
    EXPECT_NEAR(max_abs_diff(again.payoffs, cert.payoffs), 0.0, 1e-9);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(again.alpha[i] + again.c[i], again.payoffs[i], 1e-8);
  }
}
