#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccm/nash.hpp"

using namespace ccm;

namespace {

// Two agents: the optimum lies on a segment between two columns, where the
// product of payoffs is a quadratic in the mixing weight.
double oracle_best_product_2d(const Matrix& g) {
  double best = 0.0;
  const std::size_t k = g.cols();
  for (std::size_t j = 0; j < k; ++j) best = std::max(best, g(0, j) * g(1, j));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t l = j + 1; l < k; ++l) {
      // (a0 + b0 t)(a1 + b1 t), t in [0, 1]
      const double a0 = g(0, l), b0 = g(0, j) - g(0, l);
      const double a1 = g(1, l), b1 = g(1, j) - g(1, l);
      const double qa = b0 * b1, qb = a0 * b1 + a1 * b0;
      if (qa < 0.0) {
        const double t = -qb / (2.0 * qa);
        if (t > 0.0 && t < 1.0) best = std::max(best, (a0 + b0 * t) * (a1 + b1 * t));
      }
    }
  return best;
}

double log_sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::log(x);
  return s;
}

Matrix random_gains(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::uniform_real_distribution<double> entry(0.0, 5.0);
  std::bernoulli_distribution zero(0.3);
  Matrix g(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) g(i, j) = zero(rng) ? 0.0 : entry(rng);
    g(i, i % k) = std::max(g(i, i % k), 0.5);
  }
  return g;
}

}  // namespace

TEST(LogSum, TwoOutcomeExample) {
  const auto r = maximize_log_sum(Matrix::from_rows({{2.0, 1.0}, {1.0, 3.0}}));
  EXPECT_NEAR(r.weights[0], 0.25, 1e-9);
  EXPECT_NEAR(r.weights[1], 0.75, 1e-9);
  EXPECT_NEAR(r.payoff[0], 1.25, 1e-9);
  EXPECT_NEAR(r.payoff[1], 2.5, 1e-9);
  EXPECT_LE(r.condition_residual, tol::kOpt);
}

TEST(LogSum, OneDimensionalGrid) {
  // Brute force over a fine grid of mixing weights.
  const Matrix g = Matrix::from_rows({{3.0, 0.5}, {0.2, 2.0}});
  double best = -1e300;
  for (int s = 0; s <= 100000; ++s) {
    const double t = s / 100000.0;
    best = std::max(best, std::log(3.0 * t + 0.5 * (1 - t)) + std::log(0.2 * t + 2.0 * (1 - t)));
  }
  const auto r = maximize_log_sum(g);
  EXPECT_NEAR(log_sum(r.payoff), best, 1e-8);
}

TEST(LogSum, DictatorColumns) {
  const auto r = maximize_log_sum(Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  EXPECT_NEAR(r.weights[0], 0.5, 1e-9);
  EXPECT_NEAR(r.weights[1], 0.5, 1e-9);
}

TEST(LogSum, DominantColumn) {
  const auto r = maximize_log_sum(Matrix::from_rows({{1.0, 2.0, 0.5}, {1.0, 2.0, 0.5}}));
  EXPECT_NEAR(r.weights[1], 1.0, 1e-9);
  EXPECT_NEAR(r.payoff[0], 2.0, 1e-9);
}

TEST(LogSum, RejectsAgentWithoutGain) {
  EXPECT_THROW(maximize_log_sum(Matrix::from_rows({{1.0, 2.0}, {0.0, 0.0}})), InvalidInput);
  EXPECT_THROW(maximize_log_sum(Matrix::from_rows({{1.0, -2.0}, {1.0, 1.0}})), InvalidInput);
}

TEST(LogSum, MatchesPairwiseOracleForTwoAgents) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> cols(1, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const Matrix g = random_gains(rng, 2, cols(rng));
    const auto r = maximize_log_sum(g);
    ASSERT_NEAR(log_sum(r.payoff), std::log(oracle_best_product_2d(g)), 1e-9) << trial;
  }
}

TEST(LogSum, OptimalityConditionHoldsOnAllColumns) {
  // sum_i G_ij / payoff_i <= n for every column characterizes the maximizer.
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<std::size_t> dim(2, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = dim(rng);
    const Matrix g = random_gains(rng, n, dim(rng) + 1);
    const auto r = maximize_log_sum(g);
    ASSERT_NEAR(sum(r.weights), 1.0, 1e-12);
    for (std::size_t j = 0; j < g.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += g(i, j) / r.payoff[i];
      ASSERT_LE(s, static_cast<double>(n) + 1e-8) << trial << " column " << j;
      if (r.weights[j] > tol::kSupport) ASSERT_NEAR(s, static_cast<double>(n), 1e-8);
    }
  }
}

TEST(LogSum, RowScalingScalesPayoffOnly) {
  std::mt19937_64 rng(4);
  const Matrix g = random_gains(rng, 3, 5);
  Matrix scaled = g;
  for (std::size_t j = 0; j < g.cols(); ++j) scaled(1, j) *= 7.0;
  const auto a = maximize_log_sum(g);
  const auto b = maximize_log_sum(scaled);
  EXPECT_NEAR(b.payoff[0], a.payoff[0], 1e-8);
  EXPECT_NEAR(b.payoff[1], 7.0 * a.payoff[1], 1e-7);
  EXPECT_NEAR(b.payoff[2], a.payoff[2], 1e-8);
}

TEST(LogSum, Deterministic) {
  std::mt19937_64 rng(17);
  const Matrix g = random_gains(rng, 4, 7);
  const auto a = maximize_log_sum(g);
  const auto b = maximize_log_sum(g);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.payoff, b.payoff);
}
