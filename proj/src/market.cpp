#include "ccm/market.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccm/lp.hpp"
#include "ccm/nash.hpp"

namespace ccm {

namespace {

double magnitude(const Matrix& a) {
  double m = 1.0;
  for (std::size_t i = 0; i < a.rows(); ++i) m = std::max(m, max_abs(a.row(i)));
  return m;
}

void require_shape(const CollectiveProblem& p, const Matrix& prices, std::span<const double> lottery) {
  if (prices.rows() != p.agents() || prices.cols() != p.outcomes())
    throw InvalidInput("price profile must be " + std::to_string(p.agents()) + "x" + std::to_string(p.outcomes()));
  if (lottery.size() != p.outcomes())
    throw InvalidInput("lottery must have " + std::to_string(p.outcomes()) + " entries");
  for (std::size_t i = 0; i < prices.rows(); ++i)
    for (double v : prices.row(i))
      if (!std::isfinite(v) || v < 0.0) throw InvalidInput("prices must be finite and nonnegative");
  if (!all_finite(lottery)) throw InvalidInput("lottery must be finite");
}

}  // namespace

CollectiveProblem::CollectiveProblem(Matrix utility) : u_(std::move(utility)) {
  if (u_.rows() == 0 || u_.cols() == 0) throw InvalidInput("utility matrix must have at least one agent and outcome");
  for (std::size_t i = 0; i < u_.rows(); ++i) {
    bool stake = false;
    for (double v : u_.row(i)) {
      if (!std::isfinite(v) || v < 0.0) throw InvalidInput("utilities must be finite and nonnegative");
      stake = stake || v > 0.0;
    }
    if (!stake) throw InvalidInput("agent " + std::to_string(i) + " values no outcome");
  }
}

Vec CollectiveProblem::payoffs(std::span<const double> lottery) const {
  if (lottery.size() != outcomes()) throw InvalidInput("lottery length does not match outcome count");
  Vec out(agents());
  for (std::size_t i = 0; i < agents(); ++i) out[i] = dot(u_.row(i), lottery);
  return out;
}

Polytope bargaining_of(const CollectiveProblem& p) {
  std::vector<Point> pts;
  pts.reserve(p.outcomes() + 1);
  for (std::size_t j = 0; j < p.outcomes(); ++j) pts.push_back(p.utility().col_vec(j));
  pts.emplace_back(p.agents(), 0.0);
  return Polytope::coco_hull(pts);
}

std::string Verdict::summary() const {
  if (violations.empty()) return "pass";
  std::ostringstream os;
  for (std::size_t v = 0; v < violations.size(); ++v) {
    const Violation& x = violations[v];
    if (v) os << "; ";
    os << x.condition;
    if (x.agent >= 0) os << " (agent " << x.agent << ")";
    os << " slack " << x.slack;
    if (!x.detail.empty()) os << ": " << x.detail;
  }
  return os.str();
}

Verdict verify_lindahl(const CollectiveProblem& p, const Matrix& prices, std::span<const double> lottery,
                       double tol) {
  require_shape(p, prices, lottery);
  const double slack_tol = tol * std::max(magnitude(p.utility()), magnitude(prices));
  Verdict out;
  auto fail = [&](std::string cond, std::ptrdiff_t agent, double slack, std::string detail = {}) {
    out.violations.push_back({std::move(cond), agent, slack, std::move(detail)});
  };

  for (std::size_t j = 0; j < lottery.size(); ++j)
    if (lottery[j] < -tol) fail("lottery_sign", -1, -lottery[j], "outcome " + std::to_string(j));
  const double total = sum(lottery);
  if (std::abs(total - 1.0) > tol) fail("lottery_total", -1, total - 1.0);

  const Matrix& u = p.utility();
  for (std::size_t i = 0; i < p.agents(); ++i) {
    const auto agent = static_cast<std::ptrdiff_t>(i);
    const double spend = dot(prices.row(i), lottery);
    if (spend - 1.0 > slack_tol) fail("budget", agent, spend - 1.0);
    const double have = dot(u.row(i), lottery);
    const lp::ConsumerSolution best = lp::consumer_problem(u.row(i), prices.row(i));
    if (best.value - have > slack_tol) fail("consumer_optimum", agent, best.value - have);
    const lp::MinimalCostDemand cheap = lp::minimal_cost_demand(u.row(i), prices.row(i), lp::TieBreak::none);
    if (spend - cheap.cost > slack_tol) fail("minimal_cost", agent, spend - cheap.cost);
  }

  double revenue = 0.0;
  for (std::size_t i = 0; i < p.agents(); ++i) revenue += dot(prices.row(i), lottery);
  double best_column = 0.0;
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < p.outcomes(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < p.agents(); ++i) col += prices(i, j);
    if (col > best_column) {
      best_column = col;
      best_j = j;
    }
  }
  if (best_column - revenue > slack_tol)
    fail("firm_revenue", -1, best_column - revenue, "outcome " + std::to_string(best_j) + " earns more");
  return out;
}

CollectiveProblem shifted_utilities(const CollectiveProblem& p, std::span<const double> c) {
  if (c.size() != p.agents()) throw InvalidInput("floor vector must have one entry per agent");
  Matrix shifted = p.utility();
  for (std::size_t i = 0; i < p.agents(); ++i) {
    const double top = max_abs(p.utility().row(i));
    if (!std::isfinite(c[i]) || c[i] < 0.0 || c[i] >= top)
      throw InvalidInput("floor " + std::to_string(c[i]) + " of agent " + std::to_string(i) + " outside [0, " +
                         std::to_string(top) + ")");
    for (double& v : shifted.row(i)) v = std::max(v - c[i], 0.0);
  }
  return CollectiveProblem(std::move(shifted));
}

NashAllocation nash_allocation(const CollectiveProblem& p) {
  const LogSumMaximum m = maximize_log_sum(p.utility());
  return {m.weights, m.payoff, m.condition_residual};
}

bool admissible(const CollectiveProblem& p, std::span<const double> c, std::span<const double> lottery) {
  if (c.size() != p.agents() || lottery.size() != p.outcomes()) throw InvalidInput("admissibility: shape mismatch");
  for (std::size_t j = 0; j < p.outcomes(); ++j) {
    if (lottery[j] <= tol::kSupport) continue;
    for (std::size_t i = 0; i < p.agents(); ++i)
      if (p.utility()(i, j) < c[i] - tol::kLp) return false;
  }
  return true;
}

namespace {

std::optional<Vec> admissible_nash_lottery(const CollectiveProblem& p, const CollectiveProblem& shifted,
                                           std::span<const double> c) {
  const std::size_t n = p.agents(), k = p.outcomes();
  const Matrix& u = p.utility();
  const Matrix& gain = shifted.utility();
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < k; ++j) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = u(i, j) >= c[i] - tol::kLp;
    if (ok) keep.push_back(j);
  }
  if (keep.empty()) return std::nullopt;
  Matrix sub(n, keep.size());
  for (std::size_t i = 0; i < n; ++i) {
    bool stake = false;
    for (std::size_t t = 0; t < keep.size(); ++t) {
      sub(i, t) = gain(i, keep[t]);
      stake = stake || sub(i, t) > 0.0;
    }
    if (!stake) return std::nullopt;
  }
  const LogSumMaximum m = maximize_log_sum(sub);
  // The maximizer over admissible outcomes is a maximizer over all of them
  // exactly when no outcome's normalized gain exceeds n.
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += gain(i, j) / m.payoff[i];
    if (s > static_cast<double>(n) + tol::kVerify) return std::nullopt;
  }
  Vec lottery(k, 0.0);
  for (std::size_t t = 0; t < keep.size(); ++t) lottery[keep[t]] = m.weights[t];
  return lottery;
}

}  // namespace

std::optional<LindahlCertificate> lindahl_from_nash(const CollectiveProblem& p, std::span<const double> c) {
  const CollectiveProblem shifted = shifted_utilities(p, c);
  std::optional<Vec> lottery = admissible_nash_lottery(p, shifted, c);
  if (!lottery) return std::nullopt;

  const std::size_t n = p.agents();
  LindahlCertificate cert;
  cert.lottery = std::move(*lottery);
  cert.c.assign(c.begin(), c.end());
  cert.alpha.resize(n);
  cert.prices = shifted.utility();
  for (std::size_t i = 0; i < n; ++i) {
    cert.alpha[i] = dot(shifted.utility().row(i), cert.lottery);
    if (!(cert.alpha[i] > 0.0)) throw NumericalError("Nash allocation gives an agent zero shifted utility");
    for (double& v : cert.prices.row(i)) v /= cert.alpha[i];
  }
  cert.payoffs = p.payoffs(cert.lottery);

  const double scale = magnitude(p.utility());
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(cert.payoffs[i] - cert.alpha[i] - cert.c[i]) > tol::kVerify * scale)
      throw NumericalError("payoffs differ from alpha + c for agent " + std::to_string(i));
  const Verdict v = verify_lindahl(p, cert.prices, cert.lottery);
  if (!v.passed()) throw NumericalError("constructed equilibrium fails verification: " + v.summary());
  return cert;
}

CollectiveProblem utility_shift_embed(const CollectiveProblem& p, std::span<const double> lambda) {
  if (lambda.size() != p.agents()) throw InvalidInput("shift vector must have one entry per agent");
  Matrix v = p.utility();
  for (std::size_t i = 0; i < p.agents(); ++i) {
    if (!std::isfinite(lambda[i]) || lambda[i] < 0.0) throw InvalidInput("shifts must be finite and nonnegative");
    for (double& x : v.row(i)) x += lambda[i];
  }
  return CollectiveProblem(std::move(v));
}

LindahlCertificate certify_lindahl(const CollectiveProblem& p, const Matrix& prices, std::span<const double> lottery) {
  const Verdict v = verify_lindahl(p, prices, lottery);
  if (!v.passed()) throw InvalidInput("not a Lindahl equilibrium: " + v.summary());

  const Matrix& u = p.utility();
  const double scale = std::max(magnitude(u), magnitude(prices));
  LindahlCertificate cert;
  cert.prices = prices;
  cert.lottery.assign(lottery.begin(), lottery.end());
  bool repaired = false;
  for (std::size_t i = 0; i < p.agents(); ++i) {
    if (dot(prices.row(i), lottery) >= 1.0 - tol::kVerify * scale) continue;
    // A slack budget means q only buys bliss outcomes; pricing all of them at
    // one makes the budget bind without changing either side's optimum.
    const double top = max_abs(u.row(i));
    for (std::size_t j = 0; j < p.outcomes(); ++j)
      if (u(i, j) >= top - tol::kLp * scale) cert.prices(i, j) = 1.0;
    repaired = true;
  }
  if (repaired) {
    const Verdict again = verify_lindahl(p, cert.prices, cert.lottery);
    if (!again.passed()) throw NumericalError("budget repair broke the equilibrium: " + again.summary());
  }

  cert.payoffs = p.payoffs(cert.lottery);
  cert.alpha.resize(p.agents());
  cert.c.resize(p.agents());
  for (std::size_t i = 0; i < p.agents(); ++i) {
    const lp::ShadowPrices s = lp::shadow_prices(u.row(i), cert.prices.row(i), cert.lottery);
    cert.alpha[i] = s.alpha;
    cert.c[i] = s.c;
  }
  return cert;
}

}  // namespace ccm
