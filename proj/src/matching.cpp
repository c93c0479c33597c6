#include "ccm/matching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ccm/lp.hpp"

namespace ccm {

namespace {

double magnitude(const Matrix& a) {
  double m = 1.0;
  for (std::size_t i = 0; i < a.rows(); ++i) m = std::max(m, max_abs(a.row(i)));
  return m;
}

void require_square(const Matrix& a, std::size_t n, const char* what) {
  if (a.rows() != n || a.cols() != n)
    throw InvalidInput(std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i)
    for (double v : a.row(i))
      if (!std::isfinite(v) || v < 0.0) throw InvalidInput(std::string(what) + " must be finite and nonnegative");
}

}  // namespace

MatchingProblem::MatchingProblem(std::vector<Assignment> matchings, Matrix partner_utility)
    : w_(std::move(partner_utility)) {
  const std::size_t n = w_.rows();
  if (n == 0 || w_.cols() != n) throw InvalidInput("partner utilities must be a nonempty square matrix");
  if (matchings.empty()) throw InvalidInput("no feasible matchings");
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : w_.row(i))
      if (!std::isfinite(v)) throw InvalidInput("partner utilities must be finite");
    if (w_(i, i) != 0.0) throw InvalidInput("being unmatched must yield zero utility");
  }
  for (const Assignment& a : matchings) {
    if (a.size() != n) throw InvalidInput("matching length differs from agent count");
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] >= n || a[a[i]] != i) throw InvalidInput("matching is not an involution");
    bool rational = true;
    for (std::size_t i = 0; i < n; ++i) rational = rational && w_(i, a[i]) >= 0.0;
    if (rational)
      k_.push_back(a);
    else
      ++dropped_;
  }
  if (k_.empty()) throw InvalidInput("no individually rational matching");

  reach_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (const Assignment& a : k_) reach_[i].push_back(a[i]);
    std::sort(reach_[i].begin(), reach_[i].end());
    reach_[i].erase(std::unique(reach_[i].begin(), reach_[i].end()), reach_[i].end());
    for (std::size_t m = 0; m < n; ++m)
      if (!reachable(i, m)) w_(i, m) = 0.0;
    bool stake = false;
    for (std::size_t m : reach_[i]) stake = stake || w_(i, m) > 0.0;
    if (!stake) throw InvalidInput("agent " + std::to_string(i) + " values none of their feasible partners");
  }
}

bool MatchingProblem::reachable(std::size_t agent, std::size_t partner) const {
  return std::binary_search(reach_[agent].begin(), reach_[agent].end(), partner);
}

std::vector<Assignment> all_involutions(std::size_t n) {
  if (n == 0 || n > 6) throw InvalidInput("involution enumeration supports 1..6 agents");
  std::vector<Assignment> out;
  Assignment a(n, n);
  std::function<void(std::size_t)> place = [&](std::size_t i) {
    while (i < n && a[i] != n) ++i;
    if (i == n) {
      out.push_back(a);
      return;
    }
    a[i] = i;
    place(i + 1);
    for (std::size_t m = i + 1; m < n; ++m) {
      if (a[m] != n) continue;
      a[i] = m;
      a[m] = i;
      place(i + 1);
      a[m] = n;
    }
    a[i] = n;
  };
  place(0);
  return out;
}

std::vector<Assignment> two_sided_matchings(const std::vector<int>& side) {
  const std::size_t n = side.size();
  for (int s : side)
    if (s != 0 && s != 1) throw InvalidInput("sides must be 0 or 1");
  std::vector<Assignment> out;
  for (Assignment& a : all_involutions(n)) {
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) ok = ok && (a[i] == i || side[a[i]] != side[i]);
    if (ok) out.push_back(std::move(a));
  }
  return out;
}

CollectiveProblem to_collective(const MatchingProblem& m) {
  const std::size_t n = m.agents(), k = m.matchings().size();
  Matrix u(n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) u(i, j) = m.partner_utility()(i, m.matchings()[j][i]);
  return CollectiveProblem(std::move(u));
}

Matrix prices_to_partner(const Matrix& prices, const MatchingProblem& m) {
  const std::size_t n = m.agents(), k = m.matchings().size();
  if (prices.rows() != n || prices.cols() != k) throw InvalidInput("price profile shape does not match problem");
  Matrix pi(n, n, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      double& slot = pi(i, m.matchings()[j][i]);
      slot = std::min(slot, prices(i, j));
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t mm = 0; mm < n; ++mm)
      if (mm == i || !m.reachable(i, mm)) pi(i, mm) = 0.0;
  return pi;
}

Matrix allocation_to_demand(std::span<const double> lottery, const MatchingProblem& m) {
  const std::size_t n = m.agents();
  if (lottery.size() != m.matchings().size()) throw InvalidInput("lottery length does not match matching count");
  Matrix xi(n, n);
  for (std::size_t j = 0; j < lottery.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) xi(i, m.matchings()[j][i]) += lottery[j];
  return xi;
}

Vec partner_payoffs(const MatchingProblem& m, const Matrix& demand) {
  Vec out(m.agents());
  for (std::size_t i = 0; i < m.agents(); ++i) out[i] = dot(m.partner_utility().row(i), demand.row(i));
  return out;
}

Verdict verify_walras_matching(const MatchingProblem& m, const Matrix& partner_prices, const Matrix& demand,
                               std::span<const double> lottery, double tol) {
  const std::size_t n = m.agents(), k = m.matchings().size();
  require_square(partner_prices, n, "partner prices");
  if (demand.rows() != n || demand.cols() != n) throw InvalidInput("demand must be square");
  if (lottery.size() != k) throw InvalidInput("lottery length does not match matching count");
  if (!all_finite(lottery)) throw InvalidInput("lottery must be finite");

  Matrix xi = demand;
  for (std::size_t i = 0; i < n; ++i)
    for (double& v : xi.row(i))
      if (std::abs(v) < tol::kSupport) v = 0.0;

  const double slack_tol = tol * std::max(magnitude(m.partner_utility()), magnitude(partner_prices));
  Verdict out;
  auto fail = [&](std::string cond, std::ptrdiff_t agent, double slack, std::string detail = {}) {
    out.violations.push_back({std::move(cond), agent, slack, std::move(detail)});
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto agent = static_cast<std::ptrdiff_t>(i);
    for (std::size_t mm = 0; mm < n; ++mm) {
      if ((mm == i || !m.reachable(i, mm)) && partner_prices(i, mm) != 0.0)
        fail("price_normalization", agent, partner_prices(i, mm), "partner " + std::to_string(mm));
      if (xi(i, mm) < 0.0) fail("demand_sign", agent, -xi(i, mm), "partner " + std::to_string(mm));
      if (xi(i, mm) > 0.0 && !m.reachable(i, mm))
        fail("demand_support", agent, xi(i, mm), "partner " + std::to_string(mm) + " is infeasible");
    }
    const double mass = sum(xi.row(i));
    if (mass - 1.0 > tol) fail("demand_total", agent, mass - 1.0);

    // (M1) on the feasible partners only.
    const auto& nb = m.partners(i);
    Vec w(nb.size()), pr(nb.size()), x(nb.size());
    for (std::size_t t = 0; t < nb.size(); ++t) {
      w[t] = m.partner_utility()(i, nb[t]);
      pr[t] = partner_prices(i, nb[t]);
      x[t] = xi(i, nb[t]);
    }
    const double spend = dot(pr, x);
    if (spend - 1.0 > slack_tol) fail("budget", agent, spend - 1.0);
    const lp::ConsumerSolution best = lp::consumer_problem(w, pr);
    const double have = dot(w, x);
    if (best.value - have > slack_tol) fail("consumer_optimum", agent, best.value - have);
    const lp::MinimalCostDemand cheap = lp::minimal_cost_demand(w, pr, lp::TieBreak::none);
    if (spend - cheap.cost > slack_tol) fail("minimal_cost", agent, spend - cheap.cost);
  }

  // (M2)
  double total = 0.0, revenue = 0.0, best = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (lottery[j] < -tol) fail("lottery_sign", -1, -lottery[j], "matching " + std::to_string(j));
    double rev = 0.0;
    for (std::size_t i = 0; i < n; ++i) rev += partner_prices(i, m.matchings()[j][i]);
    revenue += rev * lottery[j];
    best = std::max(best, rev);
    total += lottery[j];
  }
  if (total - 1.0 > tol) fail("lottery_total", -1, total - 1.0);
  if (best - revenue > slack_tol) fail("firm_revenue", -1, best - revenue);

  // (M3)
  const Matrix supplied = allocation_to_demand(lottery, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t mm = 0; mm < n; ++mm) {
      const double gap = xi(i, mm) - supplied(i, mm);
      if (std::abs(gap) > tol)
        fail("market_clearing", static_cast<std::ptrdiff_t>(i), gap, "partner " + std::to_string(mm));
    }
  return out;
}

PartnerEquilibrium lindahl_to_walras(const MatchingProblem& m, const Matrix& prices, std::span<const double> lottery) {
  const Verdict in = verify_lindahl(to_collective(m), prices, lottery);
  if (!in.passed()) throw InvalidInput("not a Lindahl equilibrium: " + in.summary());
  PartnerEquilibrium eq{prices_to_partner(prices, m), allocation_to_demand(lottery, m),
                        Vec(lottery.begin(), lottery.end())};
  const Verdict outv = verify_walras_matching(m, eq.partner_prices, eq.demand, eq.lottery);
  if (!outv.passed()) throw NumericalError("converted partner equilibrium fails verification: " + outv.summary());
  return eq;
}

OutcomeEquilibrium walras_to_lindahl(const MatchingProblem& m, const PartnerEquilibrium& eq) {
  const Verdict in = verify_walras_matching(m, eq.partner_prices, eq.demand, eq.lottery);
  if (!in.passed()) throw InvalidInput("not a Walrasian equilibrium: " + in.summary());
  const std::size_t n = m.agents(), k = m.matchings().size();
  OutcomeEquilibrium out{Matrix(n, k), eq.lottery};
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) out.prices(i, j) = eq.partner_prices(i, m.matchings()[j][i]);
  const Verdict v = verify_lindahl(to_collective(m), out.prices, out.lottery);
  if (!v.passed()) throw NumericalError("converted Lindahl equilibrium fails verification: " + v.summary());
  return out;
}

std::vector<CostlyDuplicate> minimal_cost_lint(const MatchingProblem& m, const Matrix& prices,
                                               std::span<const double> lottery) {
  const std::size_t n = m.agents(), k = m.matchings().size();
  if (prices.rows() != n || prices.cols() != k || lottery.size() != k) throw InvalidInput("lint: shape mismatch");
  const double gap = tol::kVerify * magnitude(prices);
  std::vector<CostlyDuplicate> out;
  for (std::size_t j = 0; j < k; ++j) {
    if (lottery[j] <= tol::kSupport) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t jj = 0; jj < k; ++jj)
        if (m.matchings()[jj][i] == m.matchings()[j][i] && prices(i, j) > prices(i, jj) + gap) {
          out.push_back({i, j, jj});
          break;
        }
  }
  return out;
}

}  // namespace ccm
