#pragma once

#include <vector>

#include "ccm/market.hpp"

namespace ccm {

/// partner[i] is i's match; partner[i] == i leaves i unmatched.
using Assignment = std::vector<std::size_t>;

/// One-to-one matching without transfers over an explicit list of feasible
/// matchings.
///
/// Matchings that leave some agent below the unmatched payoff are dropped on
/// construction, and utilities for partners no feasible matching delivers are
/// set to zero. Throws InvalidInput when a matching is not an involution, an
/// agent's self-utility is nonzero, or an agent values none of their feasible
/// partners.
class MatchingProblem {
 public:
  MatchingProblem(std::vector<Assignment> matchings, Matrix partner_utility);

  std::size_t agents() const { return w_.rows(); }
  const std::vector<Assignment>& matchings() const { return k_; }
  const Matrix& partner_utility() const { return w_; }
  /// Partners delivered by some feasible matching, ascending.
  const std::vector<std::size_t>& partners(std::size_t agent) const { return reach_[agent]; }
  bool reachable(std::size_t agent, std::size_t partner) const;
  std::size_t dropped() const { return dropped_; }

 private:
  std::vector<Assignment> k_;
  Matrix w_;
  std::vector<std::vector<std::size_t>> reach_;
  std::size_t dropped_ = 0;
};

/// Every involution of {0..n-1}, n <= 6, identity first.
std::vector<Assignment> all_involutions(std::size_t n);

/// Matchings that only pair agents on opposite sides (side[i] in {0, 1}).
std::vector<Assignment> two_sided_matchings(const std::vector<int>& side);

/// One outcome per matching, u_i^j = w_i^{j(i)}.
CollectiveProblem to_collective(const MatchingProblem& m);

/// Price of partner m: the cheapest matching delivering m to i.
Matrix prices_to_partner(const Matrix& prices, const MatchingProblem& m);

/// Probability that i is matched with m under the lottery.
Matrix allocation_to_demand(std::span<const double> lottery, const MatchingProblem& m);

Verdict verify_walras_matching(const MatchingProblem& m, const Matrix& partner_prices, const Matrix& demand,
                               std::span<const double> lottery, double tol = tol::kVerify);

struct PartnerEquilibrium {
  Matrix partner_prices;
  Matrix demand;
  Vec lottery;
};

/// Throws InvalidInput unless (p, q) is a Lindahl equilibrium of the induced
/// collective problem.
PartnerEquilibrium lindahl_to_walras(const MatchingProblem& m, const Matrix& prices, std::span<const double> lottery);

struct OutcomeEquilibrium {
  Matrix prices;
  Vec lottery;
};

/// Throws InvalidInput unless the triple is a Walrasian equilibrium.
OutcomeEquilibrium walras_to_lindahl(const MatchingProblem& m, const PartnerEquilibrium& eq);

/// w_i . xi_i per agent.
Vec partner_payoffs(const MatchingProblem& m, const Matrix& demand);

struct CostlyDuplicate {
  std::size_t agent;
  std::size_t bought;   // matching with positive mass
  std::size_t cheaper;  // same partner, strictly lower price
};

/// Matchings in the support that some cheaper matching with the same partner
/// undercuts. Empty at every verified equilibrium.
std::vector<CostlyDuplicate> minimal_cost_lint(const MatchingProblem& m, const Matrix& prices,
                                               std::span<const double> lottery);

}  // namespace ccm
