#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccm/parallel.hpp"
#include "ccm/polytope.hpp"

namespace ccm {

/// n agents with nonnegative vNM utilities over k social outcomes. Every
/// agent must value some outcome.
class CollectiveProblem {
 public:
  explicit CollectiveProblem(Matrix utility);

  const Matrix& utility() const { return u_; }
  std::size_t agents() const { return u_.rows(); }
  std::size_t outcomes() const { return u_.cols(); }

  /// u_i . q for every agent.
  Vec payoffs(std::span<const double> lottery) const;

 private:
  Matrix u_;
};

/// coco of the outcome payoff columns and the origin.
Polytope bargaining_of(const CollectiveProblem& p);

struct Violation {
  std::string condition;  // budget, consumer_optimum, minimal_cost, lottery_total, lottery_sign, firm_revenue, ...
  std::ptrdiff_t agent = -1;  // -1 for firm-side conditions
  double slack = 0.0;         // signed amount by which the condition fails
  std::string detail;
};

struct Verdict {
  std::vector<Violation> violations;
  bool passed() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks that q is a minimal-cost utility maximizer for every consumer at
/// prices p and that it maximizes the firm's revenue over lotteries.
Verdict verify_lindahl(const CollectiveProblem& p, const Matrix& prices, std::span<const double> lottery,
                       double tol = tol::kVerify);

/// Rows max(u_i^j - c_i, 0). Throws InvalidInput unless 0 <= c_i < max_j u_i^j.
CollectiveProblem shifted_utilities(const CollectiveProblem& p, std::span<const double> c);

struct NashAllocation {
  Vec lottery;
  Vec payoffs;
  double condition_residual = 0.0;
};

/// Maximizer of sum_i log(u_i . q) over lotteries.
NashAllocation nash_allocation(const CollectiveProblem& p);

/// Every outcome in the support of q gives each agent at least c_i.
bool admissible(const CollectiveProblem& p, std::span<const double> c, std::span<const double> lottery);

struct LindahlCertificate {
  Matrix prices;
  Vec lottery;
  Vec payoffs;  // u_i . q
  Vec alpha;    // budget multipliers
  Vec c;        // utility floors; payoffs = alpha + c

  /// The simplex game n*alpha (x) Delta + c that dominates the bargaining set.
  SimplexGame witness() const { return SimplexGame(alpha, c); }
};

/// Lindahl equilibrium from a Nash allocation of the c-shifted problem, or
/// nothing when no maximizer is admissible. The maximizer is sought among
/// admissible outcomes first, since maximizers need not be unique. Throws
/// NumericalError if the constructed equilibrium fails verification.
std::optional<LindahlCertificate> lindahl_from_nash(const CollectiveProblem& p, std::span<const double> c);

struct SweepResult {
  std::vector<LindahlCertificate> certificates;  // distinct payoffs in lexicographic c order
  std::size_t cells = 0;
  std::size_t admissible_cells = 0;
  std::size_t failures = 0;  // cells whose construction raised a numerical error
};

/// Lindahl equilibria over the grid c_i = (s / steps) max_j u_i^j, s = 0..steps-1.
SweepResult sweep_lindahl_payoffs(const CollectiveProblem& p, std::size_t steps, Exec exec = Exec::parallel);

/// Rows u_i + lambda_i.
CollectiveProblem utility_shift_embed(const CollectiveProblem& p, std::span<const double> lambda);

/// Shadow prices (alpha, c) of a verified equilibrium. Consumers with a slack
/// budget first have their bliss-outcome prices raised to at least one.
/// Throws InvalidInput if (p, q) is not a Lindahl equilibrium.
LindahlCertificate certify_lindahl(const CollectiveProblem& p, const Matrix& prices, std::span<const double> lottery);

}  // namespace ccm
