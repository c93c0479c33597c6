#pragma once

#include <span>
#include <string>

#include "ccm/common.hpp"

/// Small dense linear programming with primal and dual solutions.
///
/// Problems are always posed as
///
///     maximize c.x  subject to  A x <= b,  x >= 0
///
/// and solved by a two-phase tableau simplex with Bland's rule, so identical
/// inputs always pivot identically. Rows and the objective are normalized to
/// unit max-norm internally; the returned primal and dual refer to the
/// caller's unscaled problem.
namespace ccm::lp {

enum class Status { optimal, infeasible, unbounded };

std::string to_string(Status s);

struct LinearProgram {
  Vec objective;       // length m
  Matrix constraints;  // r x m
  Vec rhs;             // length r
};

struct Solution {
  Status status = Status::infeasible;
  Vec primal;  // length m
  Vec dual;    // length r, one multiplier per constraint row
  double objective_value = 0.0;
  std::size_t pivots = 0;
};

/// Optimality residuals of a solution, all measured on the unscaled problem.
struct Residuals {
  double primal_infeasibility = 0.0;  // max (A x - b)^+ and max (-x)^+
  double dual_infeasibility = 0.0;    // max (c - A^T mu)^+ and max (-mu)^+
  double complementarity = 0.0;       // max |mu_r (b - A x)_r| and |x_j (A^T mu - c)_j|
  double duality_gap = 0.0;           // |c.x - b.mu|
};

/// Throws InvalidInput for malformed programs and NumericalError when the
/// pivot budget is exhausted.
Solution solve(const LinearProgram& lp);

Residuals residuals(const LinearProgram& lp, const Solution& sol);

// ---------------------------------------------------------------------------
// The consumer's problem of a collective choice market:
//
//     U = max u.q  subject to  e.q <= 1  (dual mu0),  p.q <= 1  (dual mu1)

struct ConsumerSolution {
  double value = 0.0;
  Vec demand;
  double mu_total = 0.0;   // multiplier on e.q <= 1
  double mu_budget = 0.0;  // multiplier on p.q <= 1
};

ConsumerSolution consumer_problem(std::span<const double> utility, std::span<const double> prices);

struct MinimalCostDemand {
  Vec demand;
  double cost = 0.0;
  double value = 0.0;
};

enum class TieBreak { lexicographic, none };

/// Among maximizers of the consumer problem, one with least expenditure.
/// With TieBreak::lexicographic the remaining ties are broken towards the
/// lexicographically smallest demand (one extra LP per outcome).
MinimalCostDemand minimal_cost_demand(std::span<const double> utility, std::span<const double> prices,
                                      TieBreak tie_break = TieBreak::lexicographic);

/// Shadow prices (c, alpha) with alpha*p^j >= u^j - c for every outcome and
/// equality on the support of q.
struct ShadowPrices {
  double c = 0.0;
  double alpha = 0.0;
};

/// Requires q to be a minimal-cost consumer optimum on the simplex with a
/// binding budget; throws InvalidInput naming the failed precondition.
ShadowPrices shadow_prices(std::span<const double> utility, std::span<const double> prices,
                           std::span<const double> lottery);

}  // namespace ccm::lp
