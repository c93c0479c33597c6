#pragma once

#include "ccm/common.hpp"

namespace ccm {

/// Maximizer of sum_i log((G w)_i) over the weight simplex, where G is an
/// n x g nonnegative gain matrix (rows agents, columns generators).
struct LogSumMaximum {
  Vec weights;     // length g, on the simplex, entries below tol::kSupport dropped
  Vec payoff;      // G * weights
  double condition_residual = 0.0;  // max_j (sum_i G_ij / payoff_i - n)^+ and support equality gap
  std::size_t iterations = 0;
};

/// Log-barrier path following on the dual program
///     min -sum log w_i  s.t.  G^T w <= n e
/// whose multipliers are the weights and whose solution is w = 1 / payoff.
/// Throws InvalidInput if some row of G has no positive entry.
LogSumMaximum maximize_log_sum(const Matrix& gains);

}  // namespace ccm
