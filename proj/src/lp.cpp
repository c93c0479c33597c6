#include "ccm/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccm::lp {

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-11;
constexpr double kPhaseOneEps = 1e-9;
constexpr double kDropEps = 1e-13;

// Tableau over [structural | slack | artificial | rhs]; row `rows` is the
// reduced-cost row z_j = c_B B^-1 a_j - c_j (maximization).
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), t_(rows + 1, cols + 1) {}

  double& at(std::size_t r, std::size_t c) { return t_(r, c); }
  double at(std::size_t r, std::size_t c) const { return t_(r, c); }
  double& rhs(std::size_t r) { return t_(r, cols_); }
  double& z(std::size_t c) { return t_(rows_, c); }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / t_(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) t_(pr, c) *= inv;
    t_(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = t_(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) {
        double& x = t_(r, c);
        x -= f * t_(pr, c);
        // Round-off left on degenerate rows defeats the anti-cycling rule.
        if (std::abs(x) < kDropEps) x = 0.0;
      }
      t_(r, pc) = 0.0;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_, cols_;
  Matrix t_;
};

enum class Outcome { optimal, unbounded };

// Bland's rule: lowest-index improving column, ties in the ratio test broken
// by the lowest basic variable index.
Outcome run_simplex(Tableau& tab, std::vector<std::size_t>& basis, std::size_t allowed_cols,
                    std::size_t& pivots, std::size_t budget) {
  for (;;) {
    std::size_t enter = allowed_cols;
    for (std::size_t c = 0; c < allowed_cols; ++c) {
      if (tab.z(c) < -kCostEps) {
        enter = c;
        break;
      }
    }
    if (enter == allowed_cols) return Outcome::optimal;

    std::size_t leave = tab.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < tab.rows(); ++r) {
      const double a = tab.at(r, enter);
      if (a <= kPivotEps) continue;
      const double ratio = tab.rhs(r) / a;
      const double tie = leave == tab.rows() ? 0.0 : 1e-12 * std::max(1.0, std::abs(best));
      if (leave == tab.rows() || ratio < best - tie) {
        best = ratio;
        leave = r;
      } else if (ratio <= best + tie && basis[r] < basis[leave]) {
        leave = r;
      }
    }
    if (leave == tab.rows()) return Outcome::unbounded;

    tab.pivot(leave, enter);
    basis[leave] = enter;
    if (++pivots > budget) throw NumericalError("simplex: pivot budget exhausted (cycling or ill-conditioned input)");
  }
}

void validate(const LinearProgram& lp) {
  const std::size_t m = lp.objective.size();
  const std::size_t r = lp.rhs.size();
  if (m == 0) throw InvalidInput("lp: no variables");
  if (lp.constraints.rows() != r) throw InvalidInput("lp: constraint rows do not match rhs length");
  if (r > 0 && lp.constraints.cols() != m) throw InvalidInput("lp: constraint columns do not match objective length");
  if (!all_finite(lp.objective) || !all_finite(lp.rhs)) throw InvalidInput("lp: non-finite coefficient");
  for (std::size_t i = 0; i < r; ++i)
    if (!all_finite(lp.constraints.row(i))) throw InvalidInput("lp: non-finite coefficient");
}

}  // namespace

Solution solve(const LinearProgram& lp) {
  validate(lp);
  const std::size_t m = lp.objective.size();
  const std::size_t r = lp.rhs.size();

  Vec row_scale(r, 1.0);
  for (std::size_t i = 0; i < r; ++i) {
    const double mx = std::max(max_abs(lp.constraints.row(i)), std::abs(lp.rhs[i]));
    if (mx > 0.0) row_scale[i] = 1.0 / mx;
  }
  double obj_scale = max_abs(lp.objective);
  if (obj_scale == 0.0) obj_scale = 1.0;

  std::vector<std::size_t> art_row;
  for (std::size_t i = 0; i < r; ++i)
    if (lp.rhs[i] < 0.0) art_row.push_back(i);
  const std::size_t n_art = art_row.size();
  const std::size_t n_cols = m + r + n_art;

  Tableau tab(r, n_cols);
  std::vector<std::size_t> basis(r);
  std::size_t next_art = 0;
  for (std::size_t i = 0; i < r; ++i) {
    const double s = row_scale[i];
    const bool flip = lp.rhs[i] < 0.0;
    const double sign = flip ? -1.0 : 1.0;
    for (std::size_t j = 0; j < m; ++j) tab.at(i, j) = sign * s * lp.constraints(i, j);
    tab.at(i, m + i) = sign;
    tab.rhs(i) = sign * s * lp.rhs[i];
    if (flip) {
      tab.at(i, m + r + next_art) = 1.0;
      basis[i] = m + r + next_art;
      ++next_art;
    } else {
      basis[i] = m + i;
    }
  }

  Solution sol;
  const std::size_t budget = 200 * (n_cols + r + 10);

  if (n_art > 0) {
    // Phase one: maximize -sum(artificials).
    for (std::size_t c = 0; c <= n_cols; ++c) {
      double v = 0.0;
      for (std::size_t i = 0; i < r; ++i)
        if (basis[i] >= m + r) v -= (c == n_cols ? tab.rhs(i) : tab.at(i, c));
      tab.z(c) = v;
    }
    for (std::size_t a = 0; a < n_art; ++a) tab.z(m + r + a) += 1.0;
    run_simplex(tab, basis, n_cols, sol.pivots, budget);
    if (tab.z(n_cols) < -kPhaseOneEps) {
      sol.status = Status::infeasible;
      sol.primal.assign(m, 0.0);
      sol.dual.assign(r, 0.0);
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < r; ++i) {
      if (basis[i] < m + r) continue;
      for (std::size_t c = 0; c < m + r; ++c) {
        if (std::abs(tab.at(i, c)) > kPivotEps) {
          tab.pivot(i, c);
          basis[i] = c;
          break;
        }
      }
    }
  }

  // Phase two objective on the scaled problem.
  Vec cost(n_cols + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) cost[j] = lp.objective[j] / obj_scale;
  for (std::size_t c = 0; c <= n_cols; ++c) {
    double v = (c < n_cols) ? -cost[c] : 0.0;
    for (std::size_t i = 0; i < r; ++i) v += cost[basis[i]] * (c == n_cols ? tab.rhs(i) : tab.at(i, c));
    tab.z(c) = v;
  }
  if (run_simplex(tab, basis, m + r, sol.pivots, budget) == Outcome::unbounded) {
    sol.status = Status::unbounded;
    sol.primal.assign(m, 0.0);
    sol.dual.assign(r, 0.0);
    return sol;
  }

  sol.status = Status::optimal;
  sol.primal.assign(m, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    if (basis[i] < m) sol.primal[basis[i]] = std::max(0.0, tab.rhs(i));
  sol.dual.assign(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) sol.dual[i] = std::max(0.0, tab.z(m + i)) * obj_scale * row_scale[i];
  sol.objective_value = dot(lp.objective, sol.primal);
  return sol;
}

Residuals residuals(const LinearProgram& lp, const Solution& sol) {
  Residuals res;
  const std::size_t m = lp.objective.size();
  const std::size_t r = lp.rhs.size();
  for (std::size_t j = 0; j < m; ++j) res.primal_infeasibility = std::max(res.primal_infeasibility, -sol.primal[j]);
  for (std::size_t i = 0; i < r; ++i) {
    const double slack = lp.rhs[i] - dot(lp.constraints.row(i), sol.primal);
    res.primal_infeasibility = std::max(res.primal_infeasibility, -slack);
    res.dual_infeasibility = std::max(res.dual_infeasibility, -sol.dual[i]);
    res.complementarity = std::max(res.complementarity, std::abs(sol.dual[i] * slack));
  }
  for (std::size_t j = 0; j < m; ++j) {
    double aty = 0.0;
    for (std::size_t i = 0; i < r; ++i) aty += lp.constraints(i, j) * sol.dual[i];
    const double reduced = aty - lp.objective[j];
    res.dual_infeasibility = std::max(res.dual_infeasibility, -reduced);
    res.complementarity = std::max(res.complementarity, std::abs(sol.primal[j] * reduced));
  }
  res.duality_gap = std::abs(dot(lp.objective, sol.primal) - dot(lp.rhs, sol.dual));
  return res;
}

namespace {

void check_consumer_inputs(std::span<const double> u, std::span<const double> p) {
  if (u.empty()) throw InvalidInput("consumer: no outcomes");
  if (u.size() != p.size()) throw InvalidInput("consumer: utility and price lengths differ");
  if (!all_finite(u) || !all_finite(p)) throw InvalidInput("consumer: non-finite entry");
  bool stake = false;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u[j] < 0.0) throw InvalidInput("consumer: negative utility");
    if (p[j] < 0.0) throw InvalidInput("consumer: negative price");
    stake = stake || u[j] > 0.0;
  }
  if (!stake) throw InvalidInput("consumer: utility row is identically zero");
}

LinearProgram consumer_lp(std::span<const double> u, std::span<const double> p) {
  const std::size_t k = u.size();
  LinearProgram lp{Vec(u.begin(), u.end()), Matrix(2, k), Vec{1.0, 1.0}};
  for (std::size_t j = 0; j < k; ++j) {
    lp.constraints(0, j) = 1.0;
    lp.constraints(1, j) = p[j];
  }
  return lp;
}

Solution must_solve(const LinearProgram& lp, const char* what) {
  Solution s = solve(lp);
  if (s.status != Status::optimal) throw NumericalError(std::string(what) + ": LP not optimal (" + to_string(s.status) + ")");
  return s;
}

}  // namespace

ConsumerSolution consumer_problem(std::span<const double> utility, std::span<const double> prices) {
  check_consumer_inputs(utility, prices);
  const Solution s = must_solve(consumer_lp(utility, prices), "consumer problem");
  return {s.objective_value, s.primal, s.dual[0], s.dual[1]};
}

MinimalCostDemand minimal_cost_demand(std::span<const double> utility, std::span<const double> prices,
                                      TieBreak tie_break) {
  check_consumer_inputs(utility, prices);
  const std::size_t k = utility.size();
  const double value = consumer_problem(utility, prices).value;
  // Exact right-hand sides; phase one absorbs the rounding in `value`.
  const double floor = value;

  // maximize -p.q  s.t.  e.q <= 1,  -u.q <= -floor
  LinearProgram lp{Vec(k), Matrix(2, k), Vec{1.0, -floor}};
  for (std::size_t j = 0; j < k; ++j) {
    lp.objective[j] = -prices[j];
    lp.constraints(0, j) = 1.0;
    lp.constraints(1, j) = -utility[j];
  }
  Solution s = must_solve(lp, "minimal cost demand");
  MinimalCostDemand out{s.primal, -s.objective_value, dot(utility, s.primal)};
  if (tie_break == TieBreak::none) return out;

  // Lexicographic tie-break: fix the cost, then minimize q_0, q_1, ... in turn.
  const double cost_cap = out.cost;
  Matrix rows(3 + k, k);
  Vec rhs{1.0, -floor, cost_cap};
  for (std::size_t j = 0; j < k; ++j) {
    rows(0, j) = 1.0;
    rows(1, j) = -utility[j];
    rows(2, j) = prices[j];
  }
  std::size_t used = 3;
  for (std::size_t t = 0; t + 1 < k; ++t) {
    Matrix a(used, k);
    for (std::size_t i = 0; i < used; ++i) std::copy(rows.row(i).begin(), rows.row(i).end(), a.row(i).begin());
    Vec obj(k, 0.0);
    obj[t] = -1.0;
    const Solution st = must_solve({obj, a, Vec(rhs.begin(), rhs.begin() + used)}, "lexicographic tie-break");
    out.demand = st.primal;
    rows(used, t) = 1.0;
    rhs.push_back(st.primal[t]);
    ++used;
  }
  out.cost = dot(prices, out.demand);
  out.value = dot(utility, out.demand);
  return out;
}

ShadowPrices shadow_prices(std::span<const double> utility, std::span<const double> prices,
                           std::span<const double> lottery) {
  check_consumer_inputs(utility, prices);
  const std::size_t k = utility.size();
  if (lottery.size() != k) throw InvalidInput("shadow prices: lottery length differs from outcomes");
  const double slack = tol::kVerify;
  for (double v : lottery)
    if (!std::isfinite(v) || v < -slack) throw InvalidInput("shadow prices: lottery has a negative entry");
  if (std::abs(sum(lottery) - 1.0) > slack) throw InvalidInput("shadow prices: lottery does not sum to one");
  if (std::abs(dot(prices, lottery) - 1.0) > slack) throw InvalidInput("shadow prices: budget is not binding");

  const ConsumerSolution cs = consumer_problem(utility, prices);
  if (dot(utility, lottery) < cs.value - slack * std::max(1.0, cs.value))
    throw InvalidInput("shadow prices: lottery is not utility maximizing");
  const MinimalCostDemand mc = minimal_cost_demand(utility, prices, TieBreak::none);
  if (dot(prices, lottery) > mc.cost + slack) throw InvalidInput("shadow prices: lottery is not minimal cost");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t j = 0; j < k; ++j) {
    if (lottery[j] <= tol::kSupport) continue;
    lo = std::min(lo, utility[j]);
    hi = std::max(hi, utility[j]);
  }

  ShadowPrices sp{cs.mu_total, cs.mu_budget};
  const bool equal_on_support = hi - lo <= tol::kLp * std::max(1.0, hi);
  if (equal_on_support && cs.mu_budget <= tol::kLp) {
    double c = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      if (prices[j] < 1.0 - tol::kLp) c = std::max(c, utility[j]);
    sp = {c, hi - c};
  }
  if (!(sp.alpha > 0.0)) throw NumericalError("shadow prices: no positive budget multiplier");

  const double scale = std::max(1.0, max_abs(utility));
  for (std::size_t j = 0; j < k; ++j) {
    const double gap = sp.alpha * prices[j] - (utility[j] - sp.c);
    if (gap < -tol::kVerify * scale || (lottery[j] > tol::kSupport && std::abs(gap) > tol::kVerify * scale))
      throw NumericalError("shadow prices: supporting inequality fails at outcome " + std::to_string(j));
  }
  return sp;
}

}  // namespace ccm::lp
