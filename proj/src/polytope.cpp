#include "ccm/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <string>

#include "ccm/lp.hpp"

namespace ccm {

namespace {

double round_sig(double v) {
  if (v == 0.0) return 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return std::stod(buf);
}

double magnitude(const Polytope& b) { return std::max({1.0, max_abs(b.bliss()), max_abs(b.disagreement())}); }

void check_dim(const Polytope& b, std::span<const double> x) {
  if (x.size() != b.dim()) throw InvalidInput("point dimension does not match polytope");
  if (!all_finite(x)) throw InvalidInput("point has non-finite coordinates");
}

// max t  s.t.  x + t e <= sum_j lambda_j g_j,  sum lambda = 1.
// Shifted as t' = t + shift >= 0 to fit the nonnegative-variable form.
double margin_over(const std::vector<Point>& gens, std::span<const double> x, std::span<const double> floor) {
  const std::size_t n = x.size();
  const std::size_t g = gens.size();
  if (g == 0) return -std::numeric_limits<double>::infinity();
  double shift = 1.0;
  for (std::size_t i = 0; i < n; ++i) shift = std::max(shift, x[i] - floor[i] + 1.0);

  lp::LinearProgram prog{Vec(g + 1, 0.0), Matrix(n + 2, g + 1), Vec(n + 2)};
  prog.objective[g] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < g; ++j) prog.constraints(i, j) = -gens[j][i];
    prog.constraints(i, g) = 1.0;
    prog.rhs[i] = shift - x[i];
  }
  for (std::size_t j = 0; j < g; ++j) {
    prog.constraints(n, j) = 1.0;
    prog.constraints(n + 1, j) = -1.0;
  }
  prog.rhs[n] = 1.0;
  prog.rhs[n + 1] = -1.0;
  const lp::Solution s = lp::solve(prog);
  if (s.status != lp::Status::optimal) throw NumericalError("containment margin LP not optimal");
  return s.primal[g] - shift;
}

}  // namespace

SimplexGame::SimplexGame(Vec scale, Vec offset) : a_(std::move(scale)), d_(std::move(offset)) {
  if (a_.empty() || a_.size() != d_.size()) throw InvalidInput("simplex game: scale and offset dimensions differ");
  if (!all_finite(a_) || !all_finite(d_)) throw InvalidInput("simplex game: non-finite entry");
  for (double v : a_)
    if (!(v > 0.0)) throw InvalidInput("simplex game: scale must be strictly positive");
}

Point SimplexGame::fair_outcome() const {
  Point x(a_.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = a_[i] + d_[i];
  return x;
}

Polytope SimplexGame::polytope() const {
  const std::size_t n = dim();
  std::vector<Point> pts{d_};
  for (std::size_t i = 0; i < n; ++i) {
    Point v = d_;
    v[i] += static_cast<double>(n) * a_[i];
    pts.push_back(std::move(v));
  }
  return Polytope::coco_hull(pts);
}

bool SimplexGame::dominates(const Polytope& b, double eps) const {
  if (b.dim() != dim()) throw InvalidInput("simplex game and polytope dimensions differ");
  const double n = static_cast<double>(dim());
  const double tol = eps * magnitude(b);
  for (std::size_t i = 0; i < dim(); ++i)
    if (d_[i] < b.disagreement()[i] - tol) return false;
  for (const Point& y : b.generators()) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) s += std::max(y[i] - d_[i], 0.0) / (n * a_[i]);
    if (s > 1.0 + eps) return false;
  }
  return true;
}

Polytope Polytope::coco_hull(const std::vector<Point>& points) {
  if (points.empty()) throw InvalidInput("coco hull: no points");
  const std::size_t n = points.front().size();
  if (n == 0) throw InvalidInput("coco hull: zero-dimensional points");
  Polytope b;
  std::set<std::vector<double>> seen;
  for (const Point& p : points) {
    if (p.size() != n) throw InvalidInput("coco hull: points of different dimension");
    if (!all_finite(p)) throw InvalidInput("coco hull: non-finite coordinate");
    std::vector<double> key(n);
    std::transform(p.begin(), p.end(), key.begin(), round_sig);
    if (seen.insert(key).second) b.gens_.push_back(p);
  }
  b.lo_ = b.gens_.front();
  b.hi_ = b.gens_.front();
  for (const Point& p : b.gens_) {
    for (std::size_t i = 0; i < n; ++i) {
      b.lo_[i] = std::min(b.lo_[i], p[i]);
      b.hi_[i] = std::max(b.hi_[i], p[i]);
    }
  }
  b.full_dim_ = true;
  for (std::size_t i = 0; i < n; ++i) b.full_dim_ = b.full_dim_ && b.hi_[i] > b.lo_[i];
  return b;
}

Polytope Polytope::pruned() const {
  std::vector<Point> keep;
  const std::size_t g = gens_.size();
  for (std::size_t j = 0; j < g; ++j) {
    bool dominated = false;
    for (std::size_t l = 0; l < g && !dominated; ++l) {
      if (l == j) continue;
      bool weakly = true, strictly = false;
      for (std::size_t i = 0; i < dim(); ++i) {
        if (gens_[l][i] < gens_[j][i]) weakly = false;
        if (gens_[l][i] > gens_[j][i]) strictly = true;
      }
      // Equal generators cannot both survive deduplication.
      dominated = weakly && strictly;
    }
    if (!dominated) keep.push_back(gens_[j]);
  }
  // The floor must survive pruning so that d(B) is unchanged.
  keep.push_back(lo_);
  return coco_hull(keep);
}

double containment_margin(const Polytope& b, std::span<const double> x) {
  check_dim(b, x);
  return margin_over(b.generators(), x, b.disagreement());
}

bool contains(const Polytope& b, std::span<const double> x, double eps) {
  check_dim(b, x);
  const double tol = eps * magnitude(b);
  for (std::size_t i = 0; i < b.dim(); ++i)
    if (x[i] < b.disagreement()[i] - tol) return false;
  return containment_margin(b, x) >= -tol;
}

bool is_pareto_efficient(const Polytope& b, std::span<const double> x, double eps) {
  check_dim(b, x);
  const double tol = eps * magnitude(b);
  for (std::size_t i = 0; i < b.dim(); ++i)
    if (x[i] < b.disagreement()[i] - tol) throw InvalidInput("pareto test: point is not in the polytope");
  const double margin = containment_margin(b, x);
  if (margin < -tol) throw InvalidInput("pareto test: point is not in the polytope");
  if (margin > tol) return false;

  // max sum(y)  s.t.  y = sum lambda_j g_j >= x - slack,  sum lambda = 1
  const double slack = std::max(0.0, -margin) + 1e-13;
  const auto& gens = b.generators();
  const std::size_t n = b.dim();
  const std::size_t g = gens.size();
  lp::LinearProgram prog{Vec(g), Matrix(n + 2, g), Vec(n + 2)};
  for (std::size_t j = 0; j < g; ++j) {
    prog.objective[j] = sum(gens[j]);
    for (std::size_t i = 0; i < n; ++i) prog.constraints(i, j) = -gens[j][i];
    prog.constraints(n, j) = 1.0;
    prog.constraints(n + 1, j) = -1.0;
  }
  for (std::size_t i = 0; i < n; ++i) prog.rhs[i] = -(x[i] - slack);
  prog.rhs[n] = 1.0;
  prog.rhs[n + 1] = -1.0;
  const lp::Solution s = lp::solve(prog);
  if (s.status != lp::Status::optimal) throw NumericalError("pareto LP not optimal");
  const double gain = s.objective_value - sum(x);
  return gain <= tol + static_cast<double>(n) * slack;
}

bool dominates(const Polytope& a, const Polytope& b, double eps) {
  if (a.dim() != b.dim()) throw InvalidInput("domination: dimensions differ");
  const double tol = eps * std::max(magnitude(a), magnitude(b));
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.disagreement()[i] < b.disagreement()[i] - tol) return false;
  for (const Point& y : b.generators())
    if (containment_margin(a, y) < -tol) return false;
  return true;
}

std::optional<SimplexGame> as_simplex_game(const Polytope& b, double eps) {
  const std::size_t n = b.dim();
  const double tol = eps * magnitude(b);
  Vec a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = (b.bliss()[i] - b.disagreement()[i]) / static_cast<double>(n);
    if (!(a[i] * static_cast<double>(n) > tol)) return std::nullopt;
  }
  SimplexGame game(a, b.disagreement());
  if (!game.dominates(b, eps)) return std::nullopt;
  const Polytope rendered = game.polytope();
  for (const Point& v : rendered.generators())
    if (!contains(b, v, eps)) return std::nullopt;
  return game;
}

std::vector<Point> efficient_vertices(const Polytope& b, double eps) {
  const auto& gens = b.generators();
  const double tol = eps * magnitude(b);
  std::vector<Point> out;
  for (std::size_t j = 0; j < gens.size(); ++j) {
    if (!is_pareto_efficient(b, gens[j], eps)) continue;
    std::vector<Point> others;
    for (std::size_t l = 0; l < gens.size(); ++l)
      if (l != j) others.push_back(gens[l]);
    if (margin_over(others, gens[j], b.disagreement()) >= -tol) continue;
    out.push_back(gens[j]);
  }
  return out;
}

bool same_point_set(std::vector<Point> a, std::vector<Point> b, double eps) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<bool> used(b.size(), false);
  for (const Point& p : a) {
    bool hit = false;
    for (std::size_t l = 0; l < b.size() && !hit; ++l) {
      if (used[l] || p.size() != b[l].size()) continue;
      if (max_abs_diff(p, b[l]) <= eps) used[l] = hit = true;
    }
    if (!hit) return false;
  }
  return true;
}

}  // namespace ccm
