#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccm/solutions.hpp"

namespace ccm {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr double kMaxCells = 5e7;

struct ScanResult {
  std::size_t first_accept = kNone;
  std::size_t best = kNone;
  double best_violation = std::numeric_limits<double>::infinity();
};

// Largest value of sum_i max(y_i - c_i, 0) / (n (x_i - c_i)) - 1 over the generators.
double violation(const std::vector<Point>& gens, std::span<const double> x, std::span<const double> c) {
  const double n = static_cast<double>(x.size());
  double worst = -1.0;
  for (const Point& y : gens) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::max(y[i] - c[i], 0.0) / (n * (x[i] - c[i]));
    worst = std::max(worst, s - 1.0);
  }
  return worst;
}

// Cell index -> floor, with axis 0 the most significant digit.
struct Lattice {
  Point origin;  // c at digit 0
  Vec spacing;
  std::size_t steps;

  void decode(std::size_t idx, Point& c) const {
    for (std::size_t i = c.size(); i-- > 0;) {
      c[i] = origin[i] + static_cast<double>(idx % steps) * spacing[i];
      idx /= steps;
    }
  }
  std::size_t cells() const { return static_cast<std::size_t>(std::pow(static_cast<double>(steps), origin.size())); }
};

void consider(ScanResult& r, std::size_t idx, double v, double eps) {
  if (v <= eps && idx < r.first_accept) r.first_accept = idx;
  if (v < r.best_violation || (v == r.best_violation && idx < r.best)) {
    r.best_violation = v;
    r.best = idx;
  }
}

bool in_range(std::span<const double> c, std::span<const double> lo, std::span<const double> x) {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] < lo[i] || c[i] >= x[i]) return false;
  return true;
}

ScanResult scan_serial(const Lattice& lat, const std::vector<Point>& gens, std::span<const double> x,
                       std::span<const double> lo, double eps) {
  ScanResult r;
  Point c(x.size());
  const std::size_t cells = lat.cells();
  for (std::size_t idx = 0; idx < cells; ++idx) {
    lat.decode(idx, c);
    if (!in_range(c, lo, x)) continue;
    consider(r, idx, violation(gens, x, c), eps);
    if (r.first_accept != kNone) break;
  }
  return r;
}

ScanResult scan_parallel(const Lattice& lat, const std::vector<Point>& gens, std::span<const double> x,
                         std::span<const double> lo, double eps) {
  ScanResult r;
  const long long cells = static_cast<long long>(lat.cells());
#pragma omp parallel num_threads(worker_count())
  {
    ScanResult local;
    Point c(x.size());
#pragma omp for schedule(static)
    for (long long idx = 0; idx < cells; ++idx) {
      lat.decode(static_cast<std::size_t>(idx), c);
      if (!in_range(c, lo, x)) continue;
      consider(local, static_cast<std::size_t>(idx), violation(gens, x, c), eps);
    }
#pragma omp critical
    {
      r.first_accept = std::min(r.first_accept, local.first_accept);
      if (local.best != kNone) consider(r, local.best, local.best_violation, -std::numeric_limits<double>::infinity());
    }
  }
  return r;
}

}  // namespace

std::optional<Point> grid_certificate_floor(const Polytope& b, std::span<const double> x, std::size_t steps,
                                            double eps, Exec exec) {
  const std::size_t n = b.dim();
  if (x.size() != n) throw InvalidInput("grid search: point dimension does not match polytope");
  if (steps == 0) throw InvalidInput("grid search: steps must be positive");
  if (std::pow(static_cast<double>(steps), static_cast<double>(n)) > kMaxCells)
    throw InvalidInput("grid search: steps^n exceeds the cell budget");
  const Point& d = b.disagreement();
  for (std::size_t i = 0; i < n; ++i)
    if (!(x[i] > d[i])) return std::nullopt;

  // Generators already below x never bind.
  std::vector<Point> gens;
  for (const Point& y : b.generators()) {
    bool binds = false;
    for (std::size_t i = 0; i < n; ++i) binds = binds || y[i] > x[i];
    if (binds) gens.push_back(y);
  }
  if (gens.empty()) return Point(d.begin(), d.end());

  auto scan = [&](const Lattice& lat) {
    return exec == Exec::serial ? scan_serial(lat, gens, x, d, eps) : scan_parallel(lat, gens, x, d, eps);
  };

  Lattice coarse{d, Vec(n), steps};
  for (std::size_t i = 0; i < n; ++i) coarse.spacing[i] = (x[i] - d[i]) / static_cast<double>(steps);
  const ScanResult first = scan(coarse);
  Point c(n);
  if (first.first_accept != kNone) {
    coarse.decode(first.first_accept, c);
    return c;
  }
  if (first.best == kNone) return std::nullopt;

  // One refinement pass over the two cells around the least-violating one.
  Point centre(n);
  coarse.decode(first.best, centre);
  Lattice fine{Point(n), Vec(n), steps};
  for (std::size_t i = 0; i < n; ++i) {
    fine.origin[i] = std::max(d[i], centre[i] - coarse.spacing[i]);
    fine.spacing[i] = 2.0 * coarse.spacing[i] / static_cast<double>(steps);
  }
  const ScanResult second = scan(fine);
  if (second.first_accept == kNone) return std::nullopt;
  fine.decode(second.first_accept, c);
  return c;
}

}  // namespace ccm
