#pragma once

#include <optional>
#include <vector>

#include "ccm/common.hpp"

namespace ccm {

using Point = Vec;

class Polytope;

/// A positive-affine image of the unit simplex: coco{d, d + n*a_i*e^i}.
class SimplexGame {
 public:
  SimplexGame(Vec scale, Vec offset);

  const Vec& scale() const { return a_; }
  const Vec& offset() const { return d_; }
  std::size_t dim() const { return a_.size(); }

  /// a + d, the image of equal division.
  Point fair_outcome() const;
  Polytope polytope() const;

  /// Closed-form test that the game weakly dominates every point of `b`'s
  /// generators and that its floor is at least d(b).
  bool dominates(const Polytope& b, double eps = tol::kGeom) const;

 private:
  Vec a_;
  Vec d_;
};

/// Comprehensive convex hull of finitely many payoff vectors, held as
/// generators. Immutable.
class Polytope {
 public:
  /// Throws InvalidInput on empty input, ragged dimensions or non-finite
  /// coordinates. Generators are deduplicated after rounding to 12
  /// significant digits; the first occurrence is kept.
  static Polytope coco_hull(const std::vector<Point>& points);

  const std::vector<Point>& generators() const { return gens_; }
  std::size_t dim() const { return lo_.size(); }
  const Point& disagreement() const { return lo_; }
  const Point& bliss() const { return hi_; }
  /// b_i > d_i in every coordinate.
  bool full_dimensional() const { return full_dim_; }

  /// Same set, without generators weakly dominated by another generator.
  Polytope pruned() const;

 private:
  std::vector<Point> gens_;
  Point lo_, hi_;
  bool full_dim_ = false;
};

/// Largest t with x + t*e <= some convex combination of the generators.
double containment_margin(const Polytope& b, std::span<const double> x);

bool contains(const Polytope& b, std::span<const double> x, double eps = tol::kGeom);

/// Throws InvalidInput if x is not in b.
bool is_pareto_efficient(const Polytope& b, std::span<const double> x, double eps = tol::kGeom);

bool dominates(const Polytope& a, const Polytope& b, double eps = tol::kGeom);

std::optional<SimplexGame> as_simplex_game(const Polytope& b, double eps = tol::kGeom);

/// Generators that are Pareto efficient and not convex combinations of the
/// other generators, in input order.
std::vector<Point> efficient_vertices(const Polytope& b, double eps = tol::kGeom);

/// Equality of point sets up to eps after sorting lexicographically.
bool same_point_set(std::vector<Point> a, std::vector<Point> b, double eps);

}  // namespace ccm
