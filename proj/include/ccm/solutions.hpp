#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccm/parallel.hpp"
#include "ccm/polytope.hpp"

namespace ccm {

/// Maximizer of sum_i log(x_i - d_i(B)) over B. Throws InvalidInput when B
/// is not full-dimensional.
Point nash_solution(const Polytope& b);

/// The simplex game with floor d(B) whose fair outcome is the Nash point.
SimplexGame supporting_simplex(const Polytope& b);

enum class EquitableStatus { member_with_certificate, non_member_certified, non_member_at_resolution };

std::string to_string(EquitableStatus s);

struct EquitabilityCertificate {
  SimplexGame witness;
  Point fair_point;
  bool domination_checked = false;
  bool nash_point_checked = false;  // set by nash_sustainable_contains
};

struct EquitableVerdict {
  EquitableStatus status = EquitableStatus::non_member_at_resolution;
  std::optional<EquitabilityCertificate> certificate;
  std::size_t resolution = 0;  // grid steps, 0 when an exact criterion decided
  std::string reason;

  bool member() const { return status == EquitableStatus::member_with_certificate; }
};

enum class MembershipMethod { exact, grid };

struct EquitableOptions {
  MembershipMethod method = MembershipMethod::exact;
  std::size_t grid_steps = 64;
  double eps = tol::kGeom;
  Exec exec = Exec::parallel;
};

/// Decides whether x is the fair outcome of some simplex game dominating B.
/// Throws InvalidInput if B is degenerate or x is not in B.
EquitableVerdict equitable_contains(const Polytope& b, std::span<const double> x, const EquitableOptions& opts = {});

/// Same verdicts as equitable_contains; members additionally carry a check
/// that x is the Nash point of the witness.
EquitableVerdict nash_sustainable_contains(const Polytope& b, std::span<const double> x,
                                           const EquitableOptions& opts = {});

/// Re-validates a certificate through the LP domination test.
bool validate_certificate(const Polytope& b, std::span<const double> x, const EquitabilityCertificate& cert,
                          double eps = tol::kGeom);

/// Floor c of a witness found by scanning c_i = d_i + (s/steps)(x_i - d_i),
/// s = 0..steps-1, followed by one refinement pass around the least-violating
/// cell. The first accepted cell in lexicographic order wins.
std::optional<Point> grid_certificate_floor(const Polytope& b, std::span<const double> x, std::size_t steps,
                                            double eps, Exec exec);

struct Segment {
  Point from;
  Point to;
};

/// Pieces of the efficient frontier of a two-agent B lying above the
/// midpoint of d(B) and b(B), ordered by the first coordinate.
std::vector<Segment> equitable_set_2d(const Polytope& b);

/// Positive affine map x -> scale * x + shift.
struct AffineMap {
  Vec scale;
  Vec shift;

  Point apply(std::span<const double> x) const;
  Polytope apply(const Polytope& b) const;
};

struct AxiomReport {
  std::size_t scale_checks = 0;
  std::size_t scale_disagreements = 0;
  bool symmetry_holds = false;
  std::size_t consistency_checks = 0;
  std::size_t consistency_failures = 0;
  std::size_t justifiability_checks = 0;
  std::size_t justifiability_failures = 0;

  bool passed() const {
    return scale_disagreements == 0 && symmetry_holds && consistency_failures == 0 && justifiability_failures == 0;
  }
};

/// Property checks of the equitable solution on B at the given sample points.
/// Throws InvalidInput for a transform with a non-positive scale.
AxiomReport axiom_suite(const Polytope& b, const std::vector<Point>& samples, const std::vector<AffineMap>& transforms,
                        const EquitableOptions& opts = {});

/// The unit simplex coco{0, e^1, ..., e^n}.
Polytope unit_simplex(std::size_t n);

}  // namespace ccm
