#include "ccm/solutions.hpp"

#include <algorithm>
#include <cmath>

#include "ccm/lp.hpp"
#include "ccm/nash.hpp"

namespace ccm {

std::string to_string(EquitableStatus s) {
  switch (s) {
    case EquitableStatus::member_with_certificate: return "member_with_certificate";
    case EquitableStatus::non_member_certified: return "non_member_certified";
    case EquitableStatus::non_member_at_resolution: return "non_member_at_resolution";
  }
  return "unknown";
}

namespace {

double magnitude(const Polytope& b) { return std::max({1.0, max_abs(b.bliss()), max_abs(b.disagreement())}); }

void require_full_dimensional(const Polytope& b) {
  if (!b.full_dimensional()) throw InvalidInput("bargaining set is not full-dimensional");
}

EquitableVerdict member(std::span<const double> x, SimplexGame game, std::string reason) {
  EquitableVerdict v;
  v.status = EquitableStatus::member_with_certificate;
  v.certificate = EquitabilityCertificate{game, Point(x.begin(), x.end()), true, false};
  v.reason = std::move(reason);
  return v;
}

EquitableVerdict non_member(std::string reason) {
  EquitableVerdict v;
  v.status = EquitableStatus::non_member_certified;
  v.reason = std::move(reason);
  return v;
}

std::optional<SimplexGame> witness_with_floor(std::span<const double> x, const Point& c) {
  Vec a(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    a[i] = x[i] - c[i];
    if (!(a[i] > 0.0)) return std::nullopt;
  }
  return SimplexGame(a, c);
}

// Strictly positive normal (a1, a2), a1 + a2 = 1, supporting B at x.
std::optional<Vec> positive_normal_2d(const Polytope& b, std::span<const double> x) {
  // variables a1, a2, m;  max m  s.t.  a.(y - x) <= 0,  a1 + a2 = 1,  m <= a_i
  const auto& gens = b.generators();
  const std::size_t g = gens.size();
  lp::LinearProgram prog{Vec{0.0, 0.0, 1.0}, Matrix(g + 4, 3), Vec(g + 4, 0.0)};
  for (std::size_t j = 0; j < g; ++j) {
    prog.constraints(j, 0) = gens[j][0] - x[0];
    prog.constraints(j, 1) = gens[j][1] - x[1];
  }
  prog.constraints(g, 0) = prog.constraints(g, 1) = 1.0;
  prog.rhs[g] = 1.0;
  prog.constraints(g + 1, 0) = prog.constraints(g + 1, 1) = -1.0;
  prog.rhs[g + 1] = -1.0;
  prog.constraints(g + 2, 0) = -1.0;
  prog.constraints(g + 2, 2) = 1.0;
  prog.constraints(g + 3, 1) = -1.0;
  prog.constraints(g + 3, 2) = 1.0;
  const lp::Solution s = lp::solve(prog);
  if (s.status != lp::Status::optimal || !(s.primal[2] > 0.0)) return std::nullopt;
  return Vec{s.primal[0], s.primal[1]};
}

// Two agents: the floor is pushed along the axis of the agent with the larger
// weighted gain so that the supporting line through x becomes the witness's
// efficient edge.
std::optional<SimplexGame> two_agent_witness(const Polytope& b, std::span<const double> x) {
  const auto normal = positive_normal_2d(b, x);
  if (!normal) return std::nullopt;
  const Vec& a = *normal;
  const Point& d = b.disagreement();
  const double x1 = x[0] - d[0];
  const double x2 = x[1] - d[1];
  Point c = d;
  if (a[0] * x1 >= a[1] * x2) c[0] += x1 - a[1] * x2 / a[0];
  else c[1] += x2 - a[0] * x1 / a[1];
  return witness_with_floor(x, c);
}

// Exact membership LP in beta_i = 1 / (x_i - c_i):
//   1 + (y_i - x_i) beta_i <= t_{y,i},  t >= 0,  sum_i t_{y,i} <= n (1 + eps),
//   beta_i >= 1 / (x_i - d_i).
// Feasible iff some dominating simplex game has x as its fair outcome.
std::optional<Point> exact_certificate_floor(const Polytope& b, std::span<const double> x, double eps) {
  const std::size_t n = b.dim();
  const Point& d = b.disagreement();
  std::vector<Point> gens;
  for (const Point& y : b.generators()) {
    bool binds = false;
    for (std::size_t i = 0; i < n; ++i) binds = binds || y[i] > x[i];
    if (binds) gens.push_back(y);
  }
  if (gens.empty()) return d;

  Vec beta0(n);
  for (std::size_t i = 0; i < n; ++i) beta0[i] = 1.0 / (x[i] - d[i]);
  const std::size_t g = gens.size();
  const std::size_t vars = n + g * n;  // gamma = beta - beta0, then t
  const std::size_t rows = g * n + g;
  lp::LinearProgram prog{Vec(vars, 0.0), Matrix(rows, vars), Vec(rows, 0.0)};
  for (std::size_t i = 0; i < n; ++i) prog.objective[i] = -1.0;
  for (std::size_t j = 0; j < g; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = j * n + i;
      const double gap = gens[j][i] - x[i];
      prog.constraints(r, i) = gap;
      prog.constraints(r, n + r) = -1.0;
      prog.rhs[r] = -1.0 - gap * beta0[i];
      prog.constraints(g * n + j, n + r) = 1.0;
    }
    prog.rhs[g * n + j] = static_cast<double>(n) * (1.0 + eps);
  }
  const lp::Solution s = lp::solve(prog);
  if (s.status != lp::Status::optimal) return std::nullopt;
  Point c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - 1.0 / (beta0[i] + s.primal[i]);
  for (std::size_t i = 0; i < n; ++i) c[i] = std::max(c[i], d[i]);
  return c;
}

// Necessary condition: with d(B) <= c < x each term is bounded below by its
// value at c = d(B) when y_i > x_i, and by zero otherwise.
bool fails_box_bound(const Polytope& b, std::span<const double> x, double eps, std::string& why) {
  const std::size_t n = b.dim();
  const Point& d = b.disagreement();
  for (const Point& y : b.generators()) {
    double lower = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (y[i] > x[i] + eps) lower += (y[i] - d[i]) / (x[i] - d[i]);
    if (lower > static_cast<double>(n) * (1.0 + eps)) {
      why = "generator " + format_vec(y) + " forces a simplex weight of at least " + std::to_string(lower) +
            " > " + std::to_string(n);
      return true;
    }
  }
  return false;
}

}  // namespace

Point nash_solution(const Polytope& b) {
  require_full_dimensional(b);
  const auto& gens = b.generators();
  const std::size_t n = b.dim();
  Matrix gains(n, gens.size());
  for (std::size_t j = 0; j < gens.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) gains(i, j) = gens[j][i] - b.disagreement()[i];
  const LogSumMaximum best = maximize_log_sum(gains);
  Point x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = best.payoff[i] + b.disagreement()[i];
  return x;
}

SimplexGame supporting_simplex(const Polytope& b) {
  const Point eta = nash_solution(b);
  const Point& d = b.disagreement();
  Vec a(b.dim());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = eta[i] - d[i];
  SimplexGame game(a, d);
  if (!game.dominates(b, 1e-8)) throw NumericalError("supporting simplex does not dominate the bargaining set");
  return game;
}

bool validate_certificate(const Polytope& b, std::span<const double> x, const EquitabilityCertificate& cert,
                          double eps) {
  if (cert.witness.dim() != b.dim() || x.size() != b.dim()) return false;
  const double tol = eps * magnitude(b);
  if (max_abs_diff(cert.witness.fair_outcome(), x) > tol) return false;
  return dominates(cert.witness.polytope(), b, eps);
}

EquitableVerdict equitable_contains(const Polytope& b, std::span<const double> x, const EquitableOptions& opts) {
  require_full_dimensional(b);
  if (x.size() != b.dim()) throw InvalidInput("point dimension does not match bargaining set");
  if (!contains(b, x, opts.eps)) throw InvalidInput("not feasible: point lies outside the bargaining set");
  const std::size_t n = b.dim();
  const Point& d = b.disagreement();
  const double tol = opts.eps * magnitude(b);

  for (std::size_t i = 0; i < n; ++i)
    if (x[i] <= d[i] + tol)
      return non_member("coordinate " + std::to_string(i) + " is at the disagreement payoff");
  if (!is_pareto_efficient(b, x, opts.eps)) return non_member("not Pareto efficient");

  if (auto game = witness_with_floor(x, d); game && game->dominates(b, opts.eps))
    return member(x, *game, "witness with floor d(B)");

  if (n == 2) {
    for (std::size_t i = 0; i < 2; ++i)
      if (x[i] < d[i] + 0.5 * (b.bliss()[i] - d[i]) - tol) return non_member("fails midpoint domination");
    if (auto game = two_agent_witness(b, x); game && game->dominates(b, opts.eps))
      return member(x, *game, "two-agent supporting-line witness");
  }

  if (opts.method == MembershipMethod::exact) {
    if (auto c = exact_certificate_floor(b, x, opts.eps)) {
      if (auto game = witness_with_floor(x, *c); game && game->dominates(b, 10 * opts.eps))
        return member(x, *game, "exact linear program");
      throw NumericalError("equitable membership: LP floor does not validate");
    }
    return non_member("no dominating simplex game has this fair outcome (exact linear program)");
  }

  std::string why;
  if (fails_box_bound(b, x, opts.eps, why)) return non_member(why);
  if (auto c = grid_certificate_floor(b, x, opts.grid_steps, opts.eps, opts.exec)) {
    if (auto game = witness_with_floor(x, *c); game && game->dominates(b, opts.eps)) {
      EquitableVerdict v = member(x, *game, "grid search");
      v.resolution = opts.grid_steps;
      return v;
    }
  }
  EquitableVerdict v;
  v.status = EquitableStatus::non_member_at_resolution;
  v.resolution = opts.grid_steps;
  v.reason = "no witness floor found on the grid";
  return v;
}

EquitableVerdict nash_sustainable_contains(const Polytope& b, std::span<const double> x,
                                           const EquitableOptions& opts) {
  require_full_dimensional(b);
  if (x.size() != b.dim()) throw InvalidInput("point dimension does not match bargaining set");
  const double tol = 1e-9 * magnitude(b);
  const Point eta = nash_solution(b);
  if (max_abs_diff(eta, x) <= tol && contains(b, x, opts.eps)) {
    EquitableVerdict v = member(x, supporting_simplex(b), "Nash point of the bargaining set");
    v.certificate->nash_point_checked = true;
    return v;
  }
  EquitableVerdict v = equitable_contains(b, x, opts);
  if (v.member()) {
    const Point witness_nash = nash_solution(v.certificate->witness.polytope());
    v.certificate->nash_point_checked = max_abs_diff(witness_nash, x) <= 1e-8 * magnitude(b);
    if (!v.certificate->nash_point_checked)
      throw NumericalError("fair outcome of the witness is not its Nash point");
  }
  return v;
}

std::vector<Segment> equitable_set_2d(const Polytope& b) {
  if (b.dim() != 2) throw InvalidInput("equitable_set_2d requires two agents");
  require_full_dimensional(b);
  std::vector<Point> front = efficient_vertices(b);
  std::sort(front.begin(), front.end());
  const Point& d = b.disagreement();
  const Point floor{d[0] + 0.5 * (b.bliss()[0] - d[0]), d[1] + 0.5 * (b.bliss()[1] - d[1])};

  // Clip each frontier piece to x1 >= floor1 and x2 >= floor2; x2 falls as x1 rises.
  std::vector<Segment> out;
  auto clip = [&](Point p, Point q) {
    if (q[0] < floor[0] || p[1] < floor[1]) return;
    if (p[0] < floor[0]) {
      const double t = (floor[0] - p[0]) / (q[0] - p[0]);
      p = {floor[0], p[1] + t * (q[1] - p[1])};
    }
    if (q[1] < floor[1]) {
      const double t = (p[1] - floor[1]) / (p[1] - q[1]);
      q = {p[0] + t * (q[0] - p[0]), floor[1]};
    }
    if (p[0] <= q[0] && p[1] >= q[1]) out.push_back({p, q});
  };
  if (front.size() == 1) {
    clip(front[0], front[0]);
    return out;
  }
  for (std::size_t k = 0; k + 1 < front.size(); ++k) clip(front[k], front[k + 1]);
  // Drop zero-length pieces produced at shared breakpoints when others exist.
  if (out.size() > 1) {
    std::vector<Segment> kept;
    for (const Segment& s : out)
      if (max_abs_diff(s.from, s.to) > 0.0) kept.push_back(s);
    if (!kept.empty()) out = std::move(kept);
  }
  return out;
}

Point AffineMap::apply(std::span<const double> x) const {
  if (x.size() != scale.size() || shift.size() != scale.size()) throw InvalidInput("affine map: dimension mismatch");
  Point y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = scale[i] * x[i] + shift[i];
  return y;
}

Polytope AffineMap::apply(const Polytope& b) const {
  std::vector<Point> pts;
  for (const Point& g : b.generators()) pts.push_back(apply(g));
  return Polytope::coco_hull(pts);
}

Polytope unit_simplex(std::size_t n) {
  std::vector<Point> pts{Point(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    Point v(n, 0.0);
    v[i] = 1.0;
    pts.push_back(v);
  }
  return Polytope::coco_hull(pts);
}

AxiomReport axiom_suite(const Polytope& b, const std::vector<Point>& samples, const std::vector<AffineMap>& transforms,
                        const EquitableOptions& opts) {
  for (const AffineMap& t : transforms) {
    if (t.scale.size() != b.dim() || t.shift.size() != b.dim()) throw InvalidInput("axiom suite: transform dimension");
    for (double s : t.scale)
      if (!(s > 0.0)) throw InvalidInput("axiom suite: transform scale must be positive");
  }
  AxiomReport rep;
  std::vector<EquitableVerdict> base;
  for (const Point& x : samples) base.push_back(equitable_contains(b, x, opts));

  for (const AffineMap& t : transforms) {
    const Polytope tb = t.apply(b);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      ++rep.scale_checks;
      if (equitable_contains(tb, t.apply(samples[k]), opts).member() != base[k].member()) ++rep.scale_disagreements;
    }
  }

  const std::size_t n = b.dim();
  const Polytope delta = unit_simplex(n);
  rep.symmetry_holds = equitable_contains(delta, Point(n, 1.0 / static_cast<double>(n)), opts).member();
  for (std::size_t i = 0; i < n && rep.symmetry_holds; ++i) {
    Point vertex(n, 0.0);
    vertex[i] = 1.0;
    Point tilted(n, n > 1 ? 0.25 / static_cast<double>(n - 1) : 0.0);
    tilted[i] = n > 1 ? 0.75 : 1.0;
    if (equitable_contains(delta, vertex, opts).member()) rep.symmetry_holds = false;
    if (n > 1 && equitable_contains(delta, tilted, opts).member()) rep.symmetry_holds = false;
  }

  // Consistency: B <= A and x in E(A) with x in B imply x in E(B).
  std::vector<Polytope> covers{supporting_simplex(b).polytope()};
  for (const EquitableVerdict& v : base)
    if (v.member()) covers.push_back(v.certificate->witness.polytope());
  std::vector<Point> probes = samples;
  probes.push_back(nash_solution(b));
  for (const Polytope& a : covers) {
    for (const Point& x : probes) {
      if (!contains(b, x, opts.eps) || !contains(a, x, opts.eps)) continue;
      if (!equitable_contains(a, x, opts).member()) continue;
      ++rep.consistency_checks;
      if (!equitable_contains(b, x, opts).member()) ++rep.consistency_failures;
    }
  }

  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!base[k].member()) continue;
    ++rep.justifiability_checks;
    if (!validate_certificate(b, samples[k], *base[k].certificate, 1e-8)) ++rep.justifiability_failures;
  }
  return rep;
}

}  // namespace ccm
