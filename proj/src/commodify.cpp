#include <algorithm>
#include <cmath>
#include <limits>

#include "ccm/exchange.hpp"

namespace ccm {

namespace {

constexpr double kMaxPartialVectors = 1e6;

double magnitude(const Polytope& b) {
  return std::max({1.0, max_abs(b.bliss()), max_abs(b.disagreement())});
}

void require_origin_floor(const Polytope& b) {
  if (max_abs(b.disagreement()) > tol::kGeom * magnitude(b))
    throw InvalidInput("bargaining set must have the origin as disagreement point");
  if (!b.full_dimensional()) throw InvalidInput("bargaining set must be full-dimensional");
}

void check_reproduces(const Economy& e, const Polytope& b) {
  const double eps = tol::kGeom * magnitude(b);
  if (!same_point_set(efficient_vertices(bargaining_of_economy(e)), efficient_vertices(b), 1e3 * eps))
    throw NumericalError("constructed economy does not reproduce the bargaining set");
}

struct Frontier {
  Vec to_first;   // v_1 of each good, in slope order
  Vec to_second;  // v_2 of each good
};

Frontier frontier_goods(const Polytope& b) {
  if (b.dim() != 2) throw InvalidInput("two-agent construction needs a two-dimensional set");
  require_origin_floor(b);
  std::vector<Point> y = efficient_vertices(b);
  std::sort(y.begin(), y.end());
  const double eps = tol::kGeom * magnitude(b);
  Frontier f;
  if (y.front()[0] > eps) {
    f.to_first.push_back(y.front()[0]);
    f.to_second.push_back(0.0);
  }
  for (std::size_t h = 0; h + 1 < y.size(); ++h) {
    f.to_first.push_back(y[h + 1][0] - y[h][0]);
    f.to_second.push_back(y[h][1] - y[h + 1][1]);
  }
  if (y.back()[1] > eps) {
    f.to_first.push_back(0.0);
    f.to_second.push_back(y.back()[1]);
  }
  return f;
}

// a_2 / a_1 for the segment that good h spans.
double segment_ratio(const Frontier& f, std::size_t h) {
  if (f.to_second[h] == 0.0) return std::numeric_limits<double>::infinity();
  return f.to_first[h] / f.to_second[h];
}

Allocation split(std::size_t cut, std::size_t goods) {
  const Bundle all = static_cast<Bundle>((std::size_t{1} << goods) - 1);
  const Bundle first = static_cast<Bundle>((std::size_t{1} << cut) - 1);
  return {first, static_cast<Bundle>(all & ~first)};
}

}  // namespace

Economy commodify_two(const Polytope& b) {
  const Frontier f = frontier_goods(b);
  Economy e = Economy::additive({f.to_first, f.to_second});
  check_reproduces(e, b);
  return e;
}

TwoAgentEquilibrium walras_from_equitable_two(const Polytope& b, std::span<const double> x) {
  if (b.dim() != 2 || x.size() != 2) throw InvalidInput("two-agent construction needs two-dimensional input");
  const Frontier f = frontier_goods(b);
  const double eps = tol::kGeom * magnitude(b);
  if (!contains(b, x) || !is_pareto_efficient(b, x)) throw InvalidInput("point is not an efficient point of the set");
  for (std::size_t i = 0; i < 2; ++i)
    if (x[i] < b.bliss()[i] / 2.0 - eps) throw InvalidInput("point is not equitable: below half the bliss point");

  const std::size_t m = f.to_first.size();
  // Cut l gives goods [0, l) to the first agent and the rest to the second.
  std::vector<Point> cut(m + 1, Point(2, 0.0));
  for (std::size_t l = 0; l <= m; ++l) {
    for (std::size_t h = 0; h < l; ++h) cut[l][0] += f.to_first[h];
    for (std::size_t h = l; h < m; ++h) cut[l][1] += f.to_second[h];
  }

  std::size_t l = m + 1;
  double gamma = 1.0;  // weight on cut l; 1 - gamma on cut l + 1
  for (std::size_t t = 0; t <= m && l > m; ++t)
    if (max_abs_diff(cut[t], x) <= 1e3 * eps) l = t;
  if (l > m) {
    for (std::size_t t = 0; t < m && l > m; ++t)
      if (cut[t][0] < x[0] && x[0] < cut[t + 1][0]) {
        l = t;
        gamma = (cut[t + 1][0] - x[0]) / f.to_first[t];
      }
    if (l > m) throw InvalidInput("point is not on the efficient frontier");
  }
  const bool interior = gamma < 1.0;

  double ratio;
  if (interior) {
    ratio = segment_ratio(f, l);
  } else {
    const double lo = l < m ? segment_ratio(f, l) : 0.0;
    const double hi = l > 0 ? segment_ratio(f, l - 1) : std::numeric_limits<double>::infinity();
    ratio = std::clamp(x[0] / x[1], lo, hi);
  }

  // One agent's goods are priced at that agent's util-per-price; the other
  // agent's exclusive goods move along [own rate, tangent rate] by a common t
  // chosen so that agent's budget binds.
  const bool anchor_first = ratio * x[1] >= x[0];
  const std::size_t a = anchor_first ? 0 : 1;
  const Vec& va = anchor_first ? f.to_first : f.to_second;
  const Vec& vb = anchor_first ? f.to_second : f.to_first;
  const double tangent = anchor_first ? ratio : 1.0 / ratio;
  Vec price(m, 0.0);
  double fixed_spend = 0.0, base = 0.0, slope = 0.0;
  std::vector<std::size_t> floating;
  for (std::size_t h = 0; h < m; ++h) {
    const bool first_owns = h < l || (interior && h == l);
    const bool second_owns = h > l || h == l;
    const bool anchored = anchor_first ? first_owns : second_owns;
    const bool shared = interior && h == l;
    if (anchored) {
      price[h] = va[h] / x[a];
      if (shared) fixed_spend += (anchor_first ? gamma : 1.0 - gamma) * price[h];
    } else {
      floating.push_back(h);
      base += va[h] / x[a];
      slope += (tangent * vb[h] - va[h]) / x[a];
    }
  }
  double t = 0.0;
  const double need = 1.0 - fixed_spend - base;
  if (std::abs(slope) > tol::kGeom)
    t = need / slope;
  else if (std::abs(need) > 1e-10)
    throw NumericalError("cannot bind the budget: spending does not depend on the interpolation");
  if (t < -1e-10 || t > 1.0 + 1e-10) throw NumericalError("cannot bind the budget inside the price intervals");
  t = std::clamp(t, 0.0, 1.0);
  for (std::size_t h : floating) price[h] = ((1.0 - t) * va[h] + t * tangent * vb[h]) / x[a];

  TwoAgentEquilibrium out{Economy::additive({f.to_first, f.to_second}), price, PackagePrices::additive(price), {}};
  out.allocation.push_back({split(l, m), gamma});
  if (interior) out.allocation.push_back({split(l + 1, m), 1.0 - gamma});

  const Verdict v = verify_walras_exchange(out.economy, out.prices, out.allocation);
  if (!v.passed()) throw NumericalError("constructed equilibrium fails verification: " + v.summary());
  if (max_abs_diff(exchange_payoffs(out.economy, out.allocation), x) > 1e-6)
    throw NumericalError("constructed equilibrium misses the requested payoff");
  return out;
}

Economy commodify_general(const Polytope& b) {
  require_origin_floor(b);
  const std::size_t n = b.dim();
  const double eps = tol::kGeom * magnitude(b);
  const std::vector<Point> frontier = efficient_vertices(b);

  // Distinct positive payoffs per agent, ascending.
  std::vector<Vec> levels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Point& y : frontier)
      if (y[i] > eps) levels[i].push_back(y[i]);
    std::sort(levels[i].begin(), levels[i].end());
    levels[i].erase(std::unique(levels[i].begin(), levels[i].end(),
                                [&](double p, double q) { return std::abs(p - q) <= eps; }),
                    levels[i].end());
  }
  auto level_of = [&](std::size_t i, double v) -> int {
    if (v <= eps) return -1;
    for (std::size_t t = 0; t < levels[i].size(); ++t)
      if (std::abs(levels[i][t] - v) <= eps) return static_cast<int>(t);
    throw NumericalError("payoff level lookup failed");
  };
  std::vector<std::vector<int>> vertices;
  for (const Point& y : frontier) {
    std::vector<int> code(n);
    for (std::size_t i = 0; i < n; ++i) code[i] = level_of(i, y[i]);
    vertices.push_back(std::move(code));
  }

  // Partial payoff vectors: -1 marks an unspecified coordinate.
  auto consistent = [&](const std::vector<int>& x) {
    for (const auto& y : vertices) {
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) ok = x[i] == -1 || x[i] == y[i];
      if (ok) return true;
    }
    return false;
  };
  double partial_count = 1.0;
  for (const Vec& l : levels) partial_count *= static_cast<double>(l.size() + 1);
  if (partial_count > kMaxPartialVectors) throw InvalidInput("too many partial payoff vectors");

  std::vector<std::vector<int>> minimal_inconsistent;
  std::vector<int> x(n, -1);
  for (;;) {
    if (!consistent(x)) {
      bool minimal = true;
      for (std::size_t i = 0; i < n && minimal; ++i) {
        if (x[i] == -1) continue;
        const int keep = x[i];
        x[i] = -1;
        minimal = consistent(x);
        x[i] = keep;
      }
      if (minimal) minimal_inconsistent.push_back(x);
    }
    std::size_t i = 0;
    while (i < n && x[i] == static_cast<int>(levels[i].size()) - 1) x[i++] = -1;
    if (i == n) break;
    ++x[i];
  }

  // Goods: one per (agent, level), then specified-count-minus-one copies of
  // each minimally inconsistent vector.
  std::vector<std::vector<std::size_t>> level_good(n);
  std::size_t goods = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < levels[i].size(); ++t) level_good[i].push_back(goods++);
  std::vector<Bundle> copies;
  for (const auto& mv : minimal_inconsistent) {
    const auto specified = static_cast<std::size_t>(std::count_if(mv.begin(), mv.end(), [](int v) { return v != -1; }));
    Bundle mask = 0;
    for (std::size_t c = 0; c + 1 < specified; ++c) {
      if (goods >= kMaxGoods) throw InvalidInput("construction needs more than 16 goods");
      mask |= Bundle{1} << goods++;
    }
    copies.push_back(mask);
  }
  if (goods > kMaxGoods) throw InvalidInput("construction needs more than 16 goods");

  std::vector<Vec> tables(n, Vec(std::size_t{1} << goods, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Bundle> own(levels[i].size(), 0);
    for (std::size_t t = 0; t < levels[i].size(); ++t)
      own[t] = (t ? own[t - 1] : Bundle{0}) | Bundle{1} << level_good[i][t];
    for (Bundle mask = 0; mask < tables[i].size(); ++mask) {
      double best = 0.0;
      for (std::size_t t = 0; t < levels[i].size(); ++t) {
        if ((mask & own[t]) != own[t]) continue;
        bool covered = true;
        for (std::size_t c = 0; c < minimal_inconsistent.size() && covered; ++c)
          if (minimal_inconsistent[c][i] == static_cast<int>(t)) covered = (mask & copies[c]) != 0;
        if (covered) best = std::max(best, levels[i][t]);
      }
      tables[i][mask] = best;
    }
  }
  Economy e(goods, std::move(tables));
  check_reproduces(e, b);
  return e;
}

}  // namespace ccm
