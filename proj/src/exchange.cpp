#include "ccm/exchange.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>

#include "ccm/lp.hpp"

namespace ccm {

namespace {

constexpr std::size_t kMaxPartitionGoods = 12;
constexpr std::size_t kMaxBargainingPoints = 2'000'000;

std::size_t table_size(std::size_t goods) { return std::size_t{1} << goods; }

std::size_t goods_for(std::size_t entries) {
  if (entries == 0 || !std::has_single_bit(entries)) throw InvalidInput("table size must be a power of two");
  const auto r = static_cast<std::size_t>(std::countr_zero(entries));
  if (r > kMaxGoods) throw InvalidInput("at most 16 goods are supported");
  return r;
}

}  // namespace

Economy::Economy(std::size_t goods, std::vector<Vec> tables, Kind kind) : r_(goods), v_(std::move(tables)), kind_(kind) {
  if (r_ > kMaxGoods) throw InvalidInput("at most 16 goods are supported");
  if (v_.empty()) throw InvalidInput("economy needs at least one agent");
  const std::size_t size = table_size(r_);
  for (std::size_t i = 0; i < v_.size(); ++i) {
    const Vec& t = v_[i];
    if (t.size() != size) throw InvalidInput("utility table of agent " + std::to_string(i) + " has the wrong size");
    if (!all_finite(t)) throw InvalidInput("utilities must be finite");
    if (t[0] != 0.0) throw InvalidInput("the empty bundle must be worth zero");
    for (Bundle m = 0; m < size; ++m)
      for (std::size_t h = 0; h < r_; ++h) {
        const Bundle bigger = m | (Bundle{1} << h);
        if (bigger != m && t[bigger] < t[m])
          throw InvalidInput("utility of agent " + std::to_string(i) + " is not monotone");
      }
    if (!(t[size - 1] > 0.0)) throw InvalidInput("agent " + std::to_string(i) + " values no bundle");
  }
}

Economy Economy::additive(const std::vector<Vec>& values) {
  if (values.empty()) throw InvalidInput("economy needs at least one agent");
  const std::size_t r = values[0].size();
  if (r > kMaxGoods) throw InvalidInput("at most 16 goods are supported");
  std::vector<Vec> tables;
  for (const Vec& v : values) {
    if (v.size() != r) throw InvalidInput("every agent must value the same goods");
    for (double x : v)
      if (!std::isfinite(x) || x < 0.0) throw InvalidInput("good values must be finite and nonnegative");
    Vec t(table_size(r), 0.0);
    for (Bundle m = 1; m < t.size(); ++m) {
      const auto h = static_cast<std::size_t>(std::countr_zero(m));
      t[m] = t[m & (m - 1)] + v[h];
    }
    tables.push_back(std::move(t));
  }
  return Economy(r, std::move(tables), Kind::additive);
}

Economy Economy::unit_demand(const std::vector<Vec>& values) {
  if (values.empty()) throw InvalidInput("economy needs at least one agent");
  const std::size_t r = values[0].size();
  if (r > kMaxGoods) throw InvalidInput("at most 16 goods are supported");
  std::vector<Vec> tables;
  for (const Vec& v : values) {
    if (v.size() != r) throw InvalidInput("every agent must value the same goods");
    for (double x : v)
      if (!std::isfinite(x) || x < 0.0) throw InvalidInput("good values must be finite and nonnegative");
    Vec t(table_size(r), 0.0);
    for (Bundle m = 1; m < t.size(); ++m) {
      const auto h = static_cast<std::size_t>(std::countr_zero(m));
      t[m] = std::max(t[m & (m - 1)], v[h]);
    }
    tables.push_back(std::move(t));
  }
  return Economy(r, std::move(tables));
}

Economy Economy::monotone_closure(std::size_t agents, std::size_t goods, const std::vector<Listed>& listed) {
  if (goods > kMaxGoods) throw InvalidInput("at most 16 goods are supported");
  std::vector<Vec> tables(agents, Vec(table_size(goods), 0.0));
  for (const Listed& l : listed) {
    if (l.agent >= agents) throw InvalidInput("listed bundle names an unknown agent");
    if (l.bundle >= table_size(goods)) throw InvalidInput("listed bundle names an unknown good");
    if (!std::isfinite(l.value) || l.value < 0.0) throw InvalidInput("bundle values must be finite and nonnegative");
    if (l.bundle == 0 && l.value != 0.0) throw InvalidInput("the empty bundle must be worth zero");
    double& slot = tables[l.agent][l.bundle];
    slot = std::max(slot, l.value);
  }
  for (Vec& t : tables)
    for (std::size_t h = 0; h < goods; ++h)
      for (Bundle m = 0; m < t.size(); ++m)
        if (!(m >> h & 1U)) t[m | (Bundle{1} << h)] = std::max(t[m | (Bundle{1} << h)], t[m]);
  return Economy(goods, std::move(tables));
}

PackagePrices::PackagePrices(Vec table) : table_(std::move(table)) {
  goods_for(table_.size());
  for (double v : table_)
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput("package prices must be finite and nonnegative");
  if (table_[0] != 0.0) throw InvalidInput("the empty bundle must cost zero");
}

PackagePrices PackagePrices::additive(const Vec& per_good) {
  if (per_good.size() > kMaxGoods) throw InvalidInput("at most 16 goods are supported");
  for (double v : per_good)
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput("good prices must be finite and nonnegative");
  Vec t(table_size(per_good.size()), 0.0);
  for (Bundle m = 1; m < t.size(); ++m) {
    // Adding the highest good last sums each bundle in ascending good order.
    const auto h = static_cast<std::size_t>(std::bit_width(m) - 1);
    t[m] = t[m ^ (Bundle{1} << h)] + per_good[h];
  }
  return PackagePrices(std::move(t));
}

std::size_t PackagePrices::goods() const { return goods_for(table_.size()); }

Polytope bargaining_of_economy(const Economy& e) {
  const std::size_t n = e.agents();
  // Bundles losing value when any single good is removed; the empty bundle
  // stands for receiving nothing.
  std::vector<std::vector<Bundle>> minimal(n);
  for (std::size_t i = 0; i < n; ++i) {
    minimal[i].push_back(0);
    const Vec& t = e.table(i);
    for (Bundle m = 1; m < t.size(); ++m) {
      bool tight = t[m] > 0.0;
      for (Bundle rest = m; tight && rest; rest &= rest - 1) tight = t[m & ~(rest & -rest)] < t[m];
      if (tight) minimal[i].push_back(m);
    }
  }
  std::vector<Point> pts;
  Point y(n);
  std::function<void(std::size_t, Bundle)> pick = [&](std::size_t i, Bundle used) {
    if (i == n) {
      if (pts.size() >= kMaxBargainingPoints) throw InvalidInput("economy has too many allocation payoffs");
      pts.push_back(y);
      return;
    }
    for (Bundle m : minimal[i]) {
      if (m & used) continue;
      y[i] = e.value(i, m);
      pick(i + 1, used | m);
    }
  };
  pick(0, 0);
  return Polytope::coco_hull(pts);
}

double partition_revenue(const PackagePrices& p, std::size_t goods) {
  if (goods > kMaxPartitionGoods) throw InvalidInput("firm revenue needs at most 12 goods");
  if (p.table().size() != table_size(goods)) throw InvalidInput("price table does not match the goods");
  Vec best(table_size(goods), 0.0);
  for (Bundle s = 1; s < best.size(); ++s) {
    const Bundle low = s & -s;
    const Bundle rest = s ^ low;
    double top = 0.0;
    // Parts containing the lowest good of s.
    for (Bundle sub = rest;; sub = (sub - 1) & rest) {
      const Bundle part = sub | low;
      top = std::max(top, p(part) + best[s ^ part]);
      if (sub == 0) break;
    }
    best[s] = top;
  }
  return best.back();
}

Vec marginal(const RandomAllocation& theta, std::size_t agent, std::size_t goods) {
  Vec out(table_size(goods), 0.0);
  for (const WeightedAllocation& w : theta) {
    if (agent >= w.bundles.size()) throw InvalidInput("allocation has too few shares");
    if (w.bundles[agent] >= out.size()) throw InvalidInput("allocation names an unknown good");
    out[w.bundles[agent]] += w.weight;
  }
  return out;
}

Vec exchange_payoffs(const Economy& e, const RandomAllocation& theta) {
  Vec out(e.agents(), 0.0);
  for (const WeightedAllocation& w : theta)
    for (std::size_t i = 0; i < e.agents(); ++i) out[i] += w.weight * e.value(i, w.bundles[i]);
  return out;
}

namespace {

void require_allocation(const Economy& e, const RandomAllocation& theta) {
  if (theta.empty()) throw InvalidInput("random allocation is empty");
  const Bundle all = static_cast<Bundle>(table_size(e.goods()) - 1);
  double total = 0.0;
  for (const WeightedAllocation& w : theta) {
    if (w.bundles.size() != e.agents()) throw InvalidInput("allocation must give one share per agent");
    if (!std::isfinite(w.weight) || w.weight < 0.0) throw InvalidInput("allocation weights must be nonnegative");
    Bundle used = 0;
    for (Bundle b : w.bundles) {
      if (b & ~all) throw InvalidInput("allocation names an unknown good");
      if (b & used) throw InvalidInput("allocation gives a good to two agents");
      used |= b;
    }
    total += w.weight;
  }
  if (std::abs(total - 1.0) > tol::kVerify) throw InvalidInput("allocation weights must sum to one");
}

}  // namespace

Verdict verify_walras_exchange(const Economy& e, const PackagePrices& p, const RandomAllocation& theta, double tol) {
  if (p.goods() != e.goods()) throw InvalidInput("price table does not match the goods");
  require_allocation(e, theta);
  double scale = std::max(1.0, max_abs(p.table()));
  for (std::size_t i = 0; i < e.agents(); ++i) scale = std::max(scale, max_abs(e.table(i)));
  const double slack_tol = tol * scale;

  Verdict out;
  auto fail = [&](std::string cond, std::ptrdiff_t agent, double slack, std::string detail = {}) {
    out.violations.push_back({std::move(cond), agent, slack, std::move(detail)});
  };
  for (std::size_t i = 0; i < e.agents(); ++i) {
    const auto agent = static_cast<std::ptrdiff_t>(i);
    const Vec share = marginal(theta, i, e.goods());
    const double spend = dot(p.table(), share);
    if (spend - 1.0 > slack_tol) fail("budget", agent, spend - 1.0);
    const double have = dot(e.table(i), share);
    const lp::ConsumerSolution best = lp::consumer_problem(e.table(i), p.table());
    if (best.value - have > slack_tol) fail("consumer_optimum", agent, best.value - have);
    const lp::MinimalCostDemand cheap = lp::minimal_cost_demand(e.table(i), p.table(), lp::TieBreak::none);
    if (spend - cheap.cost > slack_tol) fail("minimal_cost", agent, spend - cheap.cost);
  }
  const double top = partition_revenue(p, e.goods());
  for (std::size_t a = 0; a < theta.size(); ++a) {
    if (theta[a].weight <= tol::kSupport) continue;
    double revenue = 0.0;
    for (Bundle b : theta[a].bundles) revenue += p(b);
    if (top - revenue > slack_tol)
      fail("firm_revenue", -1, top - revenue, "allocation " + std::to_string(a) + " in the support");
  }
  return out;
}

LindahlOutcome walras_to_lindahl_exchange(const Economy& e, const PackagePrices& p, const RandomAllocation& theta) {
  const Verdict in = verify_walras_exchange(e, p, theta);
  if (!in.passed()) throw InvalidInput("not a Walrasian equilibrium: " + in.summary());
  const std::vector<Allocation> all = enumerate_allocations(e);
  LindahlOutcome out{to_collective_exchange(e), Matrix(e.agents(), all.size()), Vec(all.size(), 0.0)};
  for (std::size_t j = 0; j < all.size(); ++j)
    for (std::size_t i = 0; i < e.agents(); ++i) out.prices(i, j) = p(all[j][i]);
  for (const WeightedAllocation& w : theta) out.lottery[allocation_index(e, w.bundles)] += w.weight;
  const Verdict v = verify_lindahl(out.problem, out.prices, out.lottery);
  if (!v.passed()) throw NumericalError("converted Lindahl equilibrium fails verification: " + v.summary());
  return out;
}

}  // namespace ccm
