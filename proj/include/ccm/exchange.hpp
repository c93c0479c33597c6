#pragma once

#include <cstdint>
#include <vector>

#include "ccm/market.hpp"

namespace ccm {

/// Subsets of the goods as bitmasks, bit h for good h.
using Bundle = std::uint32_t;

/// Indivisible goods shared among n agents with monotone set-function
/// utilities tabulated over all 2^r bundles.
class Economy {
 public:
  enum class Kind { additive, table };

  /// tables[i][M] = v_i(M). Throws InvalidInput unless each table has 2^r
  /// finite entries, v_i(empty) = 0, v_i is monotone and v_i(H) > 0.
  Economy(std::size_t goods, std::vector<Vec> tables, Kind kind = Kind::table);

  /// values[i][h] = v_i({h}).
  static Economy additive(const std::vector<Vec>& values);
  /// v_i(M) = max_{h in M} v_i({h}).
  static Economy unit_demand(const std::vector<Vec>& values);

  struct Listed {
    std::size_t agent;
    Bundle bundle;
    double value;
  };
  /// Smallest monotone utilities that give each listed bundle its value.
  static Economy monotone_closure(std::size_t agents, std::size_t goods, const std::vector<Listed>& listed);

  std::size_t agents() const { return v_.size(); }
  std::size_t goods() const { return r_; }
  Kind kind() const { return kind_; }
  double value(std::size_t agent, Bundle b) const { return v_[agent][b]; }
  const Vec& table(std::size_t agent) const { return v_[agent]; }

 private:
  std::size_t r_;
  std::vector<Vec> v_;
  Kind kind_;
};

inline constexpr std::size_t kMaxGoods = 16;

/// Package prices over all bundles with p(empty) = 0.
class PackagePrices {
 public:
  /// Throws InvalidInput unless the table has 2^r finite nonnegative entries
  /// and p(empty) = 0.
  explicit PackagePrices(Vec table);
  /// p(M) = sum of the per-good prices in M.
  static PackagePrices additive(const Vec& per_good);

  double operator()(Bundle b) const { return table_[b]; }
  const Vec& table() const { return table_; }
  std::size_t goods() const;

 private:
  Vec table_;
};

/// bundles[i] is agent i's share; shares are pairwise disjoint.
using Allocation = std::vector<Bundle>;

struct WeightedAllocation {
  Allocation bundles;
  double weight;
};

using RandomAllocation = std::vector<WeightedAllocation>;

/// Each good goes to one agent or stays unassigned: (n+1)^r allocations,
/// indexed with good 0 as the most significant digit and digit 0 meaning
/// unassigned. Throws InvalidInput when (n+1)^r exceeds 2e6.
std::vector<Allocation> enumerate_allocations(const Economy& e, Exec exec = Exec::parallel);

/// Position of an allocation in enumerate_allocations.
std::size_t allocation_index(const Economy& e, const Allocation& a);

/// coco of allocation payoffs and the origin, built from each agent's
/// minimal bundles so it needs no full enumeration.
Polytope bargaining_of_economy(const Economy& e);

/// One outcome per allocation, u_i^a = v_i(a_i).
CollectiveProblem to_collective_exchange(const Economy& e, Exec exec = Exec::parallel);

/// Largest revenue over partitions of the goods. Needs r <= 12.
double partition_revenue(const PackagePrices& p, std::size_t goods);

/// Agent i's distribution over bundles.
Vec marginal(const RandomAllocation& theta, std::size_t agent, std::size_t goods);

Vec exchange_payoffs(const Economy& e, const RandomAllocation& theta);

/// Throws InvalidInput for malformed theta: wrong shapes, overlapping
/// shares, negative weights or weights not summing to one.
Verdict verify_walras_exchange(const Economy& e, const PackagePrices& p, const RandomAllocation& theta,
                               double tol = tol::kVerify);

struct LindahlOutcome {
  CollectiveProblem problem;
  Matrix prices;
  Vec lottery;
};

/// Prices p_i(a) = p(a_i) on the allocation outcomes. Throws InvalidInput
/// unless (p, theta) verifies.
LindahlOutcome walras_to_lindahl_exchange(const Economy& e, const PackagePrices& p, const RandomAllocation& theta);

/// Additive two-agent economy whose bargaining set is B. Requires d(B) = 0.
Economy commodify_two(const Polytope& b);

/// Economy over payoff goods and copies of minimally inconsistent payoff
/// vectors whose bargaining set is B. Requires d(B) = 0 and at most 16 goods.
Economy commodify_general(const Polytope& b);

struct TwoAgentEquilibrium {
  Economy economy;
  Vec good_prices;
  PackagePrices prices;
  RandomAllocation allocation;
};

/// Additive-price equilibrium of commodify_two(B) with payoff x. Throws
/// InvalidInput unless x is efficient in B and x >= b(B) / 2.
TwoAgentEquilibrium walras_from_equitable_two(const Polytope& b, std::span<const double> x);

}  // namespace ccm
