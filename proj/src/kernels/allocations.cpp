#include <omp.h>

#include <cmath>

#include "ccm/exchange.hpp"

namespace ccm {

namespace {

constexpr double kMaxAllocations = 2e6;

std::size_t allocation_count(const Economy& e) {
  const double count = std::pow(static_cast<double>(e.agents() + 1), static_cast<double>(e.goods()));
  if (count > kMaxAllocations) throw InvalidInput("(n+1)^r exceeds the allocation budget of 2e6");
  std::size_t c = 1;
  for (std::size_t h = 0; h < e.goods(); ++h) c *= e.agents() + 1;
  return c;
}

void decode(std::size_t idx, std::size_t agents, std::size_t goods, Allocation& a) {
  std::fill(a.begin(), a.end(), Bundle{0});
  for (std::size_t h = goods; h-- > 0;) {
    const std::size_t owner = idx % (agents + 1);
    idx /= agents + 1;
    if (owner) a[owner - 1] |= Bundle{1} << h;
  }
}

}  // namespace

std::vector<Allocation> enumerate_allocations(const Economy& e, Exec exec) {
  const std::size_t count = allocation_count(e);
  const std::size_t n = e.agents(), r = e.goods();
  std::vector<Allocation> out(count, Allocation(n));
  if (exec == Exec::serial) {
    for (std::size_t idx = 0; idx < count; ++idx) decode(idx, n, r, out[idx]);
    return out;
  }
  const auto total = static_cast<long long>(count);
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (long long idx = 0; idx < total; ++idx)
    decode(static_cast<std::size_t>(idx), n, r, out[static_cast<std::size_t>(idx)]);
  return out;
}

std::size_t allocation_index(const Economy& e, const Allocation& a) {
  if (a.size() != e.agents()) throw InvalidInput("allocation must give one share per agent");
  std::size_t idx = 0;
  for (std::size_t h = 0; h < e.goods(); ++h) {
    std::size_t owner = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] >> h & 1U) {
        if (owner) throw InvalidInput("allocation gives a good to two agents");
        owner = i + 1;
      }
    idx = idx * (e.agents() + 1) + owner;
  }
  return idx;
}

CollectiveProblem to_collective_exchange(const Economy& e, Exec exec) {
  const std::vector<Allocation> all = enumerate_allocations(e, exec);
  const std::size_t n = e.agents();
  Matrix u(n, all.size());
  const auto total = static_cast<long long>(all.size());
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (exec == Exec::parallel)
  for (long long j = 0; j < total; ++j)
    for (std::size_t i = 0; i < n; ++i)
      u(i, static_cast<std::size_t>(j)) = e.value(i, all[static_cast<std::size_t>(j)][i]);
  return CollectiveProblem(std::move(u));
}

}  // namespace ccm
