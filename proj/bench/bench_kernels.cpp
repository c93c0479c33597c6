// Serial reference against OpenMP for the three parallel kernels. Prints one
// line per kernel with both timings and whether the outputs agree.

#include <chrono>
#include <cstdio>
#include <random>

#include "ccm/exchange.hpp"
#include "ccm/solutions.hpp"

using namespace ccm;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-22s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n", name, serial, parallel,
              parallel > 0 ? serial / parallel : 0.0, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t steps = argc > 1 ? std::stoul(argv[1]) : 24;
  std::printf("workers %d\n", worker_count());

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> level(0, 10);
  Matrix u(3, 6);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 6; ++j) u(i, j) = level(rng) / 10.0;
  for (std::size_t i = 0; i < 3; ++i) u(i, i) = 1.0;
  const CollectiveProblem p(u);
  SweepResult s1, s2;
  const double ts = seconds([&] { s1 = sweep_lindahl_payoffs(p, steps, Exec::serial); });
  const double tp = seconds([&] { s2 = sweep_lindahl_payoffs(p, steps, Exec::parallel); });
  bool same = s1.certificates.size() == s2.certificates.size() && s1.admissible_cells == s2.admissible_cells;
  for (std::size_t t = 0; same && t < s1.certificates.size(); ++t)
    same = s1.certificates[t].payoffs == s2.certificates[t].payoffs;
  report("floor sweep", ts, tp, same);

  const Polytope tri = Polytope::coco_hull({{0, 0, 0}, {1, 1, 0.5}, {1.0 / 3, 1.0 / 3, 1}});
  const Point x{1.0 / 3, 1.0 / 3, 1};
  std::optional<Point> g1, g2;
  const double gs = seconds([&] { g1 = grid_certificate_floor(tri, x, 8 * steps, tol::kGeom, Exec::serial); });
  const double gp = seconds([&] { g2 = grid_certificate_floor(tri, x, 8 * steps, tol::kGeom, Exec::parallel); });
  report("equitable grid search", gs, gp, g1 == g2);

  const Economy e = Economy::additive({Vec(10, 1.0), Vec(10, 2.0), Vec(10, 3.0)});
  std::vector<Allocation> a1, a2;
  const double as = seconds([&] { a1 = enumerate_allocations(e, Exec::serial); });
  const double ap = seconds([&] { a2 = enumerate_allocations(e, Exec::parallel); });
  report("allocation enumeration", as, ap, a1 == a2);
  return 0;
}
