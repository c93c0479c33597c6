#include <omp.h>

#include <cmath>

#include "ccm/market.hpp"

namespace ccm {

namespace {

constexpr double kMaxCells = 2e6;
constexpr std::size_t kBlock = 1024;

enum class CellState { inadmissible, certified, failed };

struct Cell {
  CellState state = CellState::inadmissible;
  std::optional<LindahlCertificate> cert;
};

struct Grid {
  Vec top;  // max_j u_i^j
  std::size_t steps;

  void decode(std::size_t idx, Vec& c) const {
    for (std::size_t i = c.size(); i-- > 0;) {
      c[i] = static_cast<double>(idx % steps) / static_cast<double>(steps) * top[i];
      idx /= steps;
    }
  }
};

Cell evaluate(const CollectiveProblem& p, const Grid& g, std::size_t idx) {
  Vec c(p.agents());
  g.decode(idx, c);
  Cell cell;
  try {
    cell.cert = lindahl_from_nash(p, c);
    cell.state = cell.cert ? CellState::certified : CellState::inadmissible;
  } catch (const NumericalError&) {
    cell.state = CellState::failed;
  }
  return cell;
}

void merge(SweepResult& out, Cell& cell) {
  ++out.cells;
  if (cell.state == CellState::failed) {
    ++out.failures;
    return;
  }
  if (cell.state == CellState::inadmissible) return;
  ++out.admissible_cells;
  for (const LindahlCertificate& kept : out.certificates)
    if (max_abs_diff(kept.payoffs, cell.cert->payoffs) <= tol::kDedup) return;
  out.certificates.push_back(std::move(*cell.cert));
}

}  // namespace

SweepResult sweep_lindahl_payoffs(const CollectiveProblem& p, std::size_t steps, Exec exec) {
  if (steps == 0) throw InvalidInput("sweep: steps must be positive");
  const std::size_t n = p.agents();
  if (std::pow(static_cast<double>(steps), static_cast<double>(n)) > kMaxCells)
    throw InvalidInput("sweep: steps^n exceeds the cell budget of 2e6");
  Grid g{Vec(n), steps};
  for (std::size_t i = 0; i < n; ++i) g.top[i] = max_abs(p.utility().row(i));
  std::size_t cells = 1;
  for (std::size_t i = 0; i < n; ++i) cells *= steps;

  SweepResult out;
  if (exec == Exec::serial) {
    for (std::size_t idx = 0; idx < cells; ++idx) {
      Cell cell = evaluate(p, g, idx);
      merge(out, cell);
    }
    return out;
  }

  std::vector<Cell> block;
  for (std::size_t start = 0; start < cells; start += kBlock) {
    const std::size_t len = std::min(kBlock, cells - start);
    block.assign(len, Cell{});
    const auto count = static_cast<long long>(len);
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_count())
    for (long long k = 0; k < count; ++k)
      block[static_cast<std::size_t>(k)] = evaluate(p, g, start + static_cast<std::size_t>(k));
    for (Cell& cell : block) merge(out, cell);
  }
  return out;
}

}  // namespace ccm
