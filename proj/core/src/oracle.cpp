#include "mkot/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace mkot {

namespace {

constexpr std::size_t kMaxCells = 20;
constexpr double kFlowTol = 1e-12;

struct Cell {
  std::size_t row, col;
};

// Flows forced by a candidate basis, found by repeatedly peeling nodes of
// degree one. Returns false when the subset contains a cycle (so it is not
// a spanning tree) or when some forced flow is negative beyond tolerance.
bool tree_flows(const std::vector<Cell>& cells, std::span<const double> supplies,
                std::span<const double> demands, std::vector<double>& flows) {
  const std::size_t m = supplies.size();
  const std::size_t n = demands.size();
  std::vector<int> degree(m + n, 0);
  for (const Cell& cell : cells) {
    ++degree[cell.row];
    ++degree[m + cell.col];
  }
  std::vector<double> residual(m + n);
  std::copy(supplies.begin(), supplies.end(), residual.begin());
  std::copy(demands.begin(), demands.end(), residual.begin() + m);

  flows.assign(cells.size(), 0.0);
  std::vector<char> done(cells.size(), false);
  for (std::size_t step = 0; step < cells.size(); ++step) {
    std::size_t pick = cells.size();
    std::size_t leaf = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (done[k]) continue;
      if (degree[cells[k].row] == 1) {
        pick = k;
        leaf = cells[k].row;
        break;
      }
      if (degree[m + cells[k].col] == 1) {
        pick = k;
        leaf = m + cells[k].col;
        break;
      }
    }
    if (pick == cells.size()) return false;  // only cycles remain

    const double flow = residual[leaf];
    if (flow < -kFlowTol) return false;
    flows[pick] = flow;
    residual[cells[pick].row] -= flow;
    residual[m + cells[pick].col] -= flow;
    --degree[cells[pick].row];
    --degree[m + cells[pick].col];
    done[pick] = true;
  }
  return true;
}

}  // namespace

double oracle_solve(const CostMatrix& cost, std::span<const double> supplies,
                    std::span<const double> demands) {
  const std::size_t m = supplies.size();
  const std::size_t n = demands.size();
  if (m == 0 || n == 0) throw Error("oracle_solve: empty supply or demand side");
  if (m * n > kMaxCells) throw TooLarge("oracle_solve: instance exceeds 20 cells");
  double total_supply = 0.0, total_demand = 0.0;
  for (double s : supplies) total_supply += s;
  for (double d : demands) total_demand += d;
  if (std::abs(total_supply - total_demand) > 1e-9 * std::max(total_supply, 1.0)) {
    throw UnbalancedProblem("oracle_solve: totals differ beyond tolerance");
  }

  const std::size_t cell_count = m * n;
  const std::size_t basis_size = m + n - 1;
  std::vector<Cell> cells(basis_size);
  std::vector<double> flows;
  double best = std::numeric_limits<double>::infinity();

  for (std::uint32_t mask = 0; mask < (1u << cell_count); ++mask) {
    if (std::popcount(mask) != static_cast<int>(basis_size)) continue;
    std::size_t k = 0;
    for (std::size_t idx = 0; idx < cell_count; ++idx) {
      if (mask & (1u << idx)) cells[k++] = {idx / n, idx % n};
    }
    if (!tree_flows(cells, supplies, demands, flows)) continue;
    double value = 0.0;
    for (std::size_t c = 0; c < basis_size; ++c) {
      value += flows[c] * cost(cells[c].row, cells[c].col);
    }
    best = std::min(best, value);
  }
  return best;
}

double oracle_solve(const BalancedPair& pair) {
  const CostMatrix cost = build_cost_matrix(pair);
  return oracle_solve(cost, pair.source.masses(), pair.target.masses());
}

double oracle_solve_assignment(const CostMatrix& cost, double mass_per_point) {
  if (cost.rows() != cost.cols()) {
    throw Error("oracle_solve_assignment: cost matrix is not square");
  }
  const std::size_t n = cost.rows();
  if (n == 0) throw Error("oracle_solve_assignment: empty matrix");
  if (n > 8) throw TooLarge("oracle_solve_assignment: more than 8 points");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) value += cost(i, perm[i]);
    best = std::min(best, value);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best * mass_per_point;
}

}  // namespace mkot
