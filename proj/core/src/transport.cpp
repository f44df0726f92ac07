#include "mkot/transport.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <utility>

namespace mkot {

CostMatrix build_cost_matrix(const BalancedPair& pair) {
  const auto& src = pair.source.points();
  const auto& tgt = pair.target.points();
  CostMatrix cost(src.size(), tgt.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = 0; j < tgt.size(); ++j) {
      const double dx = src[i].x - tgt[j].x;
      const double dy = src[i].y - tgt[j].y;
      cost(i, j) = dx * dx + dy * dy;
    }
  }
  return cost;
}

std::vector<BasicCell> northwest_corner(std::span<const double> supplies,
                                        std::span<const double> demands, double balance_tol) {
  const std::size_t m = supplies.size();
  const std::size_t n = demands.size();
  if (m == 0 || n == 0) {
    throw Error("northwest_corner: empty supply or demand side");
  }
  double total_supply = 0.0, total_demand = 0.0;
  for (double s : supplies) total_supply += s;
  for (double d : demands) total_demand += d;
  if (std::abs(total_supply - total_demand) > balance_tol * std::max(total_supply, 1.0)) {
    throw UnbalancedProblem("total supply and total demand differ beyond tolerance");
  }

  std::vector<double> r(supplies.begin(), supplies.end());
  std::vector<double> c(demands.begin(), demands.end());
  std::vector<BasicCell> cells;
  cells.reserve(m + n - 1);

  // Walk the tableau from (0,0) to (m-1,n-1), filling greedily. Each step
  // advances one index, so exactly m+n-1 cells come out; ties leave explicit
  // zero-flow basic cells behind. The staircase pattern is always a spanning
  // tree of the bipartite graph.
  std::size_t i = 0, j = 0;
  for (;;) {
    const double t = std::min(r[i], c[j]);
    cells.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                     std::max(t, 0.0)});
    r[i] -= t;
    c[j] -= t;
    if (i == m - 1 && j == n - 1) break;
    if (i < m - 1 && (r[i] <= 0.0 || j == n - 1)) {
      ++i;
    } else {
      ++j;
    }
  }
  assert(cells.size() == m + n - 1);
  return cells;
}

namespace {

bool cell_index_less(const BasicCell& a, const BasicCell& b) {
  return a.row != b.row ? a.row < b.row : a.col < b.col;
}

// Transportation simplex working state. Nodes 0..m-1 are supply rows,
// m..m+n-1 are demand columns; the basis is a spanning tree over them.
class TransportSimplex {
 public:
  TransportSimplex(const CostMatrix& cost, std::span<const double> supplies,
                   std::span<const double> demands, const SolverOptions& opts)
      : cost_(cost),
        opts_(opts),
        m_(supplies.size()),
        n_(demands.size()),
        cells_(northwest_corner(supplies, demands)),
        adj_(m_ + n_),
        u_(m_, 0.0),
        v_(n_, 0.0),
        known_(m_ + n_, false),
        bfs_queue_(m_ + n_, 0),
        parent_node_(m_ + n_, 0),
        parent_cell_(m_ + n_, -1) {
    for (int k = 0; k < static_cast<int>(cells_.size()); ++k) {
      attach(k);
    }
  }

  TransportPlan run() {
    const std::size_t max_iterations =
        std::max<std::size_t>(1, opts_.max_iterations.value_or(50 * (m_ + n_) * std::max(m_, n_)));
    const std::size_t bland_after = 3 * (m_ + n_);

    std::size_t iterations = 0;
    std::size_t consecutive_degenerate = 0;
    SolveStatus status = SolveStatus::IterationLimit;
    for (;;) {
      compute_duals();
      const bool bland =
          opts_.pivot_rule == PivotRule::Bland || consecutive_degenerate >= bland_after;
      std::uint32_t ei = 0, ej = 0;
      if (!select_entering(bland, ei, ej)) {
        status = SolveStatus::Optimal;
        break;
      }
      if (iterations >= max_iterations) break;
      const double theta = pivot(ei, ej);
      ++iterations;
      consecutive_degenerate = theta > 0.0 ? 0 : consecutive_degenerate + 1;
    }

    compute_duals();
    TransportPlan plan;
    plan.iterations = iterations;
    plan.status = status;
    plan.duals_u = u_;
    plan.duals_v = v_;
    plan.flows.reserve(cells_.size());
    for (const BasicCell& cell : cells_) {
      if (cell.flow > 0.0) plan.flows.push_back({cell.row, cell.col, cell.flow});
    }
    std::sort(plan.flows.begin(), plan.flows.end(), [](const FlowEntry& a, const FlowEntry& b) {
      return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    double objective = 0.0;
    for (const FlowEntry& f : plan.flows) objective += cost_(f.from, f.to) * f.mass;
    plan.objective = objective;
    return plan;
  }

 private:
  void attach(int k) {
    adj_[cells_[k].row].push_back(k);
    adj_[m_ + cells_[k].col].push_back(k);
  }

  void detach(int k) {
    auto erase_from = [&](std::size_t node) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), k));
    };
    erase_from(cells_[k].row);
    erase_from(m_ + cells_[k].col);
  }

  // Duals from the basis tree, root u[0] = 0: every basic cell (i,j)
  // satisfies u_i + v_j = c_ij.
  void compute_duals() {
    std::fill(known_.begin(), known_.end(), false);
    std::size_t head = 0, tail = 0;
    bfs_queue_[tail++] = 0;
    known_[0] = true;
    u_[0] = 0.0;
    while (head < tail) {
      const std::size_t node = bfs_queue_[head++];
      for (const int k : adj_[node]) {
        const BasicCell& cell = cells_[k];
        const std::size_t other = node < m_ ? m_ + cell.col : cell.row;
        if (known_[other]) continue;
        if (other >= m_) {
          v_[cell.col] = cost_(cell.row, cell.col) - u_[cell.row];
        } else {
          u_[cell.row] = cost_(cell.row, cell.col) - v_[cell.col];
        }
        known_[other] = true;
        bfs_queue_[tail++] = other;
      }
    }
    assert(tail == m_ + n_);
  }

  // Cell with reduced cost below -dual_tol: the most negative one (ties to
  // the smallest (i,j)), or the first in row-major order under Bland's rule.
  bool select_entering(bool bland, std::uint32_t& ei, std::uint32_t& ej) const {
    const double tol = opts_.dual_tol;
    if (bland) {
      for (std::size_t i = 0; i < m_; ++i) {
        const double ui = u_[i];
        const std::span<const double> row = cost_.row(i);
        for (std::size_t j = 0; j < n_; ++j) {
          if (row[j] - ui - v_[j] < -tol) {
            ei = static_cast<std::uint32_t>(i);
            ej = static_cast<std::uint32_t>(j);
            return true;
          }
        }
      }
      return false;
    }
    double best = -tol;
    bool found = false;
    for (std::size_t i = 0; i < m_; ++i) {
      const double ui = u_[i];
      const std::span<const double> row = cost_.row(i);
      for (std::size_t j = 0; j < n_; ++j) {
        const double reduced = row[j] - ui - v_[j];
        if (reduced < best) {
          best = reduced;
          ei = static_cast<std::uint32_t>(i);
          ej = static_cast<std::uint32_t>(j);
          found = true;
        }
      }
    }
    return found;
  }

  // Unique tree path from row node `src` to column node `dst`; output is the
  // cell index sequence ordered from the row end.
  void find_path(std::size_t src, std::size_t dst) {
    std::fill(parent_cell_.begin(), parent_cell_.end(), -1);
    std::size_t head = 0, tail = 0;
    bfs_queue_[tail++] = src;
    parent_cell_[src] = -2;  // visited marker for the root
    while (head < tail) {
      const std::size_t node = bfs_queue_[head++];
      if (node == dst) break;
      for (const int k : adj_[node]) {
        const BasicCell& cell = cells_[k];
        const std::size_t other = node < m_ ? m_ + cell.col : cell.row;
        if (parent_cell_[other] != -1) continue;
        parent_cell_[other] = k;
        parent_node_[other] = node;
        bfs_queue_[tail++] = other;
      }
    }
    path_.clear();
    for (std::size_t node = dst; node != src; node = parent_node_[node]) {
      assert(parent_cell_[node] >= 0);
      path_.push_back(parent_cell_[node]);
    }
    std::reverse(path_.begin(), path_.end());
  }

  // Brings (ei,ej) into the basis. Around the induced cycle, flows at even
  // path positions (starting beside row ei) decrease and odd positions
  // increase; the smallest decreasing flow leaves, ties broken by smallest
  // (row, col). Returns the shifted amount (zero on a degenerate pivot).
  double pivot(std::uint32_t ei, std::uint32_t ej) {
    find_path(ei, m_ + ej);

    double theta = std::numeric_limits<double>::infinity();
    int leaving_pos = -1;
    for (std::size_t k = 0; k < path_.size(); k += 2) {
      const BasicCell& cell = cells_[path_[k]];
      if (leaving_pos < 0 || cell.flow < theta ||
          (cell.flow == theta && cell_index_less(cell, cells_[path_[leaving_pos]]))) {
        theta = cell.flow;
        leaving_pos = static_cast<int>(k);
      }
    }
    assert(leaving_pos >= 0);

    for (std::size_t k = 0; k < path_.size(); ++k) {
      BasicCell& cell = cells_[path_[k]];
      if (k % 2 == 0) {
        cell.flow = std::max(0.0, cell.flow - theta);
      } else {
        cell.flow += theta;
      }
    }

    const int slot = path_[leaving_pos];
    detach(slot);
    cells_[slot] = {ei, ej, theta};
    attach(slot);
    return theta;
  }

  const CostMatrix& cost_;
  const SolverOptions& opts_;
  std::size_t m_, n_;
  std::vector<BasicCell> cells_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> u_, v_;
  std::vector<char> known_;
  std::vector<std::size_t> bfs_queue_;
  std::vector<std::size_t> parent_node_;
  std::vector<int> parent_cell_;
  std::vector<int> path_;
};

}  // namespace

TransportPlan solve_transport(const CostMatrix& cost, std::span<const double> supplies,
                              std::span<const double> demands, const SolverOptions& opts) {
  if (cost.rows() != supplies.size() || cost.cols() != demands.size()) {
    throw Error("solve_transport: cost matrix shape does not match supplies/demands");
  }
  return TransportSimplex(cost, supplies, demands, opts).run();
}

TransportPlan solve_transport(const BalancedPair& pair, const SolverOptions& opts) {
  const CostMatrix cost = build_cost_matrix(pair);
  return solve_transport(cost, pair.source.masses(), pair.target.masses(), opts);
}

double wasserstein2(const BalancedPair& pair, const SolverOptions& opts) {
  return std::sqrt(solve_transport(pair, opts).objective);
}

CertificateReport verify_optimality(const TransportPlan& plan, const CostMatrix& cost,
                                    std::span<const double> supplies,
                                    std::span<const double> demands, double dual_tol,
                                    double marginal_tol) {
  const std::size_t m = supplies.size();
  const std::size_t n = demands.size();
  CertificateReport report;

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double violation = plan.duals_u[i] + plan.duals_v[j] - cost(i, j);
      report.max_dual_violation = std::max(report.max_dual_violation, violation);
    }
  }

  std::vector<double> row_sum(m, 0.0), col_sum(n, 0.0);
  for (const FlowEntry& f : plan.flows) {
    row_sum[f.from] += f.mass;
    col_sum[f.to] += f.mass;
    const double residual = std::abs(cost(f.from, f.to) - plan.duals_u[f.from] - plan.duals_v[f.to]);
    report.max_slackness_residual = std::max(report.max_slackness_residual, residual);
  }
  for (std::size_t i = 0; i < m; ++i) {
    report.max_marginal_residual =
        std::max(report.max_marginal_residual, std::abs(row_sum[i] - supplies[i]));
  }
  for (std::size_t j = 0; j < n; ++j) {
    report.max_marginal_residual =
        std::max(report.max_marginal_residual, std::abs(col_sum[j] - demands[j]));
  }

  double dual_objective = 0.0;
  for (std::size_t i = 0; i < m; ++i) dual_objective += plan.duals_u[i] * supplies[i];
  for (std::size_t j = 0; j < n; ++j) dual_objective += plan.duals_v[j] * demands[j];
  report.duality_gap = std::abs(plan.objective - dual_objective);

  report.passed = report.max_dual_violation <= dual_tol &&
                  report.max_slackness_residual <= dual_tol &&
                  report.max_marginal_residual <= marginal_tol &&
                  report.duality_gap <= dual_tol;
  return report;
}

CertificateReport verify_optimality(const TransportPlan& plan, const BalancedPair& pair,
                                    double dual_tol, double marginal_tol) {
  const CostMatrix cost = build_cost_matrix(pair);
  return verify_optimality(plan, cost, pair.source.masses(), pair.target.masses(), dual_tol,
                           marginal_tol);
}

}  // namespace mkot
