#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mkot/error.hpp"
#include "mkot/measures.hpp"

namespace mkot {

struct UnbalancedProblem : Error {
  using Error::Error;
};

// Dense m-by-n matrix of squared point distances (source rows, target cols).
class CostMatrix {
 public:
  CostMatrix(std::size_t m, std::size_t n) : m_(m), n_(n), entries_(m * n, 0.0) {}

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * n_, n_};
  }

 private:
  std::size_t m_, n_;
  std::vector<double> entries_;
};

// entries[i][j] = squared Euclidean distance between source point i and
// target point j.
CostMatrix build_cost_matrix(const BalancedPair& pair);

enum class PivotRule { MostNegative, Bland };
enum class SolveStatus { Optimal, IterationLimit };

struct SolverOptions {
  PivotRule pivot_rule = PivotRule::MostNegative;
  // Pivot cap; defaults to 50*(m+n)*max(m,n) when unset.
  std::optional<std::size_t> max_iterations;
  double dual_tol = 1e-9;
  double marginal_tol = 1e-9;
};

struct FlowEntry {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  double mass = 0.0;  // strictly positive
  friend bool operator==(const FlowEntry&, const FlowEntry&) = default;
};

struct TransportPlan {
  std::vector<FlowEntry> flows;  // positive flows only, sorted by (from, to)
  double objective = 0.0;
  std::vector<double> duals_u;  // one per source point, duals_u[0] == 0
  std::vector<double> duals_v;  // one per target point
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::Optimal;
};

// Basis cell of the transportation tableau; zero flows mark degenerate
// basic cells.
struct BasicCell {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double flow = 0.0;
};

// Initial basic feasible solution by the northwest corner rule. Returns
// exactly m+n-1 cells forming a spanning tree of the bipartite supply/demand
// graph, degenerate zero-flow cells included. Raises UnbalancedProblem.
std::vector<BasicCell> northwest_corner(std::span<const double> supplies,
                                        std::span<const double> demands,
                                        double balance_tol = BalancedPair::kBalanceTol);

// Minimum-cost transport plan by the transportation simplex (MODI method).
// The basis is kept as a spanning tree; duals are recomputed from the tree
// with u[0] fixed to 0; reduced costs c_ij - u_i - v_j select the entering
// cell. With PivotRule::MostNegative the solver falls back to Bland's rule
// while degenerate pivots persist, so it cannot cycle.
TransportPlan solve_transport(const CostMatrix& cost, std::span<const double> supplies,
                              std::span<const double> demands, const SolverOptions& opts = {});
TransportPlan solve_transport(const BalancedPair& pair, const SolverOptions& opts = {});

// sqrt of the optimal objective; the L2 Wasserstein distance when the pair
// is normalized to unit total mass.
double wasserstein2(const BalancedPair& pair, const SolverOptions& opts = {});

// Optimality certificate for a solved plan.
//   max_dual_violation      max_ij (u_i + v_j - c_ij)+        (dual feasibility)
//   max_slackness_residual  max over positive flows |c_ij - u_i - v_j|
//   max_marginal_residual   worst row/column sum error vs supplies/demands
//   duality_gap             |objective - (sum u_i f_i + sum v_j g_j)|
struct CertificateReport {
  double max_dual_violation = 0.0;
  double max_slackness_residual = 0.0;
  double max_marginal_residual = 0.0;
  double duality_gap = 0.0;
  bool passed = false;
};

CertificateReport verify_optimality(const TransportPlan& plan, const CostMatrix& cost,
                                    std::span<const double> supplies,
                                    std::span<const double> demands, double dual_tol = 1e-9,
                                    double marginal_tol = 1e-9);
CertificateReport verify_optimality(const TransportPlan& plan, const BalancedPair& pair,
                                    double dual_tol = 1e-9, double marginal_tol = 1e-9);

}  // namespace mkot
