#pragma once

#include <span>

#include "mkot/transport.hpp"

namespace mkot {

struct TooLarge : Error {
  using Error::Error;
};

// Exact optimum of a tiny transportation problem (m*n <= 20) by exhaustive
// enumeration of all spanning-tree bases of the bipartite graph. Kept
// deliberately independent of the simplex solver: it shares no code with
// the pivoting path and is used to cross-check it.
double oracle_solve(const CostMatrix& cost, std::span<const double> supplies,
                    std::span<const double> demands);
double oracle_solve(const BalancedPair& pair);

// Exact optimum for the square, equal-mass case by enumerating all n!
// permutation matchings (n <= 8). Cross-checks oracle_solve on such
// instances.
double oracle_solve_assignment(const CostMatrix& cost, double mass_per_point);

}  // namespace mkot
