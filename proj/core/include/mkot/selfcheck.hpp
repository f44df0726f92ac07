#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mkot/measures.hpp"
#include "mkot/rng.hpp"

namespace mkot {

// Random balanced instance on an integer grid: support sizes drawn in
// [1, max_support], distinct points in [0, grid)^2, masses uniform in
// [0.1, 1), both sides normalized to total mass 1.
BalancedPair random_balanced_pair(rng::Engine& eng, int max_support = 4, int grid = 5);

// Built-in verification: the worked 3-supply golden instance, simplex vs.
// brute-force oracle agreement on random small instances, and the metric
// axioms of the Wasserstein-2 distance on random measure triples.
struct SelfCheckReport {
  struct Item {
    std::string name;
    bool passed = false;
    std::string detail;
  };
  std::vector<Item> items;

  bool all_passed() const;
};

SelfCheckReport run_selfcheck(std::uint64_t seed = 42, int oracle_instances = 500,
                              int metric_triples = 200);

}  // namespace mkot
