#include "mkot/selfcheck.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "mkot/oracle.hpp"
#include "mkot/transport.hpp"

namespace mkot {

namespace {

DiscreteMeasure random_measure(rng::Engine& eng, int max_support, int grid) {
  const std::size_t support = 1 + rng::bounded(eng, static_cast<std::uint64_t>(max_support));
  std::vector<std::size_t> cells(static_cast<std::size_t>(grid) * grid);
  std::iota(cells.begin(), cells.end(), 0);
  rng::shuffle(cells, eng);

  std::vector<GridPoint> points;
  std::vector<double> masses;
  points.reserve(support);
  masses.reserve(support);
  for (std::size_t k = 0; k < support; ++k) {
    points.push_back({static_cast<double>(cells[k] % grid), static_cast<double>(cells[k] / grid)});
    masses.push_back(rng::uniform(eng, 0.1, 1.0));
  }
  return normalize(DiscreteMeasure(std::move(points), std::move(masses)));
}

// The worked three-supply instance: unit masses, the target a translation of
// the source by (2, 1), optimal cost 3 * 5 = 15.
BalancedPair golden_pair() {
  DiscreteMeasure source({{3, 2}, {1, 1}, {2, 4}}, {1, 1, 1});
  DiscreteMeasure target({{5, 3}, {3, 2}, {4, 5}}, {1, 1, 1});
  return BalancedPair::from_equal_totals(std::move(source), std::move(target));
}

}  // namespace

BalancedPair random_balanced_pair(rng::Engine& eng, int max_support, int grid) {
  DiscreteMeasure a = random_measure(eng, max_support, grid);
  DiscreteMeasure b = random_measure(eng, max_support, grid);
  return BalancedPair::from_equal_totals(std::move(a), std::move(b));
}

bool SelfCheckReport::all_passed() const {
  for (const Item& item : items) {
    if (!item.passed) return false;
  }
  return true;
}

SelfCheckReport run_selfcheck(std::uint64_t seed, int oracle_instances, int metric_triples) {
  SelfCheckReport report;

  {
    const BalancedPair pair = golden_pair();
    const TransportPlan plan = solve_transport(pair);
    const CertificateReport certificate = verify_optimality(plan, pair);
    const bool passed = std::abs(plan.objective - 15.0) <= 1e-9 &&
                        plan.status == SolveStatus::Optimal && certificate.passed;
    std::ostringstream detail;
    detail << "objective " << plan.objective << ", expected 15";
    report.items.push_back({"golden-instance", passed, detail.str()});
  }

  {
    rng::Engine eng(seed);
    int failures = 0;
    std::string first_failure;
    for (int i = 0; i < oracle_instances; ++i) {
      const BalancedPair pair = random_balanced_pair(eng);
      SolverOptions opts;
      opts.pivot_rule = i % 2 == 0 ? PivotRule::MostNegative : PivotRule::Bland;
      const TransportPlan plan = solve_transport(pair, opts);
      const double expected = oracle_solve(pair);
      const bool ok = plan.status == SolveStatus::Optimal &&
                      std::abs(plan.objective - expected) <= 1e-9 * std::max(1.0, expected) &&
                      verify_optimality(plan, pair).passed;
      if (!ok) {
        ++failures;
        if (first_failure.empty()) {
          std::ostringstream detail;
          detail << "instance " << i << ": solver " << plan.objective << ", oracle " << expected;
          first_failure = detail.str();
        }
      }
    }
    std::ostringstream detail;
    detail << oracle_instances - failures << "/" << oracle_instances
           << " instances match the brute-force optimum";
    if (failures > 0) detail << "; first failure: " << first_failure;
    report.items.push_back({"oracle-agreement", failures == 0, detail.str()});
  }

  {
    rng::Engine eng(seed + 1);
    int failures = 0;
    std::string first_failure;
    for (int i = 0; i < metric_triples; ++i) {
      const DiscreteMeasure a = random_measure(eng, 4, 5);
      const DiscreteMeasure b = random_measure(eng, 4, 5);
      const DiscreteMeasure c = random_measure(eng, 4, 5);
      const double ab = wasserstein2(BalancedPair::from_equal_totals(a, b));
      const double ba = wasserstein2(BalancedPair::from_equal_totals(b, a));
      const double ac = wasserstein2(BalancedPair::from_equal_totals(a, c));
      const double bc = wasserstein2(BalancedPair::from_equal_totals(b, c));
      const double aa = wasserstein2(BalancedPair::from_equal_totals(a, a));
      std::string why;
      if (ab < 0.0 || ac < 0.0 || bc < 0.0) {
        why = "negative distance";
      } else if (std::abs(ab - ba) > 1e-9) {
        why = "asymmetry";
      } else if (aa > 1e-9) {
        why = "nonzero self-distance";
      } else if (ac > ab + bc + 1e-9) {
        why = "triangle inequality violated";
      }
      if (!why.empty()) {
        ++failures;
        if (first_failure.empty()) {
          first_failure = "triple " + std::to_string(i) + ": " + why;
        }
      }
    }
    std::ostringstream detail;
    detail << metric_triples - failures << "/" << metric_triples << " triples satisfy the axioms";
    if (failures > 0) detail << "; first failure: " << first_failure;
    report.items.push_back({"metric-axioms", failures == 0, detail.str()});
  }

  return report;
}

}  // namespace mkot
