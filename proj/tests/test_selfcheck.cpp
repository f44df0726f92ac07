#include <cmath>
#include <set>
#include <utility>

#include "doctest.h"
#include "mkot/selfcheck.hpp"

using namespace mkot;

TEST_CASE("random balanced pairs stay on the grid with unit mass") {
  rng::Engine eng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const BalancedPair pair = random_balanced_pair(eng, 4, 5);
    for (const DiscreteMeasure* side : {&pair.source, &pair.target}) {
      REQUIRE(side->size() >= 1);
      REQUIRE(side->size() <= 4);
      CHECK(side->total_mass() == doctest::Approx(1.0).epsilon(1e-12));
      std::set<std::pair<double, double>> seen;
      for (std::size_t i = 0; i < side->size(); ++i) {
        const GridPoint p = side->points()[i];
        CHECK(p.x == std::floor(p.x));
        CHECK(p.x >= 0.0);
        CHECK(p.x < 5.0);
        CHECK(p.y == std::floor(p.y));
        CHECK(p.y >= 0.0);
        CHECK(p.y < 5.0);
        CHECK(side->masses()[i] > 0.0);
        CHECK(seen.insert({p.x, p.y}).second);
      }
    }
  }
}

TEST_CASE("self-check passes and covers the three advertised items") {
  const SelfCheckReport report = run_selfcheck(42, 25, 10);
  REQUIRE(report.items.size() == 3);
  CHECK(report.items[0].name == "golden-instance");
  CHECK(report.items[1].name == "oracle-agreement");
  CHECK(report.items[2].name == "metric-axioms");
  for (const auto& item : report.items) {
    INFO(item.name, ": ", item.detail);
    CHECK(item.passed);
  }
  CHECK(report.all_passed());
}

TEST_CASE("self-check is deterministic for a fixed seed") {
  const SelfCheckReport a = run_selfcheck(11, 5, 5);
  const SelfCheckReport b = run_selfcheck(11, 5, 5);
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].passed == b.items[i].passed);
    CHECK(a.items[i].detail == b.items[i].detail);
  }
}
