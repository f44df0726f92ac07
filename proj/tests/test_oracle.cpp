#include <vector>

#include "doctest.h"
#include "mkot/oracle.hpp"
#include "mkot/selfcheck.hpp"

using namespace mkot;

TEST_CASE("oracle reproduces closed-form one-sided instances") {
  SUBCASE("one cell pays cost times mass") {
    CostMatrix cost(1, 1);
    cost(0, 0) = 7.5;
    CHECK(oracle_solve(cost, std::vector<double>{2}, std::vector<double>{2}) ==
          doctest::Approx(15.0));
  }
  SUBCASE("single supplier pays every demand") {
    CostMatrix cost(1, 4);
    const std::vector<double> supplies{10};
    const std::vector<double> demands{1, 2, 3, 4};
    double expected = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      cost(0, j) = static_cast<double>(j * j + 1);
      expected += cost(0, j) * demands[j];
    }
    CHECK(oracle_solve(cost, supplies, demands) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("single consumer drains every supply") {
    CostMatrix cost(3, 1);
    cost(0, 0) = 2;
    cost(1, 0) = 7;
    cost(2, 0) = 1;
    const std::vector<double> supplies{0.5, 0.25, 0.25};
    const std::vector<double> demands{1.0};
    CHECK(oracle_solve(cost, supplies, demands) ==
          doctest::Approx(2 * 0.5 + 7 * 0.25 + 1 * 0.25).epsilon(1e-12));
  }
}

TEST_CASE("oracle agrees with permutation matching on equal-mass squares") {
  rng::Engine eng(99);
  for (int it = 0; it < 30; ++it) {
    const std::size_t n = 2 + rng::bounded(eng, 3);  // 2..4
    CostMatrix cost(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) cost(i, j) = rng::uniform(eng, 0.0, 10.0);
    }
    const double mass = 1.0 / static_cast<double>(n);
    const std::vector<double> masses(n, mass);
    const double via_bases = oracle_solve(cost, masses, masses);
    const double via_perms = oracle_solve_assignment(cost, mass);
    CHECK(via_bases == doctest::Approx(via_perms).epsilon(1e-9));
  }
}

TEST_CASE("oracle enforces its size caps") {
  CostMatrix big(5, 5);
  const std::vector<double> five(5, 0.2);
  CHECK_THROWS_AS(oracle_solve(big, five, five), TooLarge);

  CostMatrix nine(9, 9);
  CHECK_THROWS_AS(oracle_solve_assignment(nine, 1.0), TooLarge);

  CostMatrix fits(4, 5);
  const std::vector<double> supplies(4, 0.25);
  CHECK_NOTHROW(oracle_solve(fits, supplies, five));
}

TEST_CASE("oracle rejects unbalanced totals and non-square assignments") {
  CostMatrix cost(2, 2);
  CHECK_THROWS_AS(
      oracle_solve(cost, std::vector<double>{1, 1}, std::vector<double>{1, 0.5}),
      UnbalancedProblem);
  CostMatrix rect(2, 3);
  CHECK_THROWS_AS(oracle_solve_assignment(rect, 1.0), Error);
}

TEST_CASE("oracle handles degenerate zero masses") {
  CostMatrix cost(2, 2);
  cost(0, 0) = 3;
  cost(0, 1) = 1;
  cost(1, 0) = 2;
  cost(1, 1) = 4;
  CHECK(oracle_solve(cost, std::vector<double>{1, 0}, std::vector<double>{0, 1}) ==
        doctest::Approx(1.0).epsilon(1e-12));
}
