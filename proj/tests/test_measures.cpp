#include <limits>

#include "doctest.h"
#include "mkot/measures.hpp"
#include "mkot/transport.hpp"

using namespace mkot;

TEST_CASE("discrete measure sums masses left to right") {
  DiscreteMeasure m({{0, 0}, {1, 0}, {2, 2}}, {0.25, 0.5, 0.125});
  CHECK(m.size() == 3);
  CHECK(m.total_mass() == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(m.points()[1] == GridPoint{1, 0});
  CHECK(m.masses()[2] == 0.125);
}

TEST_CASE("discrete measure rejects malformed support") {
  CHECK_THROWS_AS(DiscreteMeasure({}, {}), Error);
  CHECK_THROWS_AS(DiscreteMeasure({{0, 0}}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(DiscreteMeasure({{0, 0}}, {-0.1}), Error);
  CHECK_THROWS_AS(DiscreteMeasure({{0, 0}}, {std::numeric_limits<double>::quiet_NaN()}), Error);
  CHECK_THROWS_AS(DiscreteMeasure({{0, 0}, {0, 0}}, {0.5, 0.5}), Error);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(DiscreteMeasure({{inf, 0}}, {0.5}), Error);
}

TEST_CASE("measure_from_image keeps bright pixels at (x=col, y=row)") {
  const Image img = Image::from_rows({{0.0, 0.5}, {0.25, 0.0}});
  const DiscreteMeasure m = measure_from_image(img);
  REQUIRE(m.size() == 2);
  CHECK(m.points()[0] == GridPoint{1, 0});
  CHECK(m.masses()[0] == 0.5);
  CHECK(m.points()[1] == GridPoint{0, 1});
  CHECK(m.masses()[1] == 0.25);
}

TEST_CASE("measure_from_image worked example and uniform image") {
  const DiscreteMeasure m = measure_from_image(Image::from_rows({{0, 1}, {2, 0}}));
  REQUIRE(m.size() == 2);
  CHECK(m.points()[0] == GridPoint{1, 0});
  CHECK(m.masses()[0] == 1.0);
  CHECK(m.points()[1] == GridPoint{0, 1});
  CHECK(m.masses()[1] == 2.0);

  const DiscreteMeasure uniform = measure_from_image(Image(28, 28, 1.0));
  CHECK(uniform.size() == 784);
  for (double mass : uniform.masses()) CHECK(mass == 1.0);
  CHECK(uniform.total_mass() == 784.0);
}

TEST_CASE("measure_from_image honours min_mass and rejects blank images") {
  const Image img = Image::from_rows({{0.1, 0.6}, {0.2, 0.0}});
  CHECK(measure_from_image(img, 0.15).size() == 2);
  CHECK(measure_from_image(img, 0.2).size() == 1);
  CHECK_THROWS_AS(measure_from_image(Image(3, 3, 0.0)), AllZeroImage);
  CHECK_THROWS_AS(measure_from_image(img, 0.7), AllZeroImage);
}

TEST_CASE("normalize scales to unit total") {
  DiscreteMeasure m({{0, 0}, {3, 4}}, {1.0, 3.0});
  const DiscreteMeasure n = normalize(m);
  CHECK(n.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.masses()[0] == doctest::Approx(0.25));
  CHECK(n.masses()[1] == doctest::Approx(0.75));
  CHECK(n.points() == m.points());

  CHECK_THROWS_AS(normalize(DiscreteMeasure({{0, 0}}, {0.0})), ZeroTotalMass);
}

TEST_CASE("normalize is idempotent") {
  const DiscreteMeasure m({{0, 0}, {3, 4}, {1, 2}}, {0.2, 0.5, 0.3});
  const DiscreteMeasure once = normalize(m);
  const DiscreteMeasure twice = normalize(once);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(twice.masses()[i] == doctest::Approx(once.masses()[i]).epsilon(1e-12));
  }
}

TEST_CASE("balanced pair enforces the relative balance tolerance") {
  const DiscreteMeasure a({{0, 0}}, {1.0});
  CHECK_NOTHROW(BalancedPair::from_equal_totals(a, DiscreteMeasure({{1, 1}}, {1.0 + 5e-10})));
  CHECK_THROWS_AS(BalancedPair::from_equal_totals(a, DiscreteMeasure({{1, 1}}, {1.0 + 2e-9})),
                  UnbalancedProblem);
  CHECK_THROWS_AS(BalancedPair::from_equal_totals(a, DiscreteMeasure({{1, 1}}, {2.0})),
                  UnbalancedProblem);
}

TEST_CASE("make_balanced_pair normalizes both sides") {
  const DiscreteMeasure a({{0, 0}, {1, 0}}, {2.0, 6.0});
  const DiscreteMeasure b({{5, 5}}, {3.0});
  const BalancedPair pair = make_balanced_pair(a, b);
  CHECK(pair.source.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pair.target.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pair.source.masses()[1] == doctest::Approx(0.75));
}
