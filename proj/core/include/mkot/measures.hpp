#pragma once

#include <vector>

#include "mkot/error.hpp"
#include "mkot/image.hpp"

namespace mkot {

struct AllZeroImage : Error {
  using Error::Error;
};
struct ZeroTotalMass : Error {
  using Error::Error;
};

// Support point of a discrete measure, in pixel units.
struct GridPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

// A finite sum of weighted point masses on the plane. Masses are
// nonnegative; support points are pairwise distinct; the cached total is
// the masses summed left to right.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<GridPoint> points, std::vector<double> masses);

  const std::vector<GridPoint>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }
  std::size_t size() const { return points_.size(); }
  double total_mass() const { return total_mass_; }

 private:
  std::vector<GridPoint> points_;
  std::vector<double> masses_;
  double total_mass_ = 0.0;
};

// One support point per pixel with intensity > min_mass, at (x=col, y=row),
// carrying the intensity as its mass. Raises AllZeroImage if nothing is kept.
DiscreteMeasure measure_from_image(const Image& img, double min_mass = 0.0);

// Scales masses by 1/total_mass. Raises ZeroTotalMass.
DiscreteMeasure normalize(const DiscreteMeasure& m);

// Source/target pair whose totals agree within a relative 1e-9.
struct BalancedPair {
  static constexpr double kBalanceTol = 1e-9;

  DiscreteMeasure source;
  DiscreteMeasure target;

  // Pair of measures as given; raises UnbalancedProblem (see transport.hpp)
  // if the totals disagree.
  static BalancedPair from_equal_totals(DiscreteMeasure a, DiscreteMeasure b);
};

// Normalizes both measures to total mass 1. Raises ZeroTotalMass.
BalancedPair make_balanced_pair(const DiscreteMeasure& a, const DiscreteMeasure& b);

}  // namespace mkot
