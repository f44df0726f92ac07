#include "mkot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mkot/transport.hpp"

namespace mkot {

namespace {

void validate_support(const std::vector<GridPoint>& points, const std::vector<double>& masses) {
  if (points.empty() || points.size() != masses.size()) {
    throw Error("discrete measure needs equally many points and masses, at least one of each");
  }
  for (const GridPoint& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error("support point coordinates must be finite");
    }
  }
  for (double m : masses) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw Error("masses must be finite and nonnegative");
    }
  }
  // Distinctness via a sorted index pass.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a].x != points[b].x ? points[a].x < points[b].x : points[a].y < points[b].y;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (points[order[k - 1]] == points[order[k]]) {
      throw Error("support points must be pairwise distinct");
    }
  }
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<GridPoint> points, std::vector<double> masses)
    : points_(std::move(points)), masses_(std::move(masses)) {
  validate_support(points_, masses_);
  for (double m : masses_) total_mass_ += m;
}

DiscreteMeasure measure_from_image(const Image& img, double min_mass) {
  std::vector<GridPoint> points;
  std::vector<double> masses;
  for (int r = 0; r < img.rows(); ++r) {
    for (int c = 0; c < img.cols(); ++c) {
      const double v = img(r, c);
      if (v > min_mass) {
        points.push_back({static_cast<double>(c), static_cast<double>(r)});
        masses.push_back(v);
      }
    }
  }
  if (points.empty()) {
    throw AllZeroImage("no pixel exceeds min_mass");
  }
  return DiscreteMeasure(std::move(points), std::move(masses));
}

DiscreteMeasure normalize(const DiscreteMeasure& m) {
  const double total = m.total_mass();
  if (!(total > 0.0)) {
    throw ZeroTotalMass("cannot normalize a measure with zero total mass");
  }
  std::vector<double> masses = m.masses();
  for (double& w : masses) w /= total;
  return DiscreteMeasure(m.points(), std::move(masses));
}

BalancedPair BalancedPair::from_equal_totals(DiscreteMeasure a, DiscreteMeasure b) {
  const double sa = a.total_mass();
  const double sb = b.total_mass();
  if (std::abs(sa - sb) > kBalanceTol * std::max(sa, 1.0)) {
    throw UnbalancedProblem("source and target totals differ beyond tolerance");
  }
  return BalancedPair{std::move(a), std::move(b)};
}

BalancedPair make_balanced_pair(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return BalancedPair::from_equal_totals(normalize(a), normalize(b));
}

}  // namespace mkot
