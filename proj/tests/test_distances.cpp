#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "mkot/distances.hpp"
#include "mkot/oracle.hpp"
#include "mkot/rng.hpp"

using namespace mkot;

namespace {

Image random_image(rng::Engine& eng, int rows, int cols) {
  Image img(rows, cols);
  for (double& v : img.pixels()) v = rng::unit_real(eng);
  return img;
}

// Smooth ink-like test image: a few Gaussian blobs on a dark background.
Image random_blob_image(rng::Engine& eng, int rows, int cols) {
  Image img(rows, cols);
  const int blobs = 3;
  for (int blob = 0; blob < blobs; ++blob) {
    const double bx = rng::uniform(eng, 2.0, cols - 3.0);
    const double by = rng::uniform(eng, 2.0, rows - 3.0);
    const double amp = rng::uniform(eng, 0.4, 1.0);
    const double width = rng::uniform(eng, 1.0, 2.0);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double d2 = (c - bx) * (c - bx) + (r - by) * (r - by);
        img(r, c) += amp * std::exp(-d2 / (2.0 * width * width));
      }
    }
  }
  return img;
}

// Independent reference for the sum of squares: Kahan-compensated
// accumulation in a fixed order.
double kahan_squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    const double y = d * d - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

// Bilinear interpolation with zero outside the raster; x runs along columns.
double bilinear(const Image& img, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto at = [&](int r, int c) {
    if (r < 0 || r >= img.rows() || c < 0 || c >= img.cols()) return 0.0;
    return img(r, c);
  };
  return (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) +
         fy * ((1 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
}

// Displacement field of each transformation at centered coordinates. The
// thickening direction comes from the same central-difference gradient the
// library uses.
std::pair<double, double> displacement(TangentTransform t, double x, double y, double gx,
                                       double gy) {
  switch (t) {
    case TangentTransform::TranslateX:
      return {1, 0};
    case TangentTransform::TranslateY:
      return {0, 1};
    case TangentTransform::Rotate:
      return {y, -x};
    case TangentTransform::Scale:
      return {x, y};
    case TangentTransform::ShearDiag:
      return {y, x};
    case TangentTransform::ShearAxis:
      return {x, -y};
    case TangentTransform::Thicken: {
      const double norm = std::sqrt(gx * gx + gy * gy);
      if (norm == 0.0) return {0, 0};
      return {gx / norm, gy / norm};
    }
  }
  return {0, 0};
}

}  // namespace

TEST_CASE("euclidean distance against a compensated-summation reference") {
  const std::vector<double> a{0, 0};
  const std::vector<double> b{3, 4};
  CHECK(euclidean(a, b).value == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(euclidean(a, b).kind == DistanceKind::Euclidean);
  CHECK(euclidean(a, a).value == 0.0);
  CHECK_THROWS_AS(euclidean(a, std::vector<double>{1}), LengthMismatch);

  rng::Engine eng(5);
  for (int it = 0; it < 20; ++it) {
    std::vector<double> u(1000), v(1000);
    for (double& x : u) x = rng::uniform(eng, -10.0, 10.0);
    for (double& x : v) x = rng::uniform(eng, -10.0, 10.0);
    const double expected = std::sqrt(kahan_squared_distance(u, v));
    CHECK(euclidean(u, v).value == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("gaussian smoothing: identity at sigma zero, symmetric unit kernel") {
  rng::Engine eng(6);
  const Image img = random_image(eng, 9, 9);
  CHECK(gaussian_smooth(img, 0.0) == img);
  CHECK(gaussian_smooth(img, -1.0) == img);

  Image impulse(15, 15);
  impulse(7, 7) = 1.0;
  const Image smooth = gaussian_smooth(impulse, 1.0);
  // Radius ceil(3 sigma) = 3 keeps the whole response away from the border,
  // so zero padding loses nothing.
  CHECK(smooth.pixel_sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(smooth(7, 7) > smooth(7, 8));
  CHECK(smooth(7, 4) > 0.0);
  CHECK(smooth(7, 3) == 0.0);
  for (int k = 1; k <= 3; ++k) {
    CHECK(smooth(7, 7 + k) == doctest::Approx(smooth(7, 7 - k)).epsilon(1e-12));
    CHECK(smooth(7 + k, 7) == doctest::Approx(smooth(7, 7 + k)).epsilon(1e-12));
  }
}

TEST_CASE("tangent vectors match finite differences of the warped image") {
  rng::Engine eng(7);
  const Image img = random_blob_image(eng, 12, 12);
  TangentConfig cfg;
  const Image smoothed = gaussian_smooth(img, cfg.smoothing_sigma);
  const std::vector<Image> tangents = tangent_vectors(img, cfg);
  REQUIRE(tangents.size() == cfg.transformations.size());

  const double eps = 0.1;
  const double cx = (img.cols() - 1.0) / 2.0;
  const double cy = (img.rows() - 1.0) / 2.0;
  Image gx(img.rows(), img.cols()), gy(img.rows(), img.cols());
  for (int r = 0; r < img.rows(); ++r) {
    for (int c = 0; c < img.cols(); ++c) {
      gx(r, c) = 0.5 * ((c + 1 < img.cols() ? smoothed(r, c + 1) : 0.0) -
                        (c > 0 ? smoothed(r, c - 1) : 0.0));
      gy(r, c) = 0.5 * ((r + 1 < img.rows() ? smoothed(r + 1, c) : 0.0) -
                        (r > 0 ? smoothed(r - 1, c) : 0.0));
    }
  }

  for (std::size_t k = 0; k < tangents.size(); ++k) {
    const TangentTransform transform = cfg.transformations[k];
    double err_sq = 0.0, ref_sq = 0.0;
    double max_abs_err = 0.0;
    for (int r = 0; r < img.rows(); ++r) {
      for (int c = 0; c < img.cols(); ++c) {
        const auto [wx, wy] =
            displacement(transform, c - cx, r - cy, gx(r, c), gy(r, c));
        const double forward = bilinear(smoothed, c + eps * wx, r + eps * wy);
        const double backward = bilinear(smoothed, c - eps * wx, r - eps * wy);
        const double fd = (forward - backward) / (2 * eps);
        const double lib = tangents[k](r, c);
        err_sq += (fd - lib) * (fd - lib);
        ref_sq += fd * fd;
        max_abs_err = std::max(max_abs_err, std::abs(fd - lib));
      }
    }
    INFO("transformation ", static_cast<int>(transform));
    if (transform == TangentTransform::TranslateX || transform == TangentTransform::TranslateY) {
      // Bilinear central differences of axis-aligned shifts are exact.
      CHECK(max_abs_err <= 1e-12);
    } else {
      CHECK(std::sqrt(err_sq) <= 0.05 * std::sqrt(ref_sq));
    }
  }
}

TEST_CASE("geometric tangents vanish where the image is flat") {
  for (const Image& zero : {Image(15, 15, 0.0), Image(4, 9, 0.0)}) {
    for (const Image& tangent : tangent_vectors(zero)) {
      for (double v : tangent.pixels()) CHECK(v == 0.0);
    }
  }

  // A constant image is flat only away from the raster edge: zero padding
  // manufactures gradients in the outer smoothing band.
  const Image flat(15, 15, 0.7);
  for (const Image& tangent : tangent_vectors(flat)) {
    for (int r = 4; r <= 10; ++r) {
      for (int c = 4; c <= 10; ++c) CHECK(std::abs(tangent(r, c)) <= 1e-12);
    }
  }
}

TEST_CASE("rotate tangent of a radially symmetric blob is suppressed") {
  const int n = 21;
  const double center = (n - 1.0) / 2.0;
  const double width = 3.0;
  Image blob(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double d2 = (r - center) * (r - center) + (c - center) * (c - center);
      blob(r, c) = std::exp(-d2 / (2.0 * width * width));
    }
  }
  TangentConfig cfg;
  cfg.transformations = {TangentTransform::Rotate, TangentTransform::Scale};
  const std::vector<Image> tangents = tangent_vectors(blob, cfg);
  const auto norm = [](const Image& img) {
    double sum = 0.0;
    for (double v : img.pixels()) sum += v * v;
    return std::sqrt(sum);
  };
  // Exact rotational symmetry is broken only by the 3-tap discretization,
  // which leaves an O(h^2) residue; the scale tangent is full-strength.
  CHECK(norm(tangents[0]) <= 2e-2 * norm(blob));
  CHECK(norm(tangents[0]) <= 0.1 * norm(tangents[1]));
}

TEST_CASE("tangent distance never exceeds the euclidean distance") {
  rng::Engine eng(8);
  for (int it = 0; it < 25; ++it) {
    const Image a = random_image(eng, 10, 10);
    const Image b = random_image(eng, 10, 10);
    const double tangent = tangent_distance(a, b).value;
    const double plain = euclidean(a.pixels(), b.pixels()).value;
    CHECK(tangent >= 0.0);
    CHECK(tangent <= plain + 1e-12);
  }
}

TEST_CASE("tangent distance edge cases") {
  rng::Engine eng(9);
  const Image a = random_image(eng, 8, 8);

  SUBCASE("self distance vanishes") {
    CHECK(tangent_distance(a, a).value == 0.0);
  }
  SUBCASE("blank reference degenerates to the euclidean value") {
    const Image blank(8, 8, 0.0);
    const double expected = euclidean(blank.pixels(), a.pixels()).value;
    CHECK(tangent_distance(blank, a).value == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("shape mismatch is rejected") {
    CHECK_THROWS_AS(tangent_distance(a, Image(8, 9, 0.0)), ShapeMismatch);
    const TangentBasis basis(a);
    CHECK_THROWS_AS(basis.distance_to(Image(4, 4, 0.0)), ShapeMismatch);
  }
  SUBCASE("duplicate transformations with zero regularization stay finite") {
    TangentConfig cfg;
    cfg.transformations = {TangentTransform::TranslateX, TangentTransform::TranslateX};
    cfg.regularization = 0.0;
    const Image b = random_image(eng, 8, 8);
    const double plain = euclidean(a.pixels(), b.pixels()).value;
    double value = 0.0;
    CHECK_NOTHROW(value = tangent_distance(a, b, cfg).value);
    CHECK(value <= plain + 1e-9);
  }
  SUBCASE("a basis can be moved") {
    TangentBasis basis(a);
    const Image b = random_image(eng, 8, 8);
    const double before = basis.distance_to(b);
    const TangentBasis moved = std::move(basis);
    CHECK(moved.distance_to(b) == before);
  }
}

TEST_CASE("reusing a tangent basis matches one-shot evaluation") {
  rng::Engine eng(10);
  const Image a = random_image(eng, 9, 9);
  const TangentBasis basis(a);
  for (int it = 0; it < 5; ++it) {
    const Image b = random_image(eng, 9, 9);
    CHECK(basis.distance_to(b) == tangent_distance(a, b).value);
  }
}

TEST_CASE("kantorovich distance on hand-checked images") {
  const Image a = Image::from_rows({{1.0, 0.0}});
  const Image b = Image::from_rows({{0.0, 1.0}});
  // One unit of mass moves one pixel: squared cost 1.
  CHECK(kantorovich(a, b).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kantorovich(a, b).kind == DistanceKind::Kantorovich);
  CHECK(kantorovich(a, a).value == doctest::Approx(0.0));

  CHECK(kantorovich_unnormalized(a, b).value == doctest::Approx(1.0).epsilon(1e-12));
  const Image heavier = Image::from_rows({{0.0, 2.0}});
  CHECK_THROWS_AS(kantorovich_unnormalized(a, heavier), UnbalancedProblem);
  // Normalization hides the mass difference.
  CHECK(kantorovich(a, heavier).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kantorovich on the three-point offset images") {
  // Three unit pixels, each moved by (+2,+1): raw cost 3*5, or 5 after the
  // masses are normalized to 1/3 each.
  Image from(7, 7), to(7, 7);
  for (const auto& [r, c] : {std::pair(2, 3), std::pair(1, 1), std::pair(4, 2)}) {
    from(r, c) = 1.0;
    to(r + 1, c + 2) = 1.0;
  }
  CHECK(kantorovich_unnormalized(from, to).value == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(kantorovich(from, to).value == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("kantorovich distance matches the brute-force oracle on small images") {
  rng::Engine eng(12);
  auto random_sparse = [&](int bright) {
    Image img(2, 3);
    std::vector<std::size_t> cells{0, 1, 2, 3, 4, 5};
    rng::shuffle(cells, eng);
    for (int k = 0; k < bright; ++k) {
      img.pixels()[cells[static_cast<std::size_t>(k)]] = rng::uniform(eng, 0.1, 1.0);
    }
    return img;
  };
  for (int it = 0; it < 25; ++it) {
    const Image a = random_sparse(1 + static_cast<int>(rng::bounded(eng, 4)));
    const Image b = random_sparse(1 + static_cast<int>(rng::bounded(eng, 4)));
    const double via_solver = kantorovich(a, b).value;
    const double via_oracle =
        oracle_solve(make_balanced_pair(measure_from_image(a), measure_from_image(b)));
    CHECK(via_solver == doctest::Approx(via_oracle).epsilon(1e-9));
  }
}

TEST_CASE("distance kind names round-trip") {
  for (DistanceKind kind :
       {DistanceKind::Euclidean, DistanceKind::Tangent, DistanceKind::Kantorovich}) {
    const auto parsed = distance_kind_from_string(to_string(kind));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == kind);
  }
  CHECK_FALSE(distance_kind_from_string("manhattan").has_value());
}
