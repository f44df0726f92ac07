#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mkot/image.hpp"
#include "mkot/transport.hpp"

namespace mkot {

struct LengthMismatch : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct SingularSystem : Error {
  using Error::Error;
};

enum class DistanceKind { Euclidean, Tangent, Kantorovich };

std::string to_string(DistanceKind kind);
std::optional<DistanceKind> distance_kind_from_string(const std::string& name);

struct DistanceResult {
  double value = 0.0;
  DistanceKind kind = DistanceKind::Euclidean;
};

// The classical single-parameter image transformations whose first-order
// fields span the tangent space.
enum class TangentTransform {
  TranslateX,
  TranslateY,
  Rotate,
  Scale,
  ShearDiag,  // displacement field (y, x)
  ShearAxis,  // displacement field (x, -y)
  Thicken,    // displacement along the gradient direction
};

std::vector<TangentTransform> all_tangent_transforms();

struct TangentConfig {
  std::vector<TangentTransform> transformations = all_tangent_transforms();
  double smoothing_sigma = 1.0;
  // Added to the normal-equations diagonal. Unset means the default
  // 1e-6 * trace(T'T) / L, computed per instance.
  std::optional<double> regularization;
};

DistanceResult euclidean(std::span<const double> a, std::span<const double> b);

// Gaussian blur with a truncated kernel (radius ceil(3*sigma)), zero padding
// outside the image.
Image gaussian_smooth(const Image& img, double sigma);

// One tangent image per configured transformation: the derivative of the
// transformed, smoothed image with respect to the transformation parameter,
// at parameter zero. Gradients are 3-tap central differences of the smoothed
// image; rotation/scaling/shear fields are taken about the image center.
std::vector<Image> tangent_vectors(const Image& img, const TangentConfig& cfg = {});

// Precomputed one-sided tangent system for a fixed reference image. Solving
// (T'T + reg I) alpha = T'(b - a) once per probe image b makes repeated
// evaluations cheap.
class TangentBasis {
 public:
  TangentBasis(const Image& reference, const TangentConfig& cfg = {});
  ~TangentBasis();
  TangentBasis(TangentBasis&&) noexcept;
  TangentBasis& operator=(TangentBasis&&) noexcept;

  double distance_to(const Image& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-sided tangent space distance: min over alpha of |a + T alpha - b|, the
// tangent space taken on a.
DistanceResult tangent_distance(const Image& a, const Image& b, const TangentConfig& cfg = {});

// Optimal transport cost between two images seen as discrete measures
// (squared-distance units; the raw objective, not its square root). Both
// images are normalized to unit mass first.
DistanceResult kantorovich(const Image& a, const Image& b, const SolverOptions& opts = {});

// Same, but with the raw pixel masses; the totals must already agree.
DistanceResult kantorovich_unnormalized(const Image& a, const Image& b,
                                        const SolverOptions& opts = {});

}  // namespace mkot
