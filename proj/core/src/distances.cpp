#include "mkot/distances.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <utility>

namespace mkot {

std::string to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::Euclidean:
      return "euclidean";
    case DistanceKind::Tangent:
      return "tangent";
    case DistanceKind::Kantorovich:
      return "kantorovich";
  }
  return "unknown";
}

std::optional<DistanceKind> distance_kind_from_string(const std::string& name) {
  if (name == "euclidean") return DistanceKind::Euclidean;
  if (name == "tangent") return DistanceKind::Tangent;
  if (name == "kantorovich") return DistanceKind::Kantorovich;
  return std::nullopt;
}

std::vector<TangentTransform> all_tangent_transforms() {
  return {TangentTransform::TranslateX, TangentTransform::TranslateY, TangentTransform::Rotate,
          TangentTransform::Scale,      TangentTransform::ShearDiag,  TangentTransform::ShearAxis,
          TangentTransform::Thicken};
}

DistanceResult euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("euclidean: input lengths differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return {std::sqrt(sum), DistanceKind::Euclidean};
}

Image gaussian_smooth(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double kernel_sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * (k * k) / (sigma * sigma));
    kernel_sum += kernel[k + radius];
  }
  for (double& w : kernel) w /= kernel_sum;

  const int rows = static_cast<int>(img.rows());
  const int cols = static_cast<int>(img.cols());
  Image horizontal(img.rows(), img.cols());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int cc = c + k;
        if (cc < 0 || cc >= cols) continue;  // zero padding
        acc += kernel[k + radius] * img(r, cc);
      }
      horizontal(r, c) = acc;
    }
  }
  Image out(img.rows(), img.cols());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int rr = r + k;
        if (rr < 0 || rr >= rows) continue;
        acc += kernel[k + radius] * horizontal(rr, c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

namespace {

// d/d(eps) of I(p + eps*w(p)) at eps = 0 is grad(I) . w, with I the smoothed
// image. x runs along columns and y along rows, both measured from the image
// center.
Image tangent_image(const Image& gx, const Image& gy, TangentTransform transform) {
  const int rows = gx.rows();
  const int cols = gx.cols();
  const double cx = (cols - 1.0) / 2.0;
  const double cy = (rows - 1.0) / 2.0;
  Image out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = c - cx;
      const double y = r - cy;
      const double dx = gx(r, c);
      const double dy = gy(r, c);
      double value = 0.0;
      switch (transform) {
        case TangentTransform::TranslateX:
          value = dx;
          break;
        case TangentTransform::TranslateY:
          value = dy;
          break;
        case TangentTransform::Rotate:
          value = y * dx - x * dy;
          break;
        case TangentTransform::Scale:
          value = x * dx + y * dy;
          break;
        case TangentTransform::ShearDiag:
          value = y * dx + x * dy;
          break;
        case TangentTransform::ShearAxis:
          value = x * dx - y * dy;
          break;
        case TangentTransform::Thicken:
          value = std::sqrt(dx * dx + dy * dy);
          break;
      }
      out(r, c) = value;
    }
  }
  return out;
}

}  // namespace

std::vector<Image> tangent_vectors(const Image& img, const TangentConfig& cfg) {
  const Image smoothed = gaussian_smooth(img, cfg.smoothing_sigma);
  const int rows = img.rows();
  const int cols = img.cols();
  Image gx(rows, cols), gy(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double right = c + 1 < cols ? smoothed(r, c + 1) : 0.0;
      const double left = c > 0 ? smoothed(r, c - 1) : 0.0;
      const double below = r + 1 < rows ? smoothed(r + 1, c) : 0.0;
      const double above = r > 0 ? smoothed(r - 1, c) : 0.0;
      gx(r, c) = 0.5 * (right - left);
      gy(r, c) = 0.5 * (below - above);
    }
  }
  std::vector<Image> tangents;
  tangents.reserve(cfg.transformations.size());
  for (TangentTransform transform : cfg.transformations) {
    tangents.push_back(tangent_image(gx, gy, transform));
  }
  return tangents;
}

struct TangentBasis::Impl {
  int rows = 0, cols = 0;
  Eigen::VectorXd reference;
  Eigen::MatrixXd tangents;  // one column per transformation
  Eigen::MatrixXd normal;    // T'T + reg I
  Eigen::LDLT<Eigen::MatrixXd> factorization;
  double regularization = 0.0;
  bool degenerate = false;  // T'T has zero trace, fall back to alpha = 0
};

TangentBasis::TangentBasis(const Image& reference, const TangentConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
  impl_->rows = reference.rows();
  impl_->cols = reference.cols();
  const std::size_t length = static_cast<std::size_t>(reference.rows()) * reference.cols();
  const std::vector<Image> tangents = tangent_vectors(reference, cfg);
  const std::size_t k = tangents.size();

  impl_->reference = Eigen::Map<const Eigen::VectorXd>(reference.pixels().data(), length);
  impl_->tangents.resize(length, k);
  for (std::size_t t = 0; t < k; ++t) {
    impl_->tangents.col(t) = Eigen::Map<const Eigen::VectorXd>(tangents[t].pixels().data(), length);
  }

  Eigen::MatrixXd normal = impl_->tangents.transpose() * impl_->tangents;
  const double trace = normal.trace();
  if (k == 0 || trace <= 0.0) {
    impl_->degenerate = true;
    return;
  }
  impl_->regularization =
      cfg.regularization.value_or(1e-6 * trace / static_cast<double>(length));
  normal.diagonal().array() += impl_->regularization;
  impl_->normal = std::move(normal);
  impl_->factorization.compute(impl_->normal);
}

TangentBasis::~TangentBasis() = default;
TangentBasis::TangentBasis(TangentBasis&&) noexcept = default;
TangentBasis& TangentBasis::operator=(TangentBasis&&) noexcept = default;

double TangentBasis::distance_to(const Image& b) const {
  if (b.rows() != impl_->rows || b.cols() != impl_->cols) {
    throw ShapeMismatch("tangent distance: image shapes differ");
  }
  const std::size_t length = static_cast<std::size_t>(impl_->rows) * impl_->cols;
  const Eigen::VectorXd residual =
      Eigen::Map<const Eigen::VectorXd>(b.pixels().data(), length) - impl_->reference;
  if (impl_->degenerate) return residual.norm();

  const Eigen::VectorXd rhs = impl_->tangents.transpose() * residual;
  if (rhs.isZero(0.0)) return residual.norm();

  const Eigen::VectorXd alpha = impl_->factorization.solve(rhs);
  if (impl_->regularization == 0.0) {
    const double check = (impl_->normal * alpha - rhs).norm();
    if (!(check <= 1e-8 * (rhs.norm() + impl_->normal.norm() * alpha.norm()))) {
      throw SingularSystem("tangent distance: normal equations are singular");
    }
  }
  return (impl_->tangents * alpha - residual).norm();
}

DistanceResult tangent_distance(const Image& a, const Image& b, const TangentConfig& cfg) {
  return {TangentBasis(a, cfg).distance_to(b), DistanceKind::Tangent};
}

DistanceResult kantorovich(const Image& a, const Image& b, const SolverOptions& opts) {
  const BalancedPair pair = make_balanced_pair(measure_from_image(a), measure_from_image(b));
  return {solve_transport(pair, opts).objective, DistanceKind::Kantorovich};
}

DistanceResult kantorovich_unnormalized(const Image& a, const Image& b,
                                        const SolverOptions& opts) {
  const BalancedPair pair =
      BalancedPair::from_equal_totals(measure_from_image(a), measure_from_image(b));
  return {solve_transport(pair, opts).objective, DistanceKind::Kantorovich};
}

}  // namespace mkot
