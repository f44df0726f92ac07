#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "mkot/distances.hpp"
#include "mkot/image.hpp"

namespace mkot {

struct EmptyTrainingSet : Error {
  using Error::Error;
};
struct EmptyTestSet : Error {
  using Error::Error;
};

// 28x28 grayscale image with its class and the index it had in the dataset
// it was drawn from.
struct LabeledImage {
  Image pixels;
  int label = 0;
  std::int64_t source_index = -1;
};

struct Prediction {
  int predicted = -1;
  std::int64_t neighbour = -1;  // source_index of the winning training item
  double distance = 0.0;
};

using DistanceFn = std::function<double(const LabeledImage&, const LabeledImage&)>;

// Distances equal within this are ties, broken by smallest source_index.
inline constexpr double kTieTol = 1e-12;

// k-NN vote over precomputed distances; distances[i] pairs with train[i].
// k = 1 picks the argmin; k > 1 majority-votes, ties broken by smallest
// summed distance, then smallest source_index.
Prediction classify(std::span<const double> distances, std::span<const LabeledImage> train,
                    int k = 1);
Prediction classify(const LabeledImage& test, std::span<const LabeledImage> train,
                    const DistanceFn& metric, int k = 1);

// Fraction of test items whose prediction matches their label.
double accuracy(std::span<const LabeledImage> tests, std::span<const LabeledImage> train,
                const DistanceFn& metric, int k = 1);

// Plain (uncached) metric over labeled images.
DistanceFn make_metric(DistanceKind kind, const SolverOptions& solver = {},
                       const TangentConfig& tangent = {});

}  // namespace mkot
