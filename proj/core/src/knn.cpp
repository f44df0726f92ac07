#include "mkot/knn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

namespace mkot {

namespace {

Prediction nearest_neighbour(std::span<const double> distances,
                             std::span<const LabeledImage> train) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < train.size(); ++i) {
    if (distances[i] < distances[best] - kTieTol) {
      best = i;
    } else if (std::abs(distances[i] - distances[best]) <= kTieTol &&
               train[i].source_index < train[best].source_index) {
      best = i;
    }
  }
  return {train[best].label, train[best].source_index, distances[best]};
}

Prediction vote(std::span<const double> distances, std::span<const LabeledImage> train,
                std::size_t k) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (distances[a] != distances[b]) return distances[a] < distances[b];
                      return train[a].source_index < train[b].source_index;
                    });

  struct Tally {
    int count = 0;
    double distance_sum = 0.0;
    std::size_t nearest = 0;  // index into order of the closest member
  };
  std::map<int, Tally> tallies;
  for (std::size_t rank = 0; rank < k; ++rank) {
    const std::size_t idx = order[rank];
    Tally& tally = tallies[train[idx].label];
    if (tally.count == 0) tally.nearest = rank;
    ++tally.count;
    tally.distance_sum += distances[idx];
  }

  const Tally* best = nullptr;
  for (const auto& [label, tally] : tallies) {
    if (best == nullptr) {
      best = &tally;
      continue;
    }
    if (tally.count != best->count) {
      if (tally.count > best->count) best = &tally;
    } else if (tally.distance_sum != best->distance_sum) {
      if (tally.distance_sum < best->distance_sum) best = &tally;
    } else if (train[order[tally.nearest]].source_index <
               train[order[best->nearest]].source_index) {
      best = &tally;
    }
  }
  const std::size_t winner = order[best->nearest];
  return {train[winner].label, train[winner].source_index, distances[winner]};
}

}  // namespace

Prediction classify(std::span<const double> distances, std::span<const LabeledImage> train,
                    int k) {
  if (train.empty()) throw EmptyTrainingSet("classify: no training images");
  if (distances.size() != train.size()) {
    throw LengthMismatch("classify: one distance per training image required");
  }
  if (k <= 1 || train.size() == 1) return nearest_neighbour(distances, train);
  return vote(distances, train, std::min<std::size_t>(k, train.size()));
}

Prediction classify(const LabeledImage& test, std::span<const LabeledImage> train,
                    const DistanceFn& metric, int k) {
  if (train.empty()) throw EmptyTrainingSet("classify: no training images");
  std::vector<double> distances(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) distances[i] = metric(test, train[i]);
  return classify(distances, train, k);
}

double accuracy(std::span<const LabeledImage> tests, std::span<const LabeledImage> train,
                const DistanceFn& metric, int k) {
  if (tests.empty()) throw EmptyTestSet("accuracy: no test images");
  std::size_t correct = 0;
  for (const LabeledImage& test : tests) {
    if (classify(test, train, metric, k).predicted == test.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(tests.size());
}

DistanceFn make_metric(DistanceKind kind, const SolverOptions& solver,
                       const TangentConfig& tangent) {
  switch (kind) {
    case DistanceKind::Euclidean:
      return [](const LabeledImage& a, const LabeledImage& b) {
        return euclidean(a.pixels.pixels(), b.pixels.pixels()).value;
      };
    case DistanceKind::Tangent:
      return [tangent](const LabeledImage& a, const LabeledImage& b) {
        return tangent_distance(a.pixels, b.pixels, tangent).value;
      };
    case DistanceKind::Kantorovich:
      return [solver](const LabeledImage& a, const LabeledImage& b) {
        return kantorovich(a.pixels, b.pixels, solver).value;
      };
  }
  throw Error("make_metric: unknown distance kind");
}

}  // namespace mkot
