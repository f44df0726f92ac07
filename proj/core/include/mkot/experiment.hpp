#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mkot/distances.hpp"
#include "mkot/mnist_io.hpp"

namespace mkot {

struct ExperimentConfig {
  std::string train_images, train_labels;
  std::string test_images, test_labels;
  std::uint64_t seed = 1;
  std::vector<DistanceKind> distances = {DistanceKind::Euclidean, DistanceKind::Tangent,
                                         DistanceKind::Kantorovich};
  std::vector<int> training_sizes = {1, 5, 10, 15, 21};
  int num_training_sets = 20;
  int test_per_digit = 20;
  SolverOptions solver;
  TangentConfig tangent;
  std::string out_dir = "out";
  int workers = 0;  // 0: hardware concurrency

  void validate() const;  // throws Error on out-of-range values
};

// Flat `key = value` config file, '#' comments. Unknown keys are an error.
ExperimentConfig load_config(const std::filesystem::path& path);

struct AccuracyRecord {
  DistanceKind distance{};
  int training_size = 0;
  int set_index = 0;
  double accuracy = 0.0;
};

struct SummaryRow {
  DistanceKind distance{};
  int training_size = 0;
  double mean_accuracy = 0.0;
  double std_dev = 0.0;  // population, over set_index
};

// Per-solve statistics for the Kantorovich pairs; other metrics produce none.
struct SolveDiagnostic {
  int set_index = 0;
  std::int64_t test_source = 0;
  std::int64_t train_source = 0;
  std::uint32_t iterations = 0;
  SolveStatus status = SolveStatus::Optimal;
  double marginal_residual = 0.0;
  double slackness_residual = 0.0;
  double duality_gap = 0.0;
};

struct ExperimentResult {
  std::vector<AccuracyRecord> records;  // sorted (distance, size, set)
  std::vector<SummaryRow> summary;
  std::vector<SolveDiagnostic> diagnostics;
};

// Mean and population standard deviation per (distance, training_size).
std::vector<SummaryRow> summarize(const std::vector<AccuracyRecord>& records);

// Runs 1-NN over every configured distance, training size and training set.
// Distances from a test image to a training set are computed once and reused
// across the nested training sizes. The task grid is distributed over a
// worker pool; outputs are deterministic for a fixed seed regardless of
// worker count. `progress`, when given, receives human-readable updates.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProtocolSets& sets,
                                std::ostream* progress = nullptr);
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

// Writes records.csv, summary.csv, table1.txt, curves.csv and
// diagnostics.csv under out_dir (created if needed).
void emit_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir);

}  // namespace mkot
