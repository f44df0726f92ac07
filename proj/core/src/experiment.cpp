#include "mkot/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

namespace mkot {

namespace {

std::string trim(const std::string& s) {
  const std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream stream(value);
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long parsed = 0;
  try {
    parsed = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw Error("config: bad integer for " + key + ": '" + value + "'");
  }
  if (used != value.size()) {
    throw Error("config: bad integer for " + key + ": '" + value + "'");
  }
  return parsed;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &used);
  } catch (const std::exception&) {
    throw Error("config: bad number for " + key + ": '" + value + "'");
  }
  if (used != value.size()) {
    throw Error("config: bad number for " + key + ": '" + value + "'");
  }
  return parsed;
}

TangentTransform transform_from_string(const std::string& name) {
  if (name == "translate_x") return TangentTransform::TranslateX;
  if (name == "translate_y") return TangentTransform::TranslateY;
  if (name == "rotate") return TangentTransform::Rotate;
  if (name == "scale") return TangentTransform::Scale;
  if (name == "shear_diag") return TangentTransform::ShearDiag;
  if (name == "shear_axis") return TangentTransform::ShearAxis;
  if (name == "thicken") return TangentTransform::Thicken;
  throw Error("config: unknown transformation '" + name + "'");
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

const char* status_name(SolveStatus status) {
  return status == SolveStatus::Optimal ? "optimal" : "iteration_limit";
}

// Marginal, slackness and duality-gap residuals of a solved plan; cheap
// enough (linear in the support sizes) to record for every solve.
void plan_residuals(const TransportPlan& plan, const CostMatrix& cost,
                    std::span<const double> supplies, std::span<const double> demands,
                    SolveDiagnostic& diag) {
  std::vector<double> row_sum(supplies.size(), 0.0), col_sum(demands.size(), 0.0);
  double slackness = 0.0;
  for (const FlowEntry& f : plan.flows) {
    row_sum[f.from] += f.mass;
    col_sum[f.to] += f.mass;
    slackness = std::max(
        slackness, std::abs(cost(f.from, f.to) - plan.duals_u[f.from] - plan.duals_v[f.to]));
  }
  double marginal = 0.0;
  for (std::size_t i = 0; i < supplies.size(); ++i) {
    marginal = std::max(marginal, std::abs(row_sum[i] - supplies[i]));
  }
  for (std::size_t j = 0; j < demands.size(); ++j) {
    marginal = std::max(marginal, std::abs(col_sum[j] - demands[j]));
  }
  double dual_objective = 0.0;
  for (std::size_t i = 0; i < supplies.size(); ++i) {
    dual_objective += plan.duals_u[i] * supplies[i];
  }
  for (std::size_t j = 0; j < demands.size(); ++j) {
    dual_objective += plan.duals_v[j] * demands[j];
  }
  diag.marginal_residual = marginal;
  diag.slackness_residual = slackness;
  diag.duality_gap = std::abs(plan.objective - dual_objective);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (train_images.empty() || train_labels.empty() || test_images.empty() || test_labels.empty()) {
    throw Error("config: dataset paths are required (set them or mnist_dir)");
  }
  if (distances.empty()) throw Error("config: at least one distance is required");
  for (std::size_t i = 0; i < distances.size(); ++i) {
    for (std::size_t j = i + 1; j < distances.size(); ++j) {
      if (distances[i] == distances[j]) throw Error("config: duplicate distance");
    }
  }
  if (training_sizes.empty()) throw Error("config: at least one training size is required");
  for (std::size_t i = 0; i < training_sizes.size(); ++i) {
    if (training_sizes[i] < 1 || training_sizes[i] > kSamplesPerDigit) {
      throw Error("config: training sizes must lie in [1, 21]");
    }
    if (i > 0 && training_sizes[i] <= training_sizes[i - 1]) {
      throw Error("config: training sizes must be strictly increasing");
    }
  }
  if (num_training_sets < 1 || num_training_sets > kMaxTrainingSets) {
    throw Error("config: num_training_sets must lie in [1, 20]");
  }
  if (test_per_digit < 1 || test_per_digit > kMaxTestPerDigit) {
    throw Error("config: test_per_digit must lie in [1, 20]");
  }
  if (workers < 0) throw Error("config: workers must be >= 0");
  if (solver.dual_tol <= 0.0 || solver.marginal_tol <= 0.0) {
    throw Error("config: solver tolerances must be positive");
  }
  if (solver.max_iterations && *solver.max_iterations < 1) {
    throw Error("config: solver.max_iterations must be >= 1");
  }
  if (tangent.smoothing_sigma < 0.0) throw Error("config: smoothing sigma must be >= 0");
  if (tangent.regularization && *tangent.regularization < 0.0) {
    throw Error("config: tangent regularization must be >= 0");
  }
  if (tangent.transformations.empty()) {
    throw Error("config: at least one tangent transformation is required");
  }
  if (out_dir.empty()) throw Error("config: out_dir is required");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw Error("cannot open config file " + path.string());

  ExperimentConfig cfg;
  std::string line;
  int line_number = 0;
  while (std::getline(file, line)) {
    ++line_number;
    if (const std::size_t hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config: expected key = value at line " + std::to_string(line_number));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error("config: empty key or value at line " + std::to_string(line_number));
    }

    if (key == "train_images") {
      cfg.train_images = value;
    } else if (key == "train_labels") {
      cfg.train_labels = value;
    } else if (key == "test_images") {
      cfg.test_images = value;
    } else if (key == "test_labels") {
      cfg.test_labels = value;
    } else if (key == "mnist_dir") {
      cfg.train_images = resolve_idx_file(value, "train-images-idx3-ubyte").string();
      cfg.train_labels = resolve_idx_file(value, "train-labels-idx1-ubyte").string();
      cfg.test_images = resolve_idx_file(value, "t10k-images-idx3-ubyte").string();
      cfg.test_labels = resolve_idx_file(value, "t10k-labels-idx1-ubyte").string();
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "distances") {
      cfg.distances.clear();
      for (const std::string& name : split_list(value)) {
        const auto kind = distance_kind_from_string(name);
        if (!kind) throw Error("config: unknown distance '" + name + "'");
        cfg.distances.push_back(*kind);
      }
    } else if (key == "training_sizes") {
      cfg.training_sizes.clear();
      for (const std::string& item : split_list(value)) {
        cfg.training_sizes.push_back(static_cast<int>(parse_int(key, item)));
      }
    } else if (key == "num_training_sets") {
      cfg.num_training_sets = static_cast<int>(parse_int(key, value));
    } else if (key == "test_per_digit") {
      cfg.test_per_digit = static_cast<int>(parse_int(key, value));
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(parse_int(key, value));
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "solver.pivot_rule") {
      if (value == "most_negative") {
        cfg.solver.pivot_rule = PivotRule::MostNegative;
      } else if (value == "bland") {
        cfg.solver.pivot_rule = PivotRule::Bland;
      } else {
        throw Error("config: unknown pivot rule '" + value + "'");
      }
    } else if (key == "solver.max_iterations") {
      cfg.solver.max_iterations = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "solver.dual_tol") {
      cfg.solver.dual_tol = parse_real(key, value);
    } else if (key == "solver.marginal_tol") {
      cfg.solver.marginal_tol = parse_real(key, value);
    } else if (key == "tangent.smoothing_sigma") {
      cfg.tangent.smoothing_sigma = parse_real(key, value);
    } else if (key == "tangent.regularization") {
      cfg.tangent.regularization = parse_real(key, value);
    } else if (key == "tangent.transformations") {
      cfg.tangent.transformations.clear();
      for (const std::string& name : split_list(value)) {
        cfg.tangent.transformations.push_back(transform_from_string(name));
      }
    } else {
      throw Error("config: unknown key '" + key + "' at line " + std::to_string(line_number));
    }
  }
  return cfg;
}

std::vector<SummaryRow> summarize(const std::vector<AccuracyRecord>& records) {
  std::map<std::pair<int, int>, std::vector<double>> groups;
  for (const AccuracyRecord& record : records) {
    groups[{static_cast<int>(record.distance), record.training_size}].push_back(record.accuracy);
  }
  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, values] : groups) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double variance = 0.0;
    for (double v : values) variance += (v - mean) * (v - mean);
    variance /= static_cast<double>(values.size());
    rows.push_back({static_cast<DistanceKind>(key.first), key.second, mean, std::sqrt(variance)});
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProtocolSets& sets,
                                std::ostream* progress) {
  cfg.validate();
  const std::size_t num_sets = sets.training_sets.size();
  const std::size_t num_tests = sets.test_set.size();
  if (num_sets == 0 || num_tests == 0) {
    throw Error("run_experiment: empty training or test sets");
  }
  const int max_size = cfg.training_sizes.back();
  const std::size_t prefix = static_cast<std::size_t>(max_size) * kDigitClasses;
  for (const auto& set : sets.training_sets) {
    if (set.size() < prefix) {
      throw Error("run_experiment: training set smaller than largest configured size");
    }
  }

  const std::size_t num_sizes = cfg.training_sizes.size();
  const std::size_t tasks_per_kind = num_sets * num_tests;
  const std::size_t total_tasks = cfg.distances.size() * tasks_per_kind;
  std::vector<std::uint8_t> correct(total_tasks * num_sizes, 0);

  const bool wants_kantorovich =
      std::find(cfg.distances.begin(), cfg.distances.end(), DistanceKind::Kantorovich) !=
      cfg.distances.end();
  std::vector<SolveDiagnostic> diagnostics;
  if (wants_kantorovich) diagnostics.resize(tasks_per_kind * prefix);

  // Tasks are claimed from an atomic counter and write to disjoint slots, so
  // the result does not depend on how many workers run them.
  std::atomic<std::size_t> next_task{0};
  std::atomic<std::size_t> done_tasks{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::mutex progress_mutex;
  const std::size_t report_every = std::max<std::size_t>(1, total_tasks / 40);

  auto run_task = [&](std::size_t task) {
    const std::size_t kind_index = task / tasks_per_kind;
    const std::size_t rest = task % tasks_per_kind;
    const std::size_t set_index = rest / num_tests;
    const std::size_t test_index = rest % num_tests;
    const DistanceKind kind = cfg.distances[kind_index];
    const LabeledImage& test = sets.test_set[test_index];
    const std::span<const LabeledImage> train(sets.training_sets[set_index].data(), prefix);

    std::vector<double> distances(prefix);
    switch (kind) {
      case DistanceKind::Euclidean:
        for (std::size_t j = 0; j < prefix; ++j) {
          distances[j] = euclidean(test.pixels.pixels(), train[j].pixels.pixels()).value;
        }
        break;
      case DistanceKind::Tangent: {
        const TangentBasis basis(test.pixels, cfg.tangent);
        for (std::size_t j = 0; j < prefix; ++j) {
          distances[j] = basis.distance_to(train[j].pixels);
        }
        break;
      }
      case DistanceKind::Kantorovich: {
        const DiscreteMeasure test_measure = normalize(measure_from_image(test.pixels));
        for (std::size_t j = 0; j < prefix; ++j) {
          const DiscreteMeasure train_measure = normalize(measure_from_image(train[j].pixels));
          const BalancedPair pair = BalancedPair::from_equal_totals(test_measure, train_measure);
          const CostMatrix cost = build_cost_matrix(pair);
          const TransportPlan plan =
              solve_transport(cost, pair.source.masses(), pair.target.masses(), cfg.solver);
          distances[j] = plan.objective;
          SolveDiagnostic& diag = diagnostics[rest * prefix + j];
          diag.set_index = static_cast<int>(set_index);
          diag.test_source = test.source_index;
          diag.train_source = train[j].source_index;
          diag.iterations = static_cast<std::uint32_t>(plan.iterations);
          diag.status = plan.status;
          plan_residuals(plan, cost, pair.source.masses(), pair.target.masses(), diag);
        }
        break;
      }
    }

    for (std::size_t size_index = 0; size_index < num_sizes; ++size_index) {
      const std::size_t count = static_cast<std::size_t>(cfg.training_sizes[size_index]) *
                                kDigitClasses;
      const Prediction prediction =
          classify(std::span<const double>(distances.data(), count), train.subspan(0, count));
      correct[task * num_sizes + size_index] =
          prediction.predicted == test.label ? 1 : 0;
    }
  };

  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t task = next_task.fetch_add(1, std::memory_order_relaxed);
      if (task >= total_tasks) return;
      try {
        run_task(task);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
      const std::size_t done = done_tasks.fetch_add(1, std::memory_order_relaxed) + 1;
      if (progress != nullptr && (done % report_every == 0 || done == total_tasks)) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        *progress << "  " << done << "/" << total_tasks << " tasks\n" << std::flush;
      }
    }
  };

  std::size_t worker_count = cfg.workers > 0
                                 ? static_cast<std::size_t>(cfg.workers)
                                 : std::max(1u, std::thread::hardware_concurrency());
  worker_count = std::min(worker_count, total_tasks);
  std::vector<std::thread> threads;
  threads.reserve(worker_count);
  for (std::size_t w = 0; w < worker_count; ++w) threads.emplace_back(worker);
  for (std::thread& thread : threads) thread.join();
  if (failed.load()) std::rethrow_exception(first_error);

  std::vector<DistanceKind> ordered_kinds = cfg.distances;
  std::sort(ordered_kinds.begin(), ordered_kinds.end(),
            [](DistanceKind a, DistanceKind b) { return static_cast<int>(a) < static_cast<int>(b); });

  ExperimentResult result;
  result.records.reserve(ordered_kinds.size() * num_sizes * num_sets);
  for (DistanceKind kind : ordered_kinds) {
    const std::size_t kind_index = static_cast<std::size_t>(
        std::find(cfg.distances.begin(), cfg.distances.end(), kind) - cfg.distances.begin());
    for (std::size_t size_index = 0; size_index < num_sizes; ++size_index) {
      for (std::size_t set_index = 0; set_index < num_sets; ++set_index) {
        std::size_t hits = 0;
        for (std::size_t test_index = 0; test_index < num_tests; ++test_index) {
          const std::size_t task =
              kind_index * tasks_per_kind + set_index * num_tests + test_index;
          hits += correct[task * num_sizes + size_index];
        }
        result.records.push_back({kind, cfg.training_sizes[size_index],
                                  static_cast<int>(set_index),
                                  static_cast<double>(hits) / static_cast<double>(num_tests)});
      }
    }
  }
  result.summary = summarize(result.records);
  result.diagnostics = std::move(diagnostics);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  cfg.validate();
  if (progress != nullptr) *progress << "loading datasets\n" << std::flush;
  const RawDataset train = load_raw_dataset(cfg.train_images, cfg.train_labels);
  const RawDataset test = load_raw_dataset(cfg.test_images, cfg.test_labels);
  if (progress != nullptr) *progress << "sampling protocol sets\n" << std::flush;
  const ProtocolSets sets =
      build_protocol_sets(train, test, cfg.seed, cfg.num_training_sets, cfg.test_per_digit);
  return run_experiment(cfg, sets, progress);
}

void emit_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream file(out_dir / name);
    if (!file) throw Error(std::string("cannot write ") + name + " under " + out_dir.string());
    return file;
  };

  {
    std::ofstream file = open("records.csv");
    file << "distance,training_size,set_index,accuracy\n";
    for (const AccuracyRecord& r : result.records) {
      file << to_string(r.distance) << ',' << r.training_size << ',' << r.set_index << ','
           << format_double(r.accuracy) << '\n';
    }
  }
  {
    std::ofstream file = open("summary.csv");
    file << "distance,training_size,mean_accuracy,std_dev\n";
    for (const SummaryRow& row : result.summary) {
      file << to_string(row.distance) << ',' << row.training_size << ','
           << format_double(row.mean_accuracy) << ',' << format_double(row.std_dev) << '\n';
    }
  }
  {
    std::ofstream file = open("curves.csv");
    file << "distance,training_size,mean_accuracy,lower,upper\n";
    for (const SummaryRow& row : result.summary) {
      file << to_string(row.distance) << ',' << row.training_size << ','
           << format_double(row.mean_accuracy) << ','
           << format_double(row.mean_accuracy - row.std_dev) << ','
           << format_double(row.mean_accuracy + row.std_dev) << '\n';
    }
  }
  {
    const std::vector<int> table_sizes = {1, 5, 10, 15, 21};
    std::vector<int> present_sizes;
    for (int size : table_sizes) {
      for (const SummaryRow& row : result.summary) {
        if (row.training_size == size) {
          present_sizes.push_back(size);
          break;
        }
      }
    }
    std::ofstream file = open("table1.txt");
    file << "1-NN accuracy (%), mean over training sets\n\n";
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%-12s", "distance");
    file << buffer;
    for (int size : present_sizes) {
      std::snprintf(buffer, sizeof buffer, "%7d", size);
      file << buffer;
    }
    file << '\n';
    for (DistanceKind kind :
         {DistanceKind::Euclidean, DistanceKind::Tangent, DistanceKind::Kantorovich}) {
      bool any = false;
      for (const SummaryRow& row : result.summary) any = any || row.distance == kind;
      if (!any) continue;
      std::snprintf(buffer, sizeof buffer, "%-12s", to_string(kind).c_str());
      file << buffer;
      for (int size : present_sizes) {
        bool written = false;
        for (const SummaryRow& row : result.summary) {
          if (row.distance == kind && row.training_size == size) {
            std::snprintf(buffer, sizeof buffer, "%7.1f", 100.0 * row.mean_accuracy);
            file << buffer;
            written = true;
            break;
          }
        }
        if (!written) file << "      -";
      }
      file << '\n';
    }
  }
  {
    std::ofstream file = open("diagnostics.csv");
    file << "set_index,test_source,train_source,iterations,status,"
            "marginal_residual,slackness_residual,duality_gap\n";
    for (const SolveDiagnostic& d : result.diagnostics) {
      file << d.set_index << ',' << d.test_source << ',' << d.train_source << ',' << d.iterations
           << ',' << status_name(d.status) << ',' << format_double(d.marginal_residual) << ','
           << format_double(d.slackness_residual) << ',' << format_double(d.duality_gap) << '\n';
    }
  }
}

}  // namespace mkot
