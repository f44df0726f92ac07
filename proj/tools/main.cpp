#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mkot/experiment.hpp"
#include "mkot/mnist_io.hpp"
#include "mkot/selfcheck.hpp"
#include "pgm.hpp"

namespace {

// Exit codes: 0 success, 1 usage, 2 data or runtime failure, 3 failed
// verification.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerification = 3;

bool has_suffix(const std::string& text, const std::string& suffix) {
  if (text.size() < suffix.size()) return false;
  std::string tail = text.substr(text.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tail == suffix;
}

// PGM by extension, IDX otherwise (possibly gzipped; `index` selects the
// image). Normalization scales the image to unit pixel sum.
mkot::Image load_image(const std::string& path, int index, bool normalize) {
  mkot::Image img;
  if (has_suffix(path, ".pgm")) {
    img = mkot::tools::read_pgm(path);
  } else {
    const mkot::IdxImages images = mkot::read_idx_images(path);
    if (index < 0 || static_cast<std::uint32_t>(index) >= images.count) {
      throw mkot::Error("image index " + std::to_string(index) + " out of range for " + path);
    }
    img = mkot::Image(static_cast<int>(images.rows), static_cast<int>(images.cols));
    const auto raw = images.image(static_cast<std::size_t>(index));
    for (std::size_t i = 0; i < raw.size(); ++i) {
      img.pixels()[i] = static_cast<double>(raw[i]) / 255.0;
    }
  }
  if (normalize) {
    const double sum = img.pixel_sum();
    if (!(sum > 0.0)) throw mkot::AllZeroImage("image has no ink, cannot normalize: " + path);
    for (double& v : img.pixels()) v /= sum;
  }
  return img;
}

void print_value(double value) {
  std::printf("%.12g\n", value);
}

int run_experiment_command(const std::string& config_path,
                           const std::optional<std::uint64_t>& seed,
                           const std::optional<int>& workers,
                           const std::optional<std::string>& out_dir) {
  mkot::ExperimentConfig cfg = mkot::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  if (out_dir) cfg.out_dir = *out_dir;
  cfg.validate();

  const mkot::ExperimentResult result = mkot::run_experiment(cfg, &std::cerr);
  mkot::emit_outputs(result, cfg.out_dir);

  std::ifstream table(std::filesystem::path(cfg.out_dir) / "table1.txt");
  std::cout << table.rdbuf();
  std::cout << "\noutputs written to " << cfg.out_dir << "\n";
  return 0;
}

int run_distance_command(const std::string& metric, const std::string& path_a,
                         const std::string& path_b, int index_a, int index_b, bool no_normalize) {
  const auto kind = mkot::distance_kind_from_string(metric);
  const bool normalize = !no_normalize;
  const mkot::Image a = load_image(path_a, index_a, normalize);
  const mkot::Image b = load_image(path_b, index_b, normalize);
  switch (*kind) {
    case mkot::DistanceKind::Euclidean:
      print_value(mkot::euclidean(a.pixels(), b.pixels()).value);
      break;
    case mkot::DistanceKind::Tangent:
      print_value(mkot::tangent_distance(a, b).value);
      break;
    case mkot::DistanceKind::Kantorovich:
      print_value(normalize ? mkot::kantorovich(a, b).value
                            : mkot::kantorovich_unnormalized(a, b).value);
      break;
  }
  return 0;
}

int run_verify_command(std::uint64_t seed, int instances, int triples) {
  const mkot::SelfCheckReport report = mkot::run_selfcheck(seed, instances, triples);
  for (const auto& item : report.items) {
    std::cout << (item.passed ? "[PASS] " : "[FAIL] ") << item.name << ": " << item.detail << "\n";
  }
  if (!report.all_passed()) {
    std::cout << "verification FAILED\n";
    return kExitVerification;
  }
  std::cout << "verification passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monge-Kantorovich optimal transport distances for images"};
  app.require_subcommand(1);

  auto* experiment = app.add_subcommand("experiment", "1-NN accuracy comparison on MNIST");
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> workers_override;
  std::optional<std::string> out_override;
  experiment->add_option("--config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  experiment->add_option("--seed", seed_override, "override the config seed");
  experiment->add_option("--workers", workers_override, "override the worker count");
  experiment->add_option("--out", out_override, "override the output directory");

  auto* distance = app.add_subcommand("distance", "distance between two images");
  std::string metric;
  std::string path_a, path_b;
  int index_a = 0, index_b = 0;
  bool no_normalize = false;
  distance->add_option("--metric", metric, "euclidean, tangent or kantorovich")
      ->required()
      ->check(CLI::IsMember({"euclidean", "tangent", "kantorovich"}));
  distance->add_option("a", path_a, "first image (.pgm or IDX)")->required();
  distance->add_option("b", path_b, "second image (.pgm or IDX)")->required();
  distance->add_option("--index-a", index_a, "image index when a is an IDX file");
  distance->add_option("--index-b", index_b, "image index when b is an IDX file");
  distance->add_flag("--no-normalize", no_normalize, "skip unit pixel-sum normalization");

  auto* verify = app.add_subcommand("verify", "built-in solver verification");
  std::uint64_t verify_seed = 42;
  int verify_instances = 500;
  int verify_triples = 200;
  verify->add_option("--seed", verify_seed, "random seed");
  verify->add_option("--instances", verify_instances, "oracle comparison instances")
      ->check(CLI::PositiveNumber);
  verify->add_option("--triples", verify_triples, "metric axiom triples")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
    if (experiment->parsed()) {
      return run_experiment_command(config_path, seed_override, workers_override, out_override);
    }
    if (distance->parsed()) {
      return run_distance_command(metric, path_a, path_b, index_a, index_b, no_normalize);
    }
    return run_verify_command(verify_seed, verify_instances, verify_triples);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const mkot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
