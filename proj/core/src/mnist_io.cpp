#include "mkot/mnist_io.hpp"

#include <zlib.h>

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "mkot/measures.hpp"
#include "mkot/rng.hpp"

namespace mkot {

namespace {

constexpr std::uint32_t kMnistRows = 28;
constexpr std::uint32_t kMnistCols = 28;

// gzopen reads plain files unchanged and gzip streams decompressed, so one
// path covers both storage forms.
std::vector<std::uint8_t> read_all_bytes(const std::filesystem::path& path) {
  gzFile file = gzopen(path.string().c_str(), "rb");
  if (file == nullptr) {
    throw Error("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes;
  std::array<std::uint8_t, 1 << 16> chunk;
  for (;;) {
    const int got = gzread(file, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (got < 0) {
      gzclose(file);
      throw TruncatedFile("unreadable stream in " + path.string());
    }
    if (got == 0) break;
    bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + got);
  }
  gzclose(file);
  return bytes;
}

std::uint32_t read_u32_be(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[offset + 3]);
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_all_bytes(path);
  if (bytes.size() < 16) throw TruncatedFile("image header incomplete in " + path.string());
  const std::uint32_t magic = read_u32_be(bytes, 0);
  if (magic != kIdxImagesMagic) {
    throw BadMagic("expected image magic 0x803 in " + path.string());
  }
  IdxImages out;
  out.count = read_u32_be(bytes, 4);
  out.rows = read_u32_be(bytes, 8);
  out.cols = read_u32_be(bytes, 12);
  if (out.rows != kMnistRows || out.cols != kMnistCols) {
    throw DimensionMismatch("expected 28x28 images in " + path.string());
  }
  const std::size_t needed = static_cast<std::size_t>(out.count) * out.rows * out.cols;
  if (bytes.size() < 16 + needed) {
    throw TruncatedFile("image payload incomplete in " + path.string());
  }
  out.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(needed));
  return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_all_bytes(path);
  if (bytes.size() < 8) throw TruncatedFile("label header incomplete in " + path.string());
  const std::uint32_t magic = read_u32_be(bytes, 0);
  if (magic != kIdxLabelsMagic) {
    throw BadMagic("expected label magic 0x801 in " + path.string());
  }
  const std::uint32_t count = read_u32_be(bytes, 4);
  if (bytes.size() < 8 + static_cast<std::size_t>(count)) {
    throw TruncatedFile("label payload incomplete in " + path.string());
  }
  std::vector<std::uint8_t> labels(bytes.begin() + 8,
                                   bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count));
  for (std::uint8_t label : labels) {
    if (label > 9) throw LabelOutOfRange("label above 9 in " + path.string());
  }
  return labels;
}

RawDataset load_raw_dataset(const std::filesystem::path& images_path,
                            const std::filesystem::path& labels_path) {
  RawDataset out;
  out.images = read_idx_images(images_path);
  out.labels = read_idx_labels(labels_path);
  if (out.images.count != out.labels.size()) {
    throw DimensionMismatch("image and label counts differ: " + images_path.string());
  }
  return out;
}

std::filesystem::path resolve_idx_file(const std::filesystem::path& dir, const std::string& name) {
  const std::filesystem::path plain = dir / name;
  if (std::filesystem::exists(plain)) return plain;
  const std::filesystem::path zipped = dir / (name + ".gz");
  if (std::filesystem::exists(zipped)) return zipped;
  throw Error("neither " + plain.string() + " nor " + zipped.string() + " exists");
}

LabeledImage to_labeled_image(std::span<const std::uint8_t> raw, std::uint32_t rows,
                              std::uint32_t cols, int label, std::int64_t source_index) {
  Image img(rows, cols);
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double value = static_cast<double>(raw[i]) / 255.0;
    img.pixels()[i] = value;
    sum += value;
  }
  if (sum <= 0.0) throw AllZeroImage("image has no ink, cannot normalize");
  for (double& value : img.pixels()) value /= sum;
  return {std::move(img), label, source_index};
}

ProtocolSets build_protocol_sets(const RawDataset& train, const RawDataset& test,
                                 std::uint64_t seed, int num_training_sets, int test_per_digit) {
  if (num_training_sets < 1 || num_training_sets > kMaxTrainingSets) {
    throw Error("build_protocol_sets: training set count out of range");
  }
  if (test_per_digit < 1 || test_per_digit > kMaxTestPerDigit) {
    throw Error("build_protocol_sets: test count per digit out of range");
  }

  auto pools_of = [](const RawDataset& data) {
    std::array<std::vector<std::size_t>, kDigitClasses> pools;
    for (std::size_t i = 0; i < data.size(); ++i) pools[data.labels[i]].push_back(i);
    return pools;
  };
  auto train_pools = pools_of(train);
  auto test_pools = pools_of(test);

  rng::Engine engine(seed);
  const std::size_t per_digit_needed =
      static_cast<std::size_t>(num_training_sets) * kSamplesPerDigit;
  for (int d = 0; d < kDigitClasses; ++d) {
    auto& pool = train_pools[d];
    rng::shuffle(pool, engine);
    pool.resize(std::min<std::size_t>(pool.size(), kWorkingPoolPerDigit));
    if (pool.size() < per_digit_needed) {
      throw InsufficientData("too few training images of digit " + std::to_string(d));
    }
  }
  for (int d = 0; d < kDigitClasses; ++d) {
    auto& pool = test_pools[d];
    rng::shuffle(pool, engine);
    if (pool.size() < static_cast<std::size_t>(test_per_digit)) {
      throw InsufficientData("too few test images of digit " + std::to_string(d));
    }
  }

  auto emit = [](const RawDataset& data, std::size_t index) {
    return to_labeled_image(data.images.image(index), data.images.rows, data.images.cols,
                            data.labels[index], static_cast<std::int64_t>(index));
  };

  ProtocolSets out;
  out.seed = seed;
  out.training_sets.resize(num_training_sets);
  // Rank-major interleaving: entry k*10+d is the k-th sample of digit d, so
  // a size-t prefix keeps exactly t samples per digit.
  for (int s = 0; s < num_training_sets; ++s) {
    auto& set = out.training_sets[s];
    set.reserve(static_cast<std::size_t>(kDigitClasses) * kSamplesPerDigit);
    for (int k = 0; k < kSamplesPerDigit; ++k) {
      for (int d = 0; d < kDigitClasses; ++d) {
        set.push_back(emit(train, train_pools[d][static_cast<std::size_t>(s) * kSamplesPerDigit + k]));
      }
    }
  }
  out.test_set.reserve(static_cast<std::size_t>(kDigitClasses) * test_per_digit);
  for (int k = 0; k < test_per_digit; ++k) {
    for (int d = 0; d < kDigitClasses; ++d) {
      out.test_set.push_back(emit(test, test_pools[d][k]));
    }
  }
  return out;
}

}  // namespace mkot
