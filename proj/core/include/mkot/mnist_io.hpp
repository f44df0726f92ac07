#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mkot/error.hpp"
#include "mkot/knn.hpp"

namespace mkot {

struct BadMagic : Error {
  using Error::Error;
};
struct TruncatedFile : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct LabelOutOfRange : Error {
  using Error::Error;
};
struct InsufficientData : Error {
  using Error::Error;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major

  std::span<const std::uint8_t> image(std::size_t i) const {
    return {pixels.data() + i * rows * cols, static_cast<std::size_t>(rows) * cols};
  }
};

// IDX readers, bit-exact: big-endian 32-bit header words, raw byte payload.
// Gzip-compressed files are decompressed transparently. Images must be
// 28x28 (DimensionMismatch otherwise); labels must be <= 9.
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

struct RawDataset {
  IdxImages images;
  std::vector<std::uint8_t> labels;  // one per image

  std::size_t size() const { return labels.size(); }
};

// Reads an image/label file pair and checks the counts agree.
RawDataset load_raw_dataset(const std::filesystem::path& images_path,
                            const std::filesystem::path& labels_path);

// Tries `dir/name`, then `dir/name.gz`.
std::filesystem::path resolve_idx_file(const std::filesystem::path& dir, const std::string& name);

inline constexpr int kDigitClasses = 10;
inline constexpr int kSamplesPerDigit = 21;   // per training set
inline constexpr int kWorkingPoolPerDigit = 1000;
inline constexpr int kMaxTrainingSets = 20;
inline constexpr int kMaxTestPerDigit = 20;

// The evaluation protocol: disjoint training sets of 21 images per digit
// drawn from a shuffled per-digit working pool of the training split, plus
// one test set sampled from the test split. Each emitted image is scaled to
// unit pixel sum. Within a training set, images are interleaved so that the
// first 10*t entries are exactly the first t samples of every digit.
struct ProtocolSets {
  std::vector<std::vector<LabeledImage>> training_sets;
  std::vector<LabeledImage> test_set;
  std::uint64_t seed = 0;
};

ProtocolSets build_protocol_sets(const RawDataset& train, const RawDataset& test,
                                 std::uint64_t seed, int num_training_sets = kMaxTrainingSets,
                                 int test_per_digit = kMaxTestPerDigit);

// value/255 per pixel, then scaled to unit sum. Raises AllZeroImage.
LabeledImage to_labeled_image(std::span<const std::uint8_t> raw, std::uint32_t rows,
                              std::uint32_t cols, int label, std::int64_t source_index);

}  // namespace mkot
