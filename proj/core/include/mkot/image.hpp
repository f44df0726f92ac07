#pragma once

#include <cassert>
#include <initializer_list>
#include <span>
#include <vector>

namespace mkot {

// Row-major grayscale raster with double-precision intensities.
class Image {
 public:
  Image() = default;

  Image(int rows, int cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, value) {
    assert(rows >= 0 && cols >= 0);
  }

  static Image from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Image img(static_cast<int>(rows.size()),
              rows.size() ? static_cast<int>(rows.begin()->size()) : 0);
    int r = 0;
    for (const auto& row : rows) {
      assert(static_cast<int>(row.size()) == img.cols_);
      int c = 0;
      for (double v : row) img(r, c++) = v;
      ++r;
    }
    return img;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::span<const double> pixels() const { return data_; }
  std::span<double> pixels() { return data_; }

  double pixel_sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
  }

  bool same_shape(const Image& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace mkot
