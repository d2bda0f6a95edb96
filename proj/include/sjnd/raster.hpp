#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sjnd/error.hpp"

namespace sjnd {

// Dense row-major 2D array.
template <typename T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(checked_area(width, height)), fill) {}
  Grid2D(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(checked_area(width, height)))
      throw_validation("grid sample count does not match " + std::to_string(width) +
                       "x" + std::to_string(height));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::span<T> row(int y) { return std::span<T>(data_).subspan(index(0, y), width_); }
  std::span<const T> row(int y) const {
    return std::span<const T>(data_).subspan(index(0, y), width_);
  }

  bool same_shape(const Grid2D& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  static long long checked_area(int width, int height) {
    if (width < 0 || height < 0) throw_validation("negative grid dimension");
    return static_cast<long long>(width) * height;
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using RealField = Grid2D<double>;
using Mask = Grid2D<std::uint8_t>;

// 8-bit luma raster; the unit of all analysis.
class LumaPlane : public Grid2D<std::uint8_t> {
 public:
  LumaPlane() = default;
  LumaPlane(int width, int height, std::uint8_t fill = 0)
      : Grid2D<std::uint8_t>(width, height, fill) {}
  LumaPlane(int width, int height, std::vector<std::uint8_t> samples)
      : Grid2D<std::uint8_t>(width, height, std::move(samples)) {}

  bool is_erp() const noexcept { return width() > 0 && width() == 2 * height(); }
};

inline void require_erp(int width, int height, const char* who) {
  if (width <= 0 || width != 2 * height)
    throw_validation(std::string(who) + ": expected an equirectangular frame with W == 2H, got " +
                     std::to_string(width) + "x" + std::to_string(height));
}

// Per-coefficient field laid out like the coefficient grid: coefficient (i, j)
// of block (bx, by) lives at column bx*N + j, row by*N + i. i indexes vertical
// frequency, j horizontal.
class ThresholdMap {
 public:
  ThresholdMap() = default;
  ThresholdMap(int block_size, int blocks_x, int blocks_y, double fill = 0.0)
      : block_size_(block_size), blocks_x_(blocks_x), blocks_y_(blocks_y),
        values_(blocks_x * block_size, blocks_y * block_size, fill) {}
  ThresholdMap(int block_size, RealField values)
      : block_size_(block_size), values_(std::move(values)) {
    if (block_size_ <= 0 || values_.width() % block_size_ != 0 ||
        values_.height() % block_size_ != 0)
      throw_validation("threshold map dimensions must be multiples of the block size");
    blocks_x_ = values_.width() / block_size_;
    blocks_y_ = values_.height() / block_size_;
  }

  int block_size() const noexcept { return block_size_; }
  int blocks_x() const noexcept { return blocks_x_; }
  int blocks_y() const noexcept { return blocks_y_; }
  int width() const noexcept { return values_.width(); }
  int height() const noexcept { return values_.height(); }
  std::size_t size() const noexcept { return values_.size(); }

  double& coeff(int bx, int by, int i, int j) {
    return values_.at(bx * block_size_ + j, by * block_size_ + i);
  }
  double coeff(int bx, int by, int i, int j) const {
    return values_.at(bx * block_size_ + j, by * block_size_ + i);
  }

  RealField& field() noexcept { return values_; }
  const RealField& field() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_.values(); }
  std::span<const double> values() const noexcept { return values_.values(); }

  bool same_shape(const ThresholdMap& other) const noexcept {
    return block_size_ == other.block_size_ && values_.same_shape(other.values_);
  }

  friend bool operator==(const ThresholdMap&, const ThresholdMap&) = default;

 private:
  int block_size_ = 0;
  int blocks_x_ = 0;
  int blocks_y_ = 0;
  RealField values_;
};

enum class BlockClass { plain, edge, texture };

inline const char* to_string(BlockClass c) {
  switch (c) {
    case BlockClass::plain: return "plain";
    case BlockClass::edge: return "edge";
    case BlockClass::texture: return "texture";
  }
  return "?";
}

struct BlockInfo {
  std::int64_t luma_sum = 0;  // exact sum of the N*N samples
  double mean_luma = 0.0;
  double entropy = 0.0;
  BlockClass block_class = BlockClass::plain;
};

// Tiling of a plane into N x N blocks. Right/bottom remainders are excluded.
class BlockGrid {
 public:
  BlockGrid() = default;
  BlockGrid(int block_size, int blocks_x, int blocks_y)
      : block_size_(block_size), blocks_x_(blocks_x), blocks_y_(blocks_y),
        info_(static_cast<std::size_t>(blocks_x) * blocks_y),
        coefficients_(info_.size() * block_size * block_size, 0.0) {}

  int block_size() const noexcept { return block_size_; }
  int blocks_x() const noexcept { return blocks_x_; }
  int blocks_y() const noexcept { return blocks_y_; }
  std::size_t block_count() const noexcept { return info_.size(); }

  BlockInfo& info(int bx, int by) { return info_[flat(bx, by)]; }
  const BlockInfo& info(int bx, int by) const { return info_[flat(bx, by)]; }

  std::span<double> coefficients(int bx, int by) {
    const std::size_t n2 = static_cast<std::size_t>(block_size_) * block_size_;
    return std::span<double>(coefficients_).subspan(flat(bx, by) * n2, n2);
  }
  std::span<const double> coefficients(int bx, int by) const {
    const std::size_t n2 = static_cast<std::size_t>(block_size_) * block_size_;
    return std::span<const double>(coefficients_).subspan(flat(bx, by) * n2, n2);
  }

 private:
  std::size_t flat(int bx, int by) const noexcept {
    return static_cast<std::size_t>(by) * blocks_x_ + bx;
  }

  int block_size_ = 0;
  int blocks_x_ = 0;
  int blocks_y_ = 0;
  std::vector<BlockInfo> info_;
  std::vector<double> coefficients_;
};

// Copies block (bx, by) of the plane into out (row-major N*N).
inline void read_block(const LumaPlane& plane, int block_size, int bx, int by,
                       std::span<double> out) {
  for (int y = 0; y < block_size; ++y) {
    const auto row = plane.row(by * block_size + y).subspan(bx * block_size, block_size);
    for (int x = 0; x < block_size; ++x) out[y * block_size + x] = row[x];
  }
}

inline BlockGrid tile(const LumaPlane& plane, int block_size) {
  if (block_size < 2) throw_validation("block size must be at least 2");
  if (block_size > plane.width() || block_size > plane.height())
    throw_validation("block size " + std::to_string(block_size) +
                     " exceeds plane dimensions " + std::to_string(plane.width()) + "x" +
                     std::to_string(plane.height()));
  BlockGrid grid(block_size, plane.width() / block_size, plane.height() / block_size);
  const double n2 = static_cast<double>(block_size) * block_size;
  for (int by = 0; by < grid.blocks_y(); ++by) {
    for (int bx = 0; bx < grid.blocks_x(); ++bx) {
      std::int64_t sum = 0;
      for (int y = 0; y < block_size; ++y)
        for (auto v : plane.row(by * block_size + y).subspan(bx * block_size, block_size))
          sum += v;
      auto& info = grid.info(bx, by);
      info.luma_sum = sum;
      info.mean_luma = static_cast<double>(sum) / n2;
    }
  }
  return grid;
}

}  // namespace sjnd
