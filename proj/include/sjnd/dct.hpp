#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "sjnd/error.hpp"

namespace sjnd {

// Orthonormal 2D type-II DCT on N x N blocks, row-major with (0,0) = DC.
struct DctBlock {
  int size = 0;
  std::vector<double> coefficients;

  double& at(int i, int j) { return coefficients[static_cast<std::size_t>(i) * size + j]; }
  double at(int i, int j) const { return coefficients[static_cast<std::size_t>(i) * size + j]; }
};

inline double dct_scale(int k, int n) {
  return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
}

// Separable transform with a cached basis. basis(k, x) = scale(k) cos((2x+1)k pi / 2N).
class Dct {
 public:
  explicit Dct(int n) : n_(n), basis_(static_cast<std::size_t>(n) * n), scratch_size_(n * n) {
    if (n < 2) throw_validation("DCT size must be at least 2");
    for (int k = 0; k < n; ++k)
      for (int x = 0; x < n; ++x)
        basis_[k * n + x] =
            dct_scale(k, n) * std::cos((2.0 * x + 1.0) * k * std::numbers::pi / (2.0 * n));
  }

  int size() const noexcept { return n_; }

  void forward(std::span<const double> pixels, std::span<double> out) const {
    std::vector<double> tmp(scratch_size_);
    // Rows: tmp(y, j) = sum_x basis(j, x) p(y, x)
    for (int y = 0; y < n_; ++y)
      for (int j = 0; j < n_; ++j) {
        double acc = 0.0;
        for (int x = 0; x < n_; ++x) acc += basis_[j * n_ + x] * pixels[y * n_ + x];
        tmp[y * n_ + j] = acc;
      }
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        double acc = 0.0;
        for (int y = 0; y < n_; ++y) acc += basis_[i * n_ + y] * tmp[y * n_ + j];
        out[i * n_ + j] = acc;
      }
  }

  void inverse(std::span<const double> coefficients, std::span<double> out) const {
    std::vector<double> tmp(scratch_size_);
    // Columns first: tmp(y, j) = sum_i basis(i, y) C(i, j)
    for (int y = 0; y < n_; ++y)
      for (int j = 0; j < n_; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n_; ++i) acc += basis_[i * n_ + y] * coefficients[i * n_ + j];
        tmp[y * n_ + j] = acc;
      }
    for (int y = 0; y < n_; ++y)
      for (int x = 0; x < n_; ++x) {
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) acc += basis_[j * n_ + x] * tmp[y * n_ + j];
        out[y * n_ + x] = acc;
      }
  }

 private:
  int n_;
  std::vector<double> basis_;
  int scratch_size_;
};

// Direct O(N^4) evaluation of the defining sum. Kept as the reference path.
inline void forward_dct_reference(int n, std::span<const double> pixels, std::span<double> out) {
  const double pi = std::numbers::pi;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
          acc += pixels[y * n + x] * std::cos((2.0 * y + 1.0) * i * pi / (2.0 * n)) *
                 std::cos((2.0 * x + 1.0) * j * pi / (2.0 * n));
      out[i * n + j] = dct_scale(i, n) * dct_scale(j, n) * acc;
    }
}

inline void inverse_dct_reference(int n, std::span<const double> coefficients, std::span<double> out) {
  const double pi = std::numbers::pi;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          acc += dct_scale(i, n) * dct_scale(j, n) * coefficients[i * n + j] *
                 std::cos((2.0 * y + 1.0) * i * pi / (2.0 * n)) *
                 std::cos((2.0 * x + 1.0) * j * pi / (2.0 * n));
      out[y * n + x] = acc;
    }
}

inline DctBlock forward_dct(std::span<const double> pixels, int n) {
  if (pixels.size() != static_cast<std::size_t>(n) * n)
    throw_validation("forward_dct: expected an N x N block");
  DctBlock block{n, std::vector<double>(pixels.size())};
  Dct(n).forward(pixels, block.coefficients);
  return block;
}

// Spatial samples, unclamped.
inline std::vector<double> inverse_dct(const DctBlock& block) {
  std::vector<double> pixels(block.coefficients.size());
  Dct(block.size).inverse(block.coefficients, pixels);
  return pixels;
}

}  // namespace sjnd
