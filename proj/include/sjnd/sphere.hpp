#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sjnd/error.hpp"
#include "sjnd/parallel.hpp"
#include "sjnd/raster.hpp"

namespace sjnd {

// How a block's JND_2D is moved along the latitude curve cluster.
//  evaluate:  take the curve whose coefficients come from JND_2D and read it at
//             the row's density x.
//  normalize: find the curve passing through (x, JND_2D) and read it at x = 1.
enum class CurveMode { evaluate, normalize };

struct LatitudeParams {
  double x_max = 1024.0;
  CurveMode curve_mode = CurveMode::evaluate;

  void validate() const {
    if (!(x_max >= 1.0)) throw_validation("sphere.x_max must be >= 1");
  }
};

struct RowDensity {
  double eta = 0.0;     // latitude angle, radians
  double radius = 0.0;  // latitude circle radius, sphere units
  long samples = 0;     // round(2 pi R), at least 1
  double x = 1.0;       // W / M, capped
};

// Density of ERP row h (h may be fractional, e.g. a block's center row).
inline RowDensity row_density(int width, int height, double h, double x_max) {
  RowDensity row;
  const double sphere_radius = width / (2.0 * std::numbers::pi);
  row.eta = (h - height / 2.0 + 0.5) * std::numbers::pi / height;
  row.radius = sphere_radius * std::cos(row.eta);
  row.samples = std::max(1L, std::lround(2.0 * std::numbers::pi * row.radius));
  row.x = std::min(x_max, static_cast<double>(width) / static_cast<double>(row.samples));
  return row;
}

class LatitudeProfile {
 public:
  LatitudeProfile(int width, int height, double x_max = 1024.0)
      : width_(width), height_(height), x_max_(x_max) {
    require_erp(width, height, "latitude_profile");
    rows_.reserve(static_cast<std::size_t>(height));
    for (int h = 0; h < height; ++h) rows_.push_back(row_density(width, height, h, x_max));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double x_max() const noexcept { return x_max_; }
  double sphere_radius() const noexcept { return width_ / (2.0 * std::numbers::pi); }
  const std::vector<RowDensity>& rows() const noexcept { return rows_; }
  const RowDensity& row(int h) const { return rows_.at(static_cast<std::size_t>(h)); }

  // Density used for block row by: the tile's center row.
  double block_density(int by, int block_size) const {
    const double center = by * block_size + (block_size - 1) / 2.0;
    return row_density(width_, height_, center, x_max_).x;
  }

 private:
  int width_;
  int height_;
  double x_max_;
  std::vector<RowDensity> rows_;
};

inline LatitudeProfile latitude_profile(int width, int height, double x_max = 1024.0) {
  return LatitudeProfile(width, height, x_max);
}

struct CurveCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

inline CurveCoefficients curve_coefficients(double jnd2d) {
  return {0.13 * jnd2d - 0.11, 0.034 * jnd2d + 0.27, 0.86 * jnd2d + 0.21};
}

// JND_lat = a x^b + c.
inline double jnd_lat(double jnd2d, double x) {
  const CurveCoefficients k = curve_coefficients(jnd2d);
  return k.a * std::pow(x, k.b) + k.c;
}

// Inverse reading: the threshold at x = 1 on the curve that passes through (x, jnd2d).
inline double jnd_lat_normalized(double jnd2d, double x) {
  // jnd_lat(J', x) is increasing in J' for x >= 1; bracket and bisect.
  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * jnd2d);
  while (jnd_lat(hi, x) < jnd2d) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (jnd_lat(mid, x) < jnd2d ? lo : hi) = mid;
  }
  return jnd_lat(0.5 * (lo + hi), 1.0);
}

inline ThresholdMap apply_latitude(const ThresholdMap& map2d, const LatitudeProfile& profile,
                                   CurveMode mode = CurveMode::evaluate, unsigned threads = 1) {
  const int n = map2d.block_size();
  if (map2d.blocks_x() != profile.width() / n || map2d.blocks_y() != profile.height() / n)
    throw_validation("apply_latitude: map does not match the profile's plane dimensions");
  ThresholdMap out = map2d;
  parallel_for(static_cast<std::size_t>(map2d.blocks_y()), threads, [&](std::size_t row) {
    const int by = static_cast<int>(row);
    const double x = profile.block_density(by, n);
    for (int y = by * n; y < (by + 1) * n; ++y) {
      auto dst = out.field().row(y);
      for (double& v : dst) v = mode == CurveMode::evaluate ? jnd_lat(v, x) : jnd_lat_normalized(v, x);
    }
  });
  return out;
}

}  // namespace sjnd
