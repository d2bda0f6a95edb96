#pragma once

#include <cmath>
#include <numbers>

#include "sjnd/error.hpp"

namespace sjnd {

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;

// Head-mounted display geometry shared by the base CSF threshold and the
// eccentricity computation.
struct ViewingParams {
  double fov_deg = 120.0;
  // Ratio of viewing distance to the displayed width. Zero derives it from the
  // field of view: D = 1 / (2 tan(fov / 2)).
  double distance_ratio = 0.0;

  void validate() const {
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw_validation("fov must lie in (0, 180) degrees");
    if (distance_ratio < 0.0) throw_validation("viewing distance ratio must be >= 0");
  }
};

// Resolved geometry for one ERP resolution. The displayed viewport shows
// fov/360 of the ERP width at native sampling.
class ViewingGeometry {
 public:
  ViewingGeometry(int erp_width, const ViewingParams& params) {
    params.validate();
    if (erp_width <= 0) throw_validation("viewing geometry needs a positive width");
    display_width_ = erp_width * params.fov_deg / 360.0;
    const double half_fov = params.fov_deg / 2.0 / kDegPerRad;
    distance_ratio_ =
        params.distance_ratio > 0.0 ? params.distance_ratio : 1.0 / (2.0 * std::tan(half_fov));
  }

  double display_width() const noexcept { return display_width_; }
  double distance_ratio() const noexcept { return distance_ratio_; }

  // Angular size of one pixel, omega = arctan(1 / 2D) / (W / 2), in radians.
  double pixel_angle_rad() const noexcept {
    return std::atan(1.0 / (2.0 * distance_ratio_)) / (display_width_ / 2.0);
  }
  double pixel_angle_deg() const noexcept { return pixel_angle_rad() * kDegPerRad; }

  // Viewing distance in pixel units: v = D * W.
  double viewing_distance_px() const noexcept { return distance_ratio_ * display_width_; }

 private:
  double display_width_ = 0.0;
  double distance_ratio_ = 0.0;
};

// Spatial frequency of DCT basis (i, j) in cycles/degree, sqrt(i^2 + j^2) / (2 N omega).
inline double dct_spatial_frequency(int i, int j, int block_size, double pixel_angle_deg) {
  return std::sqrt(static_cast<double>(i * i + j * j)) / (2.0 * block_size * pixel_angle_deg);
}

// |i^2 - j^2| / (i^2 + j^2); the DC term takes 0.
inline double dct_direction_cosine(int i, int j) {
  const int r2 = i * i + j * j;
  if (r2 == 0) return 0.0;
  return static_cast<double>(std::abs(i * i - j * j)) / r2;
}

}  // namespace sjnd
