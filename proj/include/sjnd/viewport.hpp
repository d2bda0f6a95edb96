#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "sjnd/error.hpp"
#include "sjnd/parallel.hpp"
#include "sjnd/raster.hpp"
#include "sjnd/viewing.hpp"

namespace sjnd {

struct ViewportSpec {
  double yaw = 0.0;    // degrees, [-180, 180]
  double pitch = 0.0;  // degrees, [-90, 90]
  double roll = 0.0;   // degrees, [-90, 90]
  double fov = 120.0;  // degrees, (0, 180)
  int out_width = 512;
  int out_height = 512;

  void validate() const {
    if (yaw < -180.0 || yaw > 180.0) throw_validation("viewport yaw must lie in [-180, 180]");
    if (pitch < -90.0 || pitch > 90.0) throw_validation("viewport pitch must lie in [-90, 90]");
    if (roll < -90.0 || roll > 90.0) throw_validation("viewport roll must lie in [-90, 90]");
    if (!(fov > 0.0 && fov < 180.0)) throw_validation("viewport fov must lie in (0, 180)");
    if (out_width <= 0 || out_height <= 0) throw_validation("viewport size must be positive");
  }
};

// Continuous pixel coordinates; pixel k covers [k, k+1) and has its center at k + 0.5.
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

inline Vec3 operator*(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
          m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
          m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) out[r][c] += a[r][k] * b[k][c];
  return out;
}

inline Mat3 transpose(const Mat3& m) {
  Mat3 t{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t[r][c] = m[c][r];
  return t;
}

// World frame: +Z looks at longitude 0 on the equator, +X toward positive
// longitude, +Y to the north pole. Camera frame: +X right, +Y up, +Z forward.
// camera -> world = yaw (about Y) * pitch (about X, positive looks up) * roll (about Z).
inline Mat3 view_rotation(const ViewportSpec& spec) {
  const double y = spec.yaw / kDegPerRad;
  const double p = spec.pitch / kDegPerRad;
  const double r = spec.roll / kDegPerRad;
  const Mat3 yaw{{{std::cos(y), 0.0, std::sin(y)}, {0.0, 1.0, 0.0}, {-std::sin(y), 0.0, std::cos(y)}}};
  const Mat3 pitch{{{1.0, 0.0, 0.0}, {0.0, std::cos(p), std::sin(p)}, {0.0, -std::sin(p), std::cos(p)}}};
  const Mat3 roll{{{std::cos(r), -std::sin(r), 0.0}, {std::sin(r), std::cos(r), 0.0}, {0.0, 0.0, 1.0}}};
  return yaw * pitch * roll;
}

inline double focal_length_px(const ViewportSpec& spec) {
  return (spec.out_width / 2.0) / std::tan(spec.fov / 2.0 / kDegPerRad);
}

inline Vec3 erp_direction(PixelPoint p, int width, int height) {
  const double lon = (p.x / width - 0.5) * 2.0 * std::numbers::pi;
  const double lat = (0.5 - p.y / height) * std::numbers::pi;
  return {std::cos(lat) * std::sin(lon), std::sin(lat), std::cos(lat) * std::cos(lon)};
}

inline PixelPoint direction_to_erp(const Vec3& d, int width, int height) {
  const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  const double lon = std::atan2(d[0], d[2]);
  const double lat = std::asin(std::clamp(d[1] / norm, -1.0, 1.0));
  double x = (lon / (2.0 * std::numbers::pi) + 0.5) * width;
  if (x >= width) x -= width;
  return {x, (0.5 - lat / std::numbers::pi) * height};
}

inline bool inside_viewport(PixelPoint p, const ViewportSpec& spec) {
  return p.x >= 0.0 && p.x <= spec.out_width && p.y >= 0.0 && p.y <= spec.out_height;
}

inline PixelPoint viewport_to_erp(PixelPoint point, const ViewportSpec& spec, int erp_width, int erp_height) {
  if (!inside_viewport(point, spec))
    throw_validation("viewport_to_erp: point lies outside the viewport");
  const Vec3 cam{point.x - spec.out_width / 2.0, -(point.y - spec.out_height / 2.0), focal_length_px(spec)};
  return direction_to_erp(view_rotation(spec) * cam, erp_width, erp_height);
}

// Projection of an ERP point into the viewport; empty when it falls outside.
inline std::optional<PixelPoint> erp_to_viewport(PixelPoint point, const ViewportSpec& spec, int erp_width,
                                                 int erp_height) {
  const Vec3 cam = transpose(view_rotation(spec)) * erp_direction(point, erp_width, erp_height);
  if (cam[2] <= 0.0) return std::nullopt;
  const double f = focal_length_px(spec);
  const PixelPoint out{f * cam[0] / cam[2] + spec.out_width / 2.0, -f * cam[1] / cam[2] + spec.out_height / 2.0};
  if (!inside_viewport(out, spec)) return std::nullopt;
  return out;
}

// Bilinear sample at a continuous position; wraps in longitude, clamps in latitude.
template <typename Sample>
double sample_erp_bilinear(const Grid2D<Sample>& plane, PixelPoint p) {
  const int w = plane.width();
  const int h = plane.height();
  const double sx = p.x - 0.5;
  const double sy = std::clamp(p.y - 0.5, 0.0, static_cast<double>(h - 1));
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  const double tx = sx - fx;
  const double ty = sy - fy;
  auto wrap = [w](long x) { return static_cast<int>(((x % w) + w) % w); };
  const int x0 = wrap(static_cast<long>(fx));
  const int x1 = wrap(static_cast<long>(fx) + 1);
  const int y0 = static_cast<int>(fy);
  const int y1 = std::min(y0 + 1, h - 1);
  const double top = (1.0 - tx) * plane.at(x0, y0) + tx * plane.at(x1, y0);
  const double bottom = (1.0 - tx) * plane.at(x0, y1) + tx * plane.at(x1, y1);
  return (1.0 - ty) * top + ty * bottom;
}

// Rectilinear (gnomonic) view of an ERP plane.
inline LumaPlane extract_viewport(const LumaPlane& plane, const ViewportSpec& spec, unsigned threads = 1) {
  spec.validate();
  require_erp(plane.width(), plane.height(), "extract_viewport");
  LumaPlane out(spec.out_width, spec.out_height);
  const Mat3 rot = view_rotation(spec);
  const double f = focal_length_px(spec);
  parallel_for(static_cast<std::size_t>(spec.out_height), threads, [&](std::size_t row) {
    const int v = static_cast<int>(row);
    auto dst = out.row(v);
    for (int u = 0; u < spec.out_width; ++u) {
      const Vec3 cam{u + 0.5 - spec.out_width / 2.0, -(v + 0.5 - spec.out_height / 2.0), f};
      const PixelPoint src = direction_to_erp(rot * cam, plane.width(), plane.height());
      dst[u] = static_cast<std::uint8_t>(std::clamp(std::lround(sample_erp_bilinear(plane, src)), 0L, 255L));
    }
  });
  return out;
}

}  // namespace sjnd
