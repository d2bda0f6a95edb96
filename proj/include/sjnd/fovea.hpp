#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sjnd/error.hpp"
#include "sjnd/image_io.hpp"
#include "sjnd/parallel.hpp"
#include "sjnd/raster.hpp"
#include "sjnd/viewing.hpp"
#include "sjnd/viewport.hpp"

namespace sjnd {

struct FoveaParams {
  double chi = 0.106;
  double e1 = 2.3;
  double r_dir = 0.6;
  double s_thresh = 0.5;
  double tau_knee = 2.7;  // degrees
  ViewingParams viewing;

  void validate() const {
    if (!(chi > 0.0)) throw_validation("fovea.chi must be > 0");
    if (!(e1 > 0.0)) throw_validation("fovea.e1 must be > 0");
    if (!(r_dir > 0.0 && r_dir <= 1.0)) throw_validation("fovea.r_dir must lie in (0, 1]");
    if (!(s_thresh > 0.0 && s_thresh < 1.0)) throw_validation("fovea.s_thresh must lie in (0, 1)");
    if (!(tau_knee > 1.0)) throw_validation("fovea.tau_knee must be > 1");
    viewing.validate();
  }
};

struct SaliencyField {
  RealField salience;      // [0, 1], max-normalized
  Mask salient;            // 1 where salience >= s_thresh
  RealField eccentricity;  // degrees; empty until computed

  int width() const noexcept { return salience.width(); }
  int height() const noexcept { return salience.height(); }
};

// Scales a non-negative map so that its maximum is 1.
inline RealField normalize_salience(RealField raw) {
  double peak = 0.0;
  for (double v : raw.values()) {
    if (!std::isfinite(v) || v < 0.0) throw_validation("saliency values must be finite and non-negative");
    peak = std::max(peak, v);
  }
  if (peak <= 0.0) throw_validation("saliency map is all zero: no salient region can be derived");
  for (double& v : raw.values()) v /= peak;
  return raw;
}

inline Mask threshold_salience(const RealField& salience, double s_thresh) {
  Mask mask(salience.width(), salience.height());
  for (std::size_t k = 0; k < salience.size(); ++k)
    mask.values()[k] = salience.values()[k] >= s_thresh ? 1 : 0;
  return mask;
}

inline SaliencyField make_saliency_field(RealField raw, double s_thresh) {
  SaliencyField field;
  field.salience = normalize_salience(std::move(raw));
  field.salient = threshold_salience(field.salience, s_thresh);
  return field;
}

// Reads an 8-bit PGM/PNG or a float-binary map and checks it against the plane size.
inline SaliencyField load_saliency(const std::filesystem::path& path, int width, int height,
                                   double s_thresh = 0.5) {
  RealField raw;
  const std::string ext = path.extension().string();
  if (ext == ".pgm" || ext == ".png") {
    const LumaPlane plane = load_image(path);
    raw = RealField(plane.width(), plane.height());
    std::copy(plane.values().begin(), plane.values().end(), raw.values().begin());
  } else {
    raw = load_float_map(path);
  }
  if (raw.width() != width || raw.height() != height)
    throw_validation("saliency map is " + std::to_string(raw.width()) + "x" + std::to_string(raw.height()) +
                     " but the plane is " + std::to_string(width) + "x" + std::to_string(height));
  return make_saliency_field(std::move(raw), s_thresh);
}

// Analytic prior: a vertical Gaussian on the equator (sigma = H/6), optionally
// times a horizontal Gaussian (sigma = W/12, i.e. 30 degrees of longitude)
// around the viewport's yaw.
inline SaliencyField equator_gaussian_prior(int width, int height, double s_thresh = 0.5,
                                            const std::optional<ViewportSpec>& viewport = std::nullopt) {
  RealField raw(width, height);
  const double sigma_y = height / 6.0;
  const double sigma_x = width / 12.0;
  const double center_x = (viewport ? viewport->yaw / 360.0 + 0.5 : 0.5) * width;
  for (int y = 0; y < height; ++y) {
    const double dy = (y + 0.5) - height / 2.0;
    const double gy = std::exp(-0.5 * dy * dy / (sigma_y * sigma_y));
    for (int x = 0; x < width; ++x) {
      double g = gy;
      if (viewport) {
        double dx = std::fabs((x + 0.5) - center_x);
        dx = std::min(dx, width - dx);
        g *= std::exp(-0.5 * dx * dx / (sigma_x * sigma_x));
      }
      raw.at(x, y) = g;
    }
  }
  return make_saliency_field(std::move(raw), s_thresh);
}

// Pulls a saliency map computed in viewport space back onto the ERP grid. ERP
// pixels outside the viewport receive zero.
inline RealField project_viewport_saliency(const RealField& viewport_salience, const ViewportSpec& spec,
                                           int erp_width, int erp_height) {
  if (viewport_salience.width() != spec.out_width || viewport_salience.height() != spec.out_height)
    throw_validation("viewport saliency does not match the viewport size");
  RealField out(erp_width, erp_height, 0.0);
  for (int y = 0; y < erp_height; ++y)
    for (int x = 0; x < erp_width; ++x) {
      const auto vp = erp_to_viewport({x + 0.5, y + 0.5}, spec, erp_width, erp_height);
      if (!vp) continue;
      const int u = std::min(static_cast<int>(vp->x), spec.out_width - 1);
      const int v = std::min(static_cast<int>(vp->y), spec.out_height - 1);
      out.at(x, y) = viewport_salience.at(u, v);
    }
  return out;
}

namespace detail {

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), exact for integer inputs.
inline void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d,
                                  std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    // z[0] = -inf, so the scan always stops at k >= 0.
    double s = 0.0;
    while (true) {
      s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace detail

// Squared Euclidean distance (pixels) from every pixel to the nearest set pixel.
inline RealField squared_distance_transform(const Mask& mask, unsigned threads = 1) {
  const int w = mask.width();
  const int h = mask.height();
  const double inf = std::numeric_limits<double>::infinity();
  RealField cols(w, h, inf);
  parallel_for(static_cast<std::size_t>(w), threads, [&](std::size_t col) {
    const int x = static_cast<int>(col);
    std::vector<double> f(h), d(h), z(h + 1);
    std::vector<int> v(h);
    for (int y = 0; y < h; ++y) f[y] = mask.at(x, y) ? 0.0 : inf;
    detail::distance_transform_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) cols.at(x, y) = d[y];
  });
  RealField out(w, h, inf);
  parallel_for(static_cast<std::size_t>(h), threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    std::vector<double> f(cols.row(y).begin(), cols.row(y).end()), d(w), z(w + 1);
    std::vector<int> v(w);
    detail::distance_transform_1d(f, d, v, z);
    std::copy(d.begin(), d.end(), out.row(y).begin());
  });
  return out;
}

// tau(p) = min over salient q of arctan(|p - q| / v), in degrees.
inline RealField eccentricity_field(const Mask& salient, double viewing_distance_px, unsigned threads = 1) {
  if (!(viewing_distance_px > 0.0)) throw_validation("viewing distance must be positive");
  if (std::none_of(salient.values().begin(), salient.values().end(), [](auto m) { return m != 0; }))
    throw_validation("eccentricity_field: salient region is empty");
  RealField dist = squared_distance_transform(salient, threads);
  for (double& v : dist.values()) v = std::atan(std::sqrt(v) / viewing_distance_px) * kDegPerRad;
  return dist;
}

inline void compute_eccentricity(SaliencyField& field, const FoveaParams& params, unsigned threads = 1) {
  const ViewingGeometry geometry(field.width(), params.viewing);
  field.eccentricity = eccentricity_field(field.salient, geometry.viewing_distance_px(), threads);
}

// CT(f, tau) = 1/64 exp(chi f (tau + e1) / e1).
inline double csf_threshold(double freq, double tau, const FoveaParams& params) {
  return std::exp(params.chi * freq * (tau + params.e1) / params.e1) / 64.0;
}

// Directional form for DCT basis (i, j).
inline double csf_directional(int i, int j, double tau, const FoveaParams& params, int block_size,
                              double pixel_angle_deg) {
  const double freq = dct_spatial_frequency(i, j, block_size, pixel_angle_deg);
  const double cos_theta = dct_direction_cosine(i, j);
  return csf_threshold(freq, tau, params) / (params.r_dir + (1.0 - params.r_dir) * cos_theta * cos_theta);
}

// ln(tau) beyond the knee for AC coefficients, 1 otherwise.
inline double fovea_factor(double tau, bool is_dc, const FoveaParams& params) {
  if (is_dc || tau < params.tau_knee) return 1.0;
  return std::log(tau);
}

// Per-coefficient alpha_fov; tau is read at each block's center pixel.
inline ThresholdMap fovea_map(const RealField& eccentricity, int block_size, int blocks_x, int blocks_y,
                              const FoveaParams& params) {
  if (blocks_x * block_size > eccentricity.width() || blocks_y * block_size > eccentricity.height())
    throw_validation("fovea_map: block grid exceeds the eccentricity field");
  ThresholdMap weights(block_size, blocks_x, blocks_y, 1.0);
  for (int by = 0; by < blocks_y; ++by)
    for (int bx = 0; bx < blocks_x; ++bx) {
      const double tau = eccentricity.at(bx * block_size + block_size / 2, by * block_size + block_size / 2);
      for (int i = 0; i < block_size; ++i)
        for (int j = 0; j < block_size; ++j)
          weights.coeff(bx, by, i, j) = fovea_factor(tau, i == 0 && j == 0, params);
    }
  return weights;
}

}  // namespace sjnd
