#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sjnd/dct.hpp"
#include "sjnd/error.hpp"
#include "sjnd/parallel.hpp"
#include "sjnd/raster.hpp"
#include "sjnd/viewing.hpp"

namespace sjnd {

// histogram: p(g) = count(g) / N^2 over gray levels.
// intensity: p(i, j) = I(i, j) / sum(I), the literal per-sample reading.
enum class EntropyMode { histogram, intensity };

struct Jnd2dParams {
  int block_size = 8;

  // Spatial CSF base threshold.
  double csf_a = 1.33;
  double csf_b = 0.11;
  double csf_c = 0.18;
  double csf_s = 0.25;
  double r_dir = 0.6;

  // Luminance adaptation: (dark_knee - I)/dark_div + 1 below the dark knee,
  // (I - bright_knee)/bright_div + 1 above the bright knee, 1 in between.
  double la_dark_knee = 60.0;
  double la_dark_div = 150.0;
  double la_bright_knee = 170.0;
  double la_bright_div = 425.0;

  // Entropy classes, in bits.
  double t_plain = 2.0;
  double t_texture = 4.0;
  EntropyMode entropy_mode = EntropyMode::histogram;

  // Contrast masking.
  double eps_plain = 1.0;
  double eps_edge = 1.0;
  double eps_texture = 2.25;
  double tm_exponent = 0.36;
  double tm_cap = 4.0;
  double tm_floor = 1.0;
  int low_freq_radius_sq = 16;

  double epsilon(BlockClass c) const {
    switch (c) {
      case BlockClass::plain: return eps_plain;
      case BlockClass::edge: return eps_edge;
      case BlockClass::texture: return eps_texture;
    }
    return eps_edge;
  }

  void validate() const {
    if (block_size < 2) throw_validation("jnd2d.block_size must be >= 2");
    auto positive = [](double v, const char* name) {
      if (!(std::isfinite(v) && v > 0.0))
        throw_validation(std::string("jnd2d.") + name + " must be finite and positive");
    };
    positive(csf_a, "a");
    positive(csf_b, "b");
    positive(csf_s, "s");
    positive(la_dark_div, "la_dark_div");
    positive(la_bright_div, "la_bright_div");
    positive(eps_plain, "eps_plain");
    positive(eps_edge, "eps_edge");
    positive(eps_texture, "eps_texture");
    positive(tm_exponent, "tm_exponent");
    positive(tm_floor, "tm_floor");
    if (!std::isfinite(csf_c)) throw_validation("jnd2d.c must be finite");
    if (!(r_dir > 0.0 && r_dir <= 1.0)) throw_validation("jnd2d.r_dir must lie in (0, 1]");
    if (!(tm_cap >= tm_floor)) throw_validation("jnd2d.tm_cap must be >= jnd2d.tm_floor");
    if (!(t_plain <= t_texture)) throw_validation("jnd2d.t_plain must be <= jnd2d.t_texture");
    if (low_freq_radius_sq < 0) throw_validation("jnd2d.low_freq_radius_sq must be >= 0");
  }
};

// Shannon entropy (bits) of an N x N block of 8-bit samples.
inline double block_entropy(std::span<const double> pixels, EntropyMode mode = EntropyMode::histogram) {
  if (pixels.empty()) return 0.0;
  double entropy = 0.0;
  if (mode == EntropyMode::histogram) {
    std::array<int, 256> counts{};
    for (double v : pixels) ++counts[static_cast<std::uint8_t>(std::lround(v))];
    const double total = static_cast<double>(pixels.size());
    for (int c : counts) {
      if (c == 0) continue;
      const double p = c / total;
      entropy -= p * std::log2(p);
    }
  } else {
    double sum = 0.0;
    for (double v : pixels) sum += v;
    if (sum <= 0.0) return 0.0;
    for (double v : pixels) {
      if (v <= 0.0) continue;
      const double p = v / sum;
      entropy -= p * std::log2(p);
    }
  }
  return entropy;
}

inline BlockClass classify_block(double entropy, const Jnd2dParams& params) {
  if (entropy < params.t_plain) return BlockClass::plain;
  if (entropy >= params.t_texture) return BlockClass::texture;
  return BlockClass::edge;
}

// Spatial-CSF base threshold for DCT basis (i, j) at the given pixel pitch.
inline double base_threshold(int i, int j, const Jnd2dParams& params, double pixel_angle_deg) {
  const int n = params.block_size;
  const double freq = dct_spatial_frequency(i, j, n, pixel_angle_deg);
  const double cos_theta = dct_direction_cosine(i, j);
  const double norm = dct_scale(i, n) * dct_scale(j, n);
  return params.csf_s / norm * std::exp(params.csf_c * freq) / (params.csf_a + params.csf_b * freq) /
         (params.r_dir + (1.0 - params.r_dir) * cos_theta * cos_theta);
}

inline std::vector<double> base_threshold_table(const Jnd2dParams& params, double pixel_angle_deg) {
  const int n = params.block_size;
  std::vector<double> table(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) table[i * n + j] = base_threshold(i, j, params, pixel_angle_deg);
  return table;
}

inline double luminance_adaptation(double mean_luma, const Jnd2dParams& params) {
  if (mean_luma <= params.la_dark_knee)
    return (params.la_dark_knee - mean_luma) / params.la_dark_div + 1.0;
  if (mean_luma >= params.la_bright_knee)
    return (mean_luma - params.la_bright_knee) / params.la_bright_div + 1.0;
  return 1.0;
}

inline double texture_masking(double coefficient, int i, int j, BlockClass block_class,
                              double jnd_base, double alpha_la, const Jnd2dParams& params) {
  const double eps = params.epsilon(block_class);
  if (i * i + j * j <= params.low_freq_radius_sq && block_class != BlockClass::edge) return eps;
  const double ratio = std::abs(coefficient) / (jnd_base * alpha_la);
  const double boost = std::pow(ratio, params.tm_exponent);
  return eps * std::min(params.tm_cap, std::max(params.tm_floor, boost));
}

struct Jnd2dResult {
  ThresholdMap map;
  BlockGrid grid;  // annotated with entropy, class and coefficients
};

// JND_2D = base x alpha_LA x alpha_TM for every coefficient of every block.
inline Jnd2dResult jnd2d_map(const LumaPlane& plane, const Jnd2dParams& params,
                             const ViewingGeometry& geometry, unsigned threads = 1) {
  params.validate();
  const int n = params.block_size;
  BlockGrid grid = tile(plane, n);
  ThresholdMap map(n, grid.blocks_x(), grid.blocks_y());
  const std::vector<double> base = base_threshold_table(params, geometry.pixel_angle_deg());
  const Dct dct(n);

  parallel_for(static_cast<std::size_t>(grid.blocks_y()), threads, [&](std::size_t row) {
    const int by = static_cast<int>(row);
    std::vector<double> pixels(static_cast<std::size_t>(n) * n);
    for (int bx = 0; bx < grid.blocks_x(); ++bx) {
      read_block(plane, n, bx, by, pixels);
      BlockInfo& info = grid.info(bx, by);
      info.entropy = block_entropy(pixels, params.entropy_mode);
      info.block_class = classify_block(info.entropy, params);
      auto coeffs = grid.coefficients(bx, by);
      dct.forward(pixels, coeffs);
      const double alpha_la = luminance_adaptation(info.mean_luma, params);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double jb = base[i * n + j];
          const double alpha_tm =
              texture_masking(coeffs[i * n + j], i, j, info.block_class, jb, alpha_la, params);
          map.coeff(bx, by, i, j) = jb * alpha_la * alpha_tm;
        }
    }
  });
  return {std::move(map), std::move(grid)};
}

}  // namespace sjnd
