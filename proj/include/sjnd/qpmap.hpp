#pragma once

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "sjnd/error.hpp"
#include "sjnd/image_io.hpp"
#include "sjnd/raster.hpp"

namespace sjnd {

struct QpMapConfig {
  int cu_size = 64;
  int base_qp = 32;
  double m = 0.7;
  double n = 0.6;
  double p = 1.0;
  double q = 4.0;
  int min_qp = 0;
  int max_qp = 63;

  void validate() const {
    if (cu_size <= 0) throw_validation("qp.cu_size must be positive");
    if (base_qp < 0 || base_qp > 63) throw_validation("qp.base_qp must lie in [0, 63]");
    if (!(q > 0.0)) throw_validation("qp.q must be > 0");
    if (!(p >= 0.0)) throw_validation("qp.p must be >= 0");
    if (min_qp < 0 || max_qp > 63 || min_qp > max_qp) throw_validation("qp clamp must satisfy 0 <= min <= max <= 63");
    if (std::abs(m + n / (1.0 + p) - 1.0) > 1e-9)
      throw_validation("qp constants violate neutrality: m + n / (1 + p) must equal 1");
  }
};

struct CuMeans {
  int cus_x = 0;
  int cus_y = 0;
  std::vector<double> cu_mean;           // row-major
  std::vector<std::size_t> cu_count;     // coefficients per CU
  double frame_mean = 0.0;
};

// Mean threshold of every CU. A block belongs to the CU containing its top-left
// pixel; CUs that hold no analysed block take the frame mean.
inline CuMeans cu_means(const ThresholdMap& map, int cu_size, int plane_width, int plane_height) {
  const int n = map.block_size();
  if (cu_size < n) throw_validation("qp: CU size " + std::to_string(cu_size) + " is smaller than the block size");
  CuMeans out;
  out.cus_x = (plane_width + cu_size - 1) / cu_size;
  out.cus_y = (plane_height + cu_size - 1) / cu_size;
  const std::size_t cus = static_cast<std::size_t>(out.cus_x) * out.cus_y;
  std::vector<double> sums(cus, 0.0);
  out.cu_count.assign(cus, 0);
  double total = 0.0;
  for (int by = 0; by < map.blocks_y(); ++by)
    for (int bx = 0; bx < map.blocks_x(); ++bx) {
      const std::size_t cu = static_cast<std::size_t>(by * n / cu_size) * out.cus_x + (bx * n / cu_size);
      double block_sum = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) block_sum += map.coeff(bx, by, i, j);
      sums[cu] += block_sum;
      out.cu_count[cu] += static_cast<std::size_t>(n) * n;
      total += block_sum;
    }
  const std::size_t coeffs = map.size();
  out.frame_mean = coeffs ? total / static_cast<double>(coeffs) : 0.0;
  out.cu_mean.resize(cus);
  for (std::size_t k = 0; k < cus; ++k)
    out.cu_mean[k] = out.cu_count[k] ? sums[k] / static_cast<double>(out.cu_count[k]) : out.frame_mean;
  return out;
}

// sqrt(m + n / (1 + p exp(-q (J_cu - J_frame) / J_frame))).
inline double qp_factor(double cu_mean, double frame_mean, const QpMapConfig& cfg) {
  if (!(frame_mean > 0.0)) throw_validation("qp: frame mean threshold must be positive");
  const double rel = (cu_mean - frame_mean) / frame_mean;
  return std::sqrt(cfg.m + cfg.n / (1.0 + cfg.p * std::exp(-cfg.q * rel)));
}

// Nearest integer (ties away from zero), clamped.
inline int perceptual_qp(double cu_mean, double frame_mean, const QpMapConfig& cfg) {
  const long qp = std::lround(cfg.base_qp * qp_factor(cu_mean, frame_mean, cfg));
  return static_cast<int>(std::clamp<long>(qp, cfg.min_qp, cfg.max_qp));
}

struct QpMap {
  int cus_x = 0;
  int cus_y = 0;
  int base_qp = 0;
  std::vector<int> qp;
  std::vector<double> cu_mean;
  double frame_mean = 0.0;

  int at(int cx, int cy) const { return qp[static_cast<std::size_t>(cy) * cus_x + cx]; }
  friend bool operator==(const QpMap&, const QpMap&) = default;
};

inline QpMap build_qpmap(const ThresholdMap& sjnd, int plane_width, int plane_height, const QpMapConfig& cfg) {
  cfg.validate();
  const CuMeans means = cu_means(sjnd, cfg.cu_size, plane_width, plane_height);
  QpMap out{means.cus_x, means.cus_y, cfg.base_qp, {}, means.cu_mean, means.frame_mean};
  out.qp.reserve(means.cu_mean.size());
  for (double m : means.cu_mean) out.qp.push_back(perceptual_qp(m, means.frame_mean, cfg));
  return out;
}

enum class QpFormat { csv, dqp_text };

// csv: absolute QP per CU, one grid row per line, comma-separated.
// dqp-text: QP_CU - QP0 per CU, one grid row per line, space-separated.
inline std::string encode_qpmap(const QpMap& map, QpFormat format) {
  std::string out;
  const char sep = format == QpFormat::csv ? ',' : ' ';
  for (int cy = 0; cy < map.cus_y; ++cy) {
    for (int cx = 0; cx < map.cus_x; ++cx) {
      if (cx) out.push_back(sep);
      const int v = map.at(cx, cy);
      out += std::to_string(format == QpFormat::csv ? v : v - map.base_qp);
    }
    out.push_back('\n');
  }
  return out;
}

inline void export_qpmap(const QpMap& map, const std::filesystem::path& path, QpFormat format) {
  write_text(path, encode_qpmap(map, format));
}

// Parses either text format back into absolute QPs.
inline std::vector<std::vector<int>> parse_qp_text(const std::string& text, QpFormat format, int base_qp) {
  std::vector<std::vector<int>> rows;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    if (format == QpFormat::csv)
      for (char& c : line)
        if (c == ',') c = ' ';
    std::istringstream fields(line);
    std::vector<int> row;
    for (int v; fields >> v;) row.push_back(format == QpFormat::csv ? v : v + base_qp);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sjnd
