#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "sjnd/error.hpp"
#include "sjnd/fovea.hpp"
#include "sjnd/image_io.hpp"
#include "sjnd/jnd2d.hpp"
#include "sjnd/raster.hpp"
#include "sjnd/sphere.hpp"
#include "sjnd/viewing.hpp"

namespace sjnd {

struct SjndParams {
  Jnd2dParams jnd2d;
  LatitudeParams sphere;
  FoveaParams fovea;
  // false reproduces the ablation without the foveation weight (alpha_fov == 1).
  bool foveation = true;

  void validate() const {
    jnd2d.validate();
    sphere.validate();
    fovea.validate();
  }
};

struct SjndStages {
  ThresholdMap map2d;
  ThresholdMap map_lat;
  ThresholdMap fovea;  // alpha_fov per coefficient
  ThresholdMap sjnd;
  BlockGrid grid;
  SaliencyField saliency;
};

inline ThresholdMap compose_sjnd(const ThresholdMap& map_lat, const ThresholdMap& fovea) {
  if (!map_lat.same_shape(fovea)) throw_validation("compose_sjnd: stage shapes differ");
  ThresholdMap out = map_lat;
  auto dst = out.values();
  const auto w = fovea.values();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] *= w[k];
  return out;
}

// SJND = JND_lat x alpha_fov, with JND_lat = latitude(JND_2D).
inline SjndStages compute_sjnd(const LumaPlane& plane, SaliencyField saliency, const SjndParams& params,
                               unsigned threads = 1) {
  params.validate();
  require_erp(plane.width(), plane.height(), "compute_sjnd");
  if (saliency.width() != plane.width() || saliency.height() != plane.height())
    throw_validation("compute_sjnd: saliency field does not match the plane");

  const ViewingGeometry geometry(plane.width(), params.fovea.viewing);
  SjndStages stages;
  Jnd2dResult base = jnd2d_map(plane, params.jnd2d, geometry, threads);
  stages.map2d = std::move(base.map);
  stages.grid = std::move(base.grid);

  const LatitudeProfile profile(plane.width(), plane.height(), params.sphere.x_max);
  stages.map_lat = apply_latitude(stages.map2d, profile, params.sphere.curve_mode, threads);

  const int n = params.jnd2d.block_size;
  if (params.foveation) {
    if (saliency.eccentricity.empty()) compute_eccentricity(saliency, params.fovea, threads);
    stages.fovea = fovea_map(saliency.eccentricity, n, stages.map2d.blocks_x(), stages.map2d.blocks_y(),
                             params.fovea);
  } else {
    stages.fovea = ThresholdMap(n, stages.map2d.blocks_x(), stages.map2d.blocks_y(), 1.0);
  }
  stages.sjnd = compose_sjnd(stages.map_lat, stages.fovea);
  stages.saliency = std::move(saliency);
  return stages;
}

struct StageStat {
  std::string stage;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> band_means;  // north pole first
  double salient_mean = 0.0;
  double non_salient_mean = 0.0;
  std::size_t salient_blocks = 0;
  std::size_t non_salient_blocks = 0;
};

// Per-stage summary. Latitude bands split the block rows evenly from top to
// bottom; salient/non-salient split uses the mask at each block's center pixel.
inline std::vector<StageStat> stage_stats(const SjndStages& stages, int bands = 10) {
  if (bands < 1) throw_validation("stage_stats: need at least one latitude band");
  const int n = stages.map2d.block_size();
  const int blocks_y = stages.map2d.blocks_y();
  const int blocks_x = stages.map2d.blocks_x();
  const bool have_mask = !stages.saliency.salient.empty();

  std::vector<StageStat> out;
  const std::pair<const char*, const ThresholdMap*> named[] = {
      {"map2d", &stages.map2d}, {"map_lat", &stages.map_lat}, {"fovea", &stages.fovea}, {"sjnd", &stages.sjnd}};
  for (const auto& [name, map] : named) {
    StageStat stat;
    stat.stage = name;
    stat.min = std::numeric_limits<double>::infinity();
    stat.max = -std::numeric_limits<double>::infinity();
    std::vector<double> band_sum(static_cast<std::size_t>(bands), 0.0);
    std::vector<std::size_t> band_count(static_cast<std::size_t>(bands), 0);
    double total = 0.0, salient_sum = 0.0, other_sum = 0.0;
    for (int by = 0; by < blocks_y; ++by) {
      const int band = std::min(bands - 1, by * bands / blocks_y);
      for (int bx = 0; bx < blocks_x; ++bx) {
        double block_sum = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double v = map->coeff(bx, by, i, j);
            block_sum += v;
            stat.min = std::min(stat.min, v);
            stat.max = std::max(stat.max, v);
          }
        const double block_mean = block_sum / (n * n);
        total += block_mean;
        band_sum[band] += block_mean;
        ++band_count[band];
        if (have_mask && stages.saliency.salient.at(bx * n + n / 2, by * n + n / 2)) {
          salient_sum += block_mean;
          ++stat.salient_blocks;
        } else {
          other_sum += block_mean;
          ++stat.non_salient_blocks;
        }
      }
    }
    const double blocks = static_cast<double>(blocks_x) * blocks_y;
    stat.mean = blocks > 0 ? total / blocks : 0.0;
    for (int b = 0; b < bands; ++b)
      stat.band_means.push_back(band_count[b] ? band_sum[b] / static_cast<double>(band_count[b]) : 0.0);
    stat.salient_mean = stat.salient_blocks ? salient_sum / static_cast<double>(stat.salient_blocks) : 0.0;
    stat.non_salient_mean = stat.non_salient_blocks ? other_sum / static_cast<double>(stat.non_salient_blocks) : 0.0;
    out.push_back(std::move(stat));
  }
  return out;
}

inline std::string stage_stats_csv(const std::vector<StageStat>& stats) {
  std::string out = "stage,mean,min,max,salient_mean,non_salient_mean";
  const std::size_t bands = stats.empty() ? 0 : stats.front().band_means.size();
  for (std::size_t b = 0; b < bands; ++b) out += ",band" + std::to_string(b);
  out += "\n";
  for (const auto& s : stats) {
    out += s.stage + "," + format_number(s.mean) + "," + format_number(s.min) + "," + format_number(s.max) + "," +
           format_number(s.salient_mean) + "," + format_number(s.non_salient_mean);
    for (double m : s.band_means) out += "," + format_number(m);
    out += "\n";
  }
  return out;
}

}  // namespace sjnd
