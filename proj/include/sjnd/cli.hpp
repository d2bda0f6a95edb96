#pragma once

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sjnd/assess.hpp"
#include "sjnd/config.hpp"
#include "sjnd/error.hpp"
#include "sjnd/fovea.hpp"
#include "sjnd/image_io.hpp"
#include "sjnd/jnd2d.hpp"
#include "sjnd/pipeline.hpp"
#include "sjnd/qpmap.hpp"
#include "sjnd/sphere.hpp"
#include "sjnd/viewport.hpp"

namespace sjnd::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kValidation = 3 };

// Reference 2D-JND values; the default J set for `curves`.
inline const std::vector<double> kReferenceJnd{17.51, 16.89, 14.87, 17.27, 18.45, 15.73};

namespace detail {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  unsigned threads = 1;
};

struct InputOptions {
  std::string path;
  YuvSpec yuv;
};

struct SaliencyOptions {
  std::string path;
  std::string prior;
};

inline void add_common(CLI::App& cmd, CommonOptions& common) {
  cmd.add_option("--config", common.config_path, "key=value config file (falls back to $SJND_CONFIG)");
  cmd.add_option("--set", common.overrides, "Override one config key, e.g. --set jnd2d.eps_texture=2.5");
  cmd.add_option("--threads", common.threads, "Worker threads (results are identical for any value)")
      ->check(CLI::Range(1u, 1024u));
}

inline void add_input(CLI::App& cmd, InputOptions& input, bool required = true) {
  auto* opt = cmd.add_option("--input", input.path, "Input image: .pgm, .png, .yuv (raw 4:2:0) or .y4m");
  if (required) opt->required();
  cmd.add_option("--width", input.yuv.width, "Frame width for raw .yuv input");
  cmd.add_option("--height", input.yuv.height, "Frame height for raw .yuv input");
  cmd.add_option("--frame", input.yuv.frame, "Frame index for .yuv/.y4m input");
}

inline void add_saliency(CLI::App& cmd, SaliencyOptions& sal) {
  auto* path = cmd.add_option("--saliency", sal.path, "Saliency map (.pgm/.png 8-bit or float-binary)");
  cmd.add_option("--saliency-prior", sal.prior, "Analytic saliency prior (default: equator-gaussian)")
      ->check(CLI::IsMember({"equator-gaussian"}))
      ->excludes(path);
}

inline RunConfig resolve_config(const CommonOptions& common) {
  RunConfig config;
  std::string path = common.config_path;
  if (path.empty())
    if (const char* env = std::getenv("SJND_CONFIG"); env && *env) path = env;
  if (!path.empty()) config = load_config(path);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw_usage("--set expects key=value, got '" + kv + "'");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

inline LumaPlane read_input(const InputOptions& input) { return load_image(input.path, input.yuv); }

inline SaliencyField resolve_saliency(const SaliencyOptions& sal, const LumaPlane& plane, const RunConfig& config) {
  const double s_thresh = config.sjnd.fovea.s_thresh;
  if (!sal.path.empty()) return load_saliency(sal.path, plane.width(), plane.height(), s_thresh);
  return equator_gaussian_prior(plane.width(), plane.height(), s_thresh);
}

inline ThresholdMap read_threshold_map(const std::string& path, int block_size) {
  return ThresholdMap(block_size, load_float_map(path));
}

inline MapEncoding encoding_for(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm") return MapEncoding::pgm_normalized;
  if (ext == ".csv") return MapEncoding::csv;
  return MapEncoding::float_binary;
}

inline std::string block_csv(const BlockGrid& grid) {
  std::string out = "bx,by,mean_luma,entropy,class\n";
  for (int by = 0; by < grid.blocks_y(); ++by)
    for (int bx = 0; bx < grid.blocks_x(); ++bx) {
      const auto& info = grid.info(bx, by);
      out += std::to_string(bx) + "," + std::to_string(by) + "," + format_number(info.mean_luma) + "," +
             format_number(info.entropy) + "," + to_string(info.block_class) + "\n";
    }
  return out;
}

}  // namespace detail

// Entry point of the `sjnd` tool. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Spherical JND threshold maps for equirectangular 360-degree images"};
  app.require_subcommand(1);
  bool dump = false;
  app.add_flag("--dump-config", dump, "Print the effective configuration and exit");
  CommonOptions root_common;
  add_common(app, root_common);

  // jnd2d
  CommonOptions c_jnd;
  InputOptions in_jnd;
  std::string jnd_map, jnd_pgm, jnd_blocks;
  auto* jnd = app.add_subcommand("jnd2d", "Planar JND_2D threshold map");
  add_common(*jnd, c_jnd);
  add_input(*jnd, in_jnd);
  jnd->add_option("--out-map", jnd_map, "Threshold map output (float-binary, or .csv/.pgm by extension)");
  jnd->add_option("--out-pgm", jnd_pgm, "Normalized PGM visualisation of the map");
  jnd->add_option("--block-csv", jnd_blocks, "Per-block CSV: mean luma, entropy, class");

  // sjnd
  CommonOptions c_sjnd;
  InputOptions in_sjnd;
  SaliencyOptions sal_sjnd;
  std::string sjnd_map, sjnd_pgm, sjnd_stages, sjnd_stats;
  bool sjnd_no_fov = false;
  auto* sj = app.add_subcommand("sjnd", "Full spherical JND map (2D, latitude, foveation)");
  add_common(*sj, c_sjnd);
  add_input(*sj, in_sjnd);
  add_saliency(*sj, sal_sjnd);
  sj->add_option("--out-map", sjnd_map, "SJND map output (float-binary, or .csv/.pgm by extension)");
  sj->add_option("--out-pgm", sjnd_pgm, "Normalized PGM visualisation of the SJND map");
  sj->add_option("--emit-stages", sjnd_stages, "Directory receiving every stage as float-binary");
  sj->add_option("--stats-csv", sjnd_stats, "Per-stage summary CSV");
  sj->add_flag("--no-foveation", sjnd_no_fov, "Ablation: alpha_fov == 1 everywhere");

  // inject
  CommonOptions c_inj;
  InputOptions in_inj;
  std::string inj_map, inj_out;
  std::optional<double> inj_beta, inj_target;
  std::optional<std::uint64_t> inj_seed;
  auto* inj = app.add_subcommand("inject", "Add +/- threshold noise in the DCT domain");
  add_common(*inj, c_inj);
  add_input(*inj, in_inj);
  inj->add_option("--map", inj_map, "Threshold map (float-binary)")->required();
  auto* beta_opt = inj->add_option("--beta", inj_beta, "Noise amplitude scale");
  inj->add_option("--target-ssim", inj_target, "Calibrate the amplitude to this SSIM instead")->excludes(beta_opt);
  inj->add_option("--seed", inj_seed, "Sign-field seed");
  inj->add_option("--out", inj_out, "Output image (.pgm/.png)")->required();

  // metrics
  std::string met_ref, met_test;
  auto* met = app.add_subcommand("metrics", "PSNR and SSIM between two images");
  met->add_option("--reference", met_ref, "Reference image")->required();
  met->add_option("--test", met_test, "Test image")->required();

  // qpmap
  CommonOptions c_qp;
  InputOptions in_qp;
  SaliencyOptions sal_qp;
  std::string qp_map, qp_out, qp_format = "dqp-text";
  std::optional<int> qp_cu, qp_base;
  int qp_plane_w = 0, qp_plane_h = 0;
  bool qp_no_fov = false;
  auto* qp = app.add_subcommand("qpmap", "Per-CU perceptual QP map");
  add_common(*qp, c_qp);
  add_input(*qp, in_qp, false);
  add_saliency(*qp, sal_qp);
  qp->add_option("--map", qp_map, "Precomputed SJND map (float-binary) instead of --input");
  qp->add_option("--plane-width", qp_plane_w, "Plane width for --map (default: map width)");
  qp->add_option("--plane-height", qp_plane_h, "Plane height for --map (default: map height)");
  qp->add_option("--cu-size", qp_cu, "CU size in pixels");
  qp->add_option("--base-qp", qp_base, "Base QP");
  qp->add_option("--format", qp_format, "csv or dqp-text")->check(CLI::IsMember({"csv", "dqp-text"}));
  qp->add_option("--out", qp_out, "Output file (stdout when omitted)");
  qp->add_flag("--no-foveation", qp_no_fov, "Ablation: alpha_fov == 1 everywhere");

  // viewport
  CommonOptions c_vp;
  InputOptions in_vp;
  ViewportSpec vp_spec;
  std::string vp_out;
  auto* vp = app.add_subcommand("viewport", "Extract a rectilinear viewport");
  add_common(*vp, c_vp);
  add_input(*vp, in_vp);
  vp->add_option("--yaw", vp_spec.yaw, "Yaw in degrees [-180, 180]");
  vp->add_option("--pitch", vp_spec.pitch, "Pitch in degrees [-90, 90]");
  vp->add_option("--roll", vp_spec.roll, "Roll in degrees [-90, 90]");
  vp->add_option("--fov", vp_spec.fov, "Field of view in degrees");
  vp->add_option("--out-width", vp_spec.out_width, "Viewport width in pixels");
  vp->add_option("--out-height", vp_spec.out_height, "Viewport height in pixels");
  vp->add_option("--out", vp_out, "Output image (.pgm/.png)")->required();

  // curves
  CommonOptions c_cv;
  std::vector<double> cv_j = kReferenceJnd;
  double cv_x_max = 16.0;
  int cv_steps = 61;
  bool cv_csf = false;
  std::string cv_out;
  auto* cv = app.add_subcommand("curves", "Latitude curve cluster (J, x, JND_lat) or CSF grid as CSV");
  add_common(*cv, c_cv);
  cv->add_option("--j", cv_j, "JND_2D values, one curve each");
  cv->add_option("--x-max", cv_x_max, "Largest density ratio sampled");
  cv->add_option("--steps", cv_steps, "Samples per curve")->check(CLI::Range(2, 100000));
  cv->add_flag("--csf", cv_csf, "Emit CT(f, tau) over frequency and eccentricity instead");
  cv->add_option("--out", cv_out, "Output CSV (stdout when omitted)");

  // compare
  CommonOptions c_cmp;
  InputOptions in_cmp;
  SaliencyOptions sal_cmp;
  std::vector<std::string> cmp_models{"jnd2d", "sjnd"};
  std::optional<double> cmp_target;
  std::optional<std::uint64_t> cmp_seed;
  std::string cmp_out;
  auto* cmp = app.add_subcommand("compare", "Equal-SSIM noise injection report across models");
  add_common(*cmp, c_cmp);
  add_input(*cmp, in_cmp);
  add_saliency(*cmp, sal_cmp);
  cmp->add_option("--models", cmp_models, "Models: jnd2d, lat, sjnd, or a float-binary map path")->delimiter(',');
  cmp->add_option("--target-ssim", cmp_target, "Common SSIM target");
  cmp->add_option("--seed", cmp_seed, "Sign-field seed");
  cmp->add_option("--out", cmp_out, "Report CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  auto emit = [&out](const std::string& path, const std::string& text) {
    if (path.empty()) out << text;
    else write_text(path, text);
  };

  try {
    auto pick = [&](const CommonOptions& sub) {
      CommonOptions merged = root_common;
      if (!sub.config_path.empty()) merged.config_path = sub.config_path;
      merged.overrides.insert(merged.overrides.end(), sub.overrides.begin(), sub.overrides.end());
      if (sub.threads != 1) merged.threads = sub.threads;
      return merged;
    };

    if (*jnd) {
      const CommonOptions common = pick(c_jnd);
      const RunConfig config = resolve_config(common);
      if (dump) return out << dump_config(config), kOk;
      const LumaPlane plane = read_input(in_jnd);
      const ViewingGeometry geometry(plane.width(), config.sjnd.fovea.viewing);
      const Jnd2dResult result = jnd2d_map(plane, config.sjnd.jnd2d, geometry, common.threads);
      if (!jnd_map.empty()) save_map(result.map, jnd_map, encoding_for(jnd_map));
      if (!jnd_pgm.empty()) save_map(result.map, jnd_pgm, MapEncoding::pgm_normalized);
      if (!jnd_blocks.empty()) write_text(jnd_blocks, block_csv(result.grid));
      double sum = 0.0;
      for (double v : result.map.values()) sum += v;
      out << "mean_jnd2d=" << format_number(sum / static_cast<double>(result.map.size())) << "\n";
      return kOk;
    }

    if (*sj || *qp || *cmp) {
      const CommonOptions common = pick(*sj ? c_sjnd : *qp ? c_qp : c_cmp);
      RunConfig config = resolve_config(common);
      if ((*sj && sjnd_no_fov) || (*qp && qp_no_fov)) config.sjnd.foveation = false;
      if (*qp) {
        if (qp_cu) config.qp.cu_size = *qp_cu;
        if (qp_base) config.qp.base_qp = *qp_base;
      }
      if (*cmp) {
        if (cmp_target) config.calibration.target_ssim = *cmp_target;
        if (cmp_seed) config.inject.seed = *cmp_seed;
      }
      config.validate();
      if (dump) return out << dump_config(config), kOk;

      if (*qp && !qp_map.empty()) {
        const ThresholdMap map = read_threshold_map(qp_map, config.sjnd.jnd2d.block_size);
        const QpMap qmap = build_qpmap(map, qp_plane_w > 0 ? qp_plane_w : map.width(),
                                       qp_plane_h > 0 ? qp_plane_h : map.height(), config.qp);
        emit(qp_out, encode_qpmap(qmap, qp_format == "csv" ? QpFormat::csv : QpFormat::dqp_text));
        return kOk;
      }
      const InputOptions& input = *sj ? in_sjnd : *qp ? in_qp : in_cmp;
      if (input.path.empty()) throw_usage("--input or --map is required");
      const LumaPlane plane = read_input(input);
      require_erp(plane.width(), plane.height(), "sjnd");
      const SaliencyOptions& sal = *sj ? sal_sjnd : *qp ? sal_qp : sal_cmp;
      SjndStages stages = compute_sjnd(plane, resolve_saliency(sal, plane, config), config.sjnd, common.threads);

      if (*sj) {
        if (!sjnd_map.empty()) save_map(stages.sjnd, sjnd_map, encoding_for(sjnd_map));
        if (!sjnd_pgm.empty()) save_map(stages.sjnd, sjnd_pgm, MapEncoding::pgm_normalized);
        if (!sjnd_stages.empty()) {
          std::filesystem::create_directories(sjnd_stages);
          const std::filesystem::path dir = sjnd_stages;
          save_map(stages.map2d, dir / "map2d.sjndmap", MapEncoding::float_binary);
          save_map(stages.map_lat, dir / "map_lat.sjndmap", MapEncoding::float_binary);
          save_map(stages.fovea, dir / "fovea.sjndmap", MapEncoding::float_binary);
          save_map(stages.sjnd, dir / "sjnd.sjndmap", MapEncoding::float_binary);
          save_map(stages.saliency.eccentricity.empty() ? RealField(plane.width(), plane.height())
                                                        : stages.saliency.eccentricity,
                   dir / "eccentricity.sjndmap", MapEncoding::float_binary);
        }
        const auto stats = stage_stats(stages, config.stats_bands);
        if (!sjnd_stats.empty()) write_text(sjnd_stats, stage_stats_csv(stats));
        for (const auto& s : stats) out << "mean_" << s.stage << "=" << format_number(s.mean) << "\n";
        return kOk;
      }
      if (*qp) {
        const QpMap qmap = build_qpmap(stages.sjnd, plane.width(), plane.height(), config.qp);
        emit(qp_out, encode_qpmap(qmap, qp_format == "csv" ? QpFormat::csv : QpFormat::dqp_text));
        return kOk;
      }
      std::vector<NamedMap> maps;
      for (const auto& m : cmp_models) {
        if (m == "jnd2d") maps.push_back({m, stages.map2d});
        else if (m == "lat") maps.push_back({m, stages.map_lat});
        else if (m == "sjnd") maps.push_back({m, stages.sjnd});
        else maps.push_back({m, read_threshold_map(m, config.sjnd.jnd2d.block_size)});
      }
      const auto rows = compare_models(plane, maps, config.calibration.target_ssim, config.calibration.tolerance,
                                       config.inject.seed, common.threads);
      for (const auto& r : rows)
        if (!r.calibration.converged)
          err << "warning: " << r.model << " did not reach the SSIM target; best effort reported\n";
      emit(cmp_out, comparison_csv(rows));
      return kOk;
    }

    if (*inj) {
      const CommonOptions common = pick(c_inj);
      RunConfig config = resolve_config(common);
      if (inj_beta) config.inject.beta = *inj_beta;
      if (inj_seed) config.inject.seed = *inj_seed;
      if (inj_target) config.calibration.target_ssim = *inj_target;
      config.validate();
      if (dump) return out << dump_config(config), kOk;
      const LumaPlane plane = read_input(in_inj);
      const ThresholdMap map = read_threshold_map(inj_map, config.sjnd.jnd2d.block_size);
      if (inj_target) {
        const CalibrationResult cal = calibrate_amplitude(plane, map, *inj_target, config.calibration.tolerance,
                                                          config.inject.seed, 40, common.threads);
        if (!cal.converged) err << "warning: SSIM target not reached; best effort amplitude used\n";
        config.inject.beta = cal.beta;
      }
      const InjectionOutcome result = inject(plane, map, config.inject, common.threads);
      save_plane(result.plane, inj_out);
      out << "beta=" << format_number(config.inject.beta) << "\n"
          << "psnr=" << format_number(psnr(plane, result.plane)) << "\n"
          << "ssim=" << format_number(ssim(plane, result.plane)) << "\n"
          << "clamped=" << result.clamped_samples << "\n";
      return kOk;
    }

    if (*met) {
      const LumaPlane a = load_image(met_ref);
      const LumaPlane b = load_image(met_test);
      out << "psnr=" << format_number(psnr(a, b)) << "\n"
          << "ssim=" << format_number(ssim(a, b)) << "\n";
      return kOk;
    }

    if (*vp) {
      const CommonOptions common = pick(c_vp);
      const LumaPlane plane = read_input(in_vp);
      save_plane(extract_viewport(plane, vp_spec, common.threads), vp_out);
      return kOk;
    }

    if (*cv) {
      const CommonOptions common = pick(c_cv);
      const RunConfig config = resolve_config(common);
      if (dump) return out << dump_config(config), kOk;
      std::string csv;
      if (cv_csf) {
        csv = "f,tau,ct\n";
        for (int fi = 0; fi <= 40; ++fi)
          for (int ti = 0; ti <= 60; ti += 5)
            csv += format_number(fi * 0.5) + "," + std::to_string(ti) + "," +
                   format_number(csf_threshold(fi * 0.5, ti, config.sjnd.fovea)) + "\n";
      } else {
        if (!(cv_x_max >= 1.0)) throw_validation("--x-max must be >= 1");
        csv = "J,x,jnd_lat\n";
        for (double j : cv_j)
          for (int s = 0; s < cv_steps; ++s) {
            const double x = 1.0 + (cv_x_max - 1.0) * s / (cv_steps - 1);
            const double v = config.sjnd.sphere.curve_mode == CurveMode::evaluate ? jnd_lat(j, x)
                                                                                  : jnd_lat_normalized(j, x);
            csv += format_number(j) + "," + format_number(x) + "," + format_number(v) + "\n";
          }
      }
      emit(cv_out, csv);
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::usage: return kUsage;
      case ErrorKind::io: return kIo;
      case ErrorKind::validation: return kValidation;
    }
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}

}  // namespace sjnd::cli
