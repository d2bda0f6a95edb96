#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sjnd/assess.hpp"
#include "sjnd/error.hpp"
#include "sjnd/image_io.hpp"
#include "sjnd/pipeline.hpp"
#include "sjnd/qpmap.hpp"

namespace sjnd {

struct CalibrationOptions {
  double target_ssim = 0.975;
  double tolerance = 0.002;
};

// Every tunable constant, grouped by module.
struct RunConfig {
  SjndParams sjnd;
  InjectionConfig inject;
  QpMapConfig qp;
  CalibrationOptions calibration;
  int stats_bands = 10;

  void validate() const {
    sjnd.validate();
    qp.validate();
    if (!(inject.beta >= 0.0)) throw_validation("inject.beta must be >= 0");
    if (!(calibration.target_ssim > 0.0 && calibration.target_ssim <= 1.0))
      throw_validation("calibrate.target_ssim must lie in (0, 1]");
    if (stats_bands < 1) throw_validation("stats.bands must be >= 1");
  }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    throw_validation("config key " + key + ": '" + text + "' is not a number");
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    throw_validation("config key " + key + ": '" + text + "' is not an integer");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw_validation("config key " + key + ": expected true or false, got '" + text + "'");
}

struct ConfigKey {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename Ref>
ConfigKey real(std::string name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return format_number(ref(const_cast<RunConfig&>(c))); },
          [ref, name](RunConfig& c, const std::string& v) { ref(c) = parse_double(name, v); }};
}

template <typename Int, typename Ref>
ConfigKey integer(std::string name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, name](RunConfig& c, const std::string& v) { ref(c) = parse_int<Int>(name, v); }};
}

template <typename Ref>
ConfigKey boolean(std::string name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); },
          [ref, name](RunConfig& c, const std::string& v) { ref(c) = parse_bool(name, v); }};
}

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back(integer<int>("jnd2d.block_size", [](RunConfig& c) -> int& { return c.sjnd.jnd2d.block_size; }));
    k.push_back(real("jnd2d.a", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.csf_a; }));
    k.push_back(real("jnd2d.b", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.csf_b; }));
    k.push_back(real("jnd2d.c", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.csf_c; }));
    k.push_back(real("jnd2d.s", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.csf_s; }));
    k.push_back(real("jnd2d.r_dir", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.r_dir; }));
    k.push_back(real("jnd2d.la_dark_knee", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.la_dark_knee; }));
    k.push_back(real("jnd2d.la_dark_div", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.la_dark_div; }));
    k.push_back(real("jnd2d.la_bright_knee", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.la_bright_knee; }));
    k.push_back(real("jnd2d.la_bright_div", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.la_bright_div; }));
    k.push_back(real("jnd2d.t_plain", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.t_plain; }));
    k.push_back(real("jnd2d.t_texture", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.t_texture; }));
    k.push_back({"jnd2d.entropy_mode",
                 [](const RunConfig& c) {
                   return std::string(c.sjnd.jnd2d.entropy_mode == EntropyMode::histogram ? "histogram" : "intensity");
                 },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "histogram") c.sjnd.jnd2d.entropy_mode = EntropyMode::histogram;
                   else if (v == "intensity") c.sjnd.jnd2d.entropy_mode = EntropyMode::intensity;
                   else throw_validation("jnd2d.entropy_mode must be histogram or intensity");
                 }});
    k.push_back(real("jnd2d.eps_plain", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.eps_plain; }));
    k.push_back(real("jnd2d.eps_edge", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.eps_edge; }));
    k.push_back(real("jnd2d.eps_texture", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.eps_texture; }));
    k.push_back(real("jnd2d.tm_exponent", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.tm_exponent; }));
    k.push_back(real("jnd2d.tm_cap", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.tm_cap; }));
    k.push_back(real("jnd2d.tm_floor", [](RunConfig& c) -> double& { return c.sjnd.jnd2d.tm_floor; }));
    k.push_back(integer<int>("jnd2d.low_freq_radius_sq",
                             [](RunConfig& c) -> int& { return c.sjnd.jnd2d.low_freq_radius_sq; }));
    k.push_back(real("sphere.x_max", [](RunConfig& c) -> double& { return c.sjnd.sphere.x_max; }));
    k.push_back({"sphere.curve_mode",
                 [](const RunConfig& c) {
                   return std::string(c.sjnd.sphere.curve_mode == CurveMode::evaluate ? "evaluate" : "normalize");
                 },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "evaluate") c.sjnd.sphere.curve_mode = CurveMode::evaluate;
                   else if (v == "normalize") c.sjnd.sphere.curve_mode = CurveMode::normalize;
                   else throw_validation("sphere.curve_mode must be evaluate or normalize");
                 }});
    k.push_back(real("fovea.chi", [](RunConfig& c) -> double& { return c.sjnd.fovea.chi; }));
    k.push_back(real("fovea.e1", [](RunConfig& c) -> double& { return c.sjnd.fovea.e1; }));
    k.push_back(real("fovea.r_dir", [](RunConfig& c) -> double& { return c.sjnd.fovea.r_dir; }));
    k.push_back(real("fovea.s_thresh", [](RunConfig& c) -> double& { return c.sjnd.fovea.s_thresh; }));
    k.push_back(real("fovea.tau_knee", [](RunConfig& c) -> double& { return c.sjnd.fovea.tau_knee; }));
    k.push_back(real("fovea.fov_deg", [](RunConfig& c) -> double& { return c.sjnd.fovea.viewing.fov_deg; }));
    k.push_back(real("fovea.distance_ratio",
                     [](RunConfig& c) -> double& { return c.sjnd.fovea.viewing.distance_ratio; }));
    k.push_back(boolean("fovea.enabled", [](RunConfig& c) -> bool& { return c.sjnd.foveation; }));
    k.push_back(real("inject.beta", [](RunConfig& c) -> double& { return c.inject.beta; }));
    k.push_back(integer<std::uint64_t>("inject.seed", [](RunConfig& c) -> std::uint64_t& { return c.inject.seed; }));
    k.push_back(boolean("inject.clamp", [](RunConfig& c) -> bool& { return c.inject.clamp_output; }));
    k.push_back(real("calibrate.target_ssim", [](RunConfig& c) -> double& { return c.calibration.target_ssim; }));
    k.push_back(real("calibrate.tolerance", [](RunConfig& c) -> double& { return c.calibration.tolerance; }));
    k.push_back(integer<int>("qp.cu_size", [](RunConfig& c) -> int& { return c.qp.cu_size; }));
    k.push_back(integer<int>("qp.base_qp", [](RunConfig& c) -> int& { return c.qp.base_qp; }));
    k.push_back(real("qp.m", [](RunConfig& c) -> double& { return c.qp.m; }));
    k.push_back(real("qp.n", [](RunConfig& c) -> double& { return c.qp.n; }));
    k.push_back(real("qp.p", [](RunConfig& c) -> double& { return c.qp.p; }));
    k.push_back(real("qp.q", [](RunConfig& c) -> double& { return c.qp.q; }));
    k.push_back(integer<int>("qp.min_qp", [](RunConfig& c) -> int& { return c.qp.min_qp; }));
    k.push_back(integer<int>("qp.max_qp", [](RunConfig& c) -> int& { return c.qp.max_qp; }));
    k.push_back(integer<int>("stats.bands", [](RunConfig& c) -> int& { return c.stats_bands; }));
    return k;
  }();
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

inline void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : detail::config_keys())
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  throw_validation("unknown config key '" + key + "'");
}

inline std::vector<std::string> config_key_names() {
  std::vector<std::string> names;
  for (const auto& k : detail::config_keys()) names.push_back(k.name);
  return names;
}

// Flat key=value text; '#' starts a comment. Values override those already in
// config; the result is validated.
inline void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin = "config") {
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw_validation(origin + ":" + std::to_string(line_no) + ": expected key=value");
    set_config_value(config, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  config.validate();
}

inline RunConfig parse_config(const std::string& text, const std::string& origin = "config") {
  RunConfig config;
  apply_config_text(config, text, origin);
  return config;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

inline std::string dump_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : detail::config_keys()) out += k.name + "=" + k.get(config) + "\n";
  return out;
}

}  // namespace sjnd
