// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "sjnd/cli.hpp"
#include "sjnd/sjnd.hpp"

namespace {

using namespace sjnd;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

const std::vector<LumaPlane>& corpus() {
  static const std::vector<LumaPlane> planes = [] {
    std::vector<LumaPlane> out;
    for (std::size_t k = 0; k < fixtures::fixture_names().size(); ++k) {
      const fs::path path = fs::path(SJND_FIXTURE_DIR) /
                            ("erp_" + std::to_string(k) + "_" + fixtures::fixture_names()[k] + ".pgm");
      out.push_back(fs::exists(path) ? load_image(path) : fixtures::make_fixture(static_cast<int>(k)));
    }
    return out;
  }();
  return planes;
}

SjndStages stages_for(const LumaPlane& plane, const SjndParams& params = {}) {
  return compute_sjnd(plane, equator_gaussian_prior(plane.width(), plane.height(), params.fovea.s_thresh), params);
}

// 1. Equator self-consistency of the latitude curve.
Verdict criterion_1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double j : cli::kReferenceJnd) worst = std::max(worst, std::abs(jnd_lat(j, 1.0) - j) / j);
  const double elapsed = seconds_since(t0);
  return {worst <= 0.01 && elapsed < 1.0,
          "max |jnd_lat(J,1)-J|/J = " + num(worst) + " (<= 0.01), " + num(elapsed, 3) + " s"};
}

// 2. Latitude monotonicity on a 2048x1024 constant+noise frame.
Verdict criterion_2() {
  const auto t0 = Clock::now();
  const LumaPlane plane = fixtures::constant_with_noise(2048, 1024, 128, 3, 42);
  const SjndStages stages = stages_for(plane);
  const ThresholdMap& lat = stages.map_lat;
  const int rows = lat.blocks_y();
  const int half = rows / 2;
  constexpr int kBands = 10;
  auto band_means = [&](bool north) {
    std::vector<double> sum(kBands, 0.0);
    std::vector<double> count(kBands, 0.0);
    for (int k = 0; k < half; ++k) {
      const int by = north ? half - 1 - k : half + k;  // k = 0 next to the equator
      const int band = k * kBands / half;
      for (int bx = 0; bx < lat.blocks_x(); ++bx)
        for (int i = 0; i < lat.block_size(); ++i)
          for (int j = 0; j < lat.block_size(); ++j) {
            sum[band] += lat.coeff(bx, by, i, j);
            count[band] += 1.0;
          }
    }
    for (int b = 0; b < kBands; ++b) sum[b] /= count[b];
    return sum;
  };
  std::string detail;
  bool pass = true;
  for (bool north : {true, false}) {
    const auto means = band_means(north);
    int ok = 0;
    for (int b = 0; b + 1 < kBands; ++b) ok += means[b + 1] >= means[b];
    const int needed = static_cast<int>(std::ceil(0.9 * (kBands - 1)));
    pass = pass && ok >= needed;
    detail += std::string(north ? "north " : "south ") + std::to_string(ok) + "/" + std::to_string(kBands - 1) +
              " non-decreasing (need " + std::to_string(needed) + ", equator " + num(means.front(), 4) +
              " -> pole " + num(means.back(), 4) + "); ";
  }
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < 30.0;
  return {pass, detail + num(elapsed, 3) + " s"};
}

double brute_force_entropy(const std::vector<double>& block) {
  std::map<double, int> counts;
  for (double v : block) ++counts[v];
  double h = 0.0;
  for (const auto& [value, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(block.size());
    h -= p * std::log2(p);
  }
  return h;
}

// 3. Entropy oracle.
Verdict criterion_3() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  std::vector<double> block(64);
  for (int t = 0; t < 10000; ++t) {
    const int alphabet = 1 + static_cast<int>(rng() % 256);
    for (double& v : block) v = static_cast<double>(rng() % static_cast<unsigned>(alphabet));
    worst = std::max(worst, std::abs(block_entropy(block) - brute_force_entropy(block)));
  }
  std::vector<double> constant(64, 77.0);
  std::vector<double> distinct(64);
  for (int k = 0; k < 64; ++k) distinct[k] = 3.0 * k;
  const double h0 = block_entropy(constant);
  const double h6 = block_entropy(distinct);
  return {worst <= 1e-12 && h0 == 0.0 && h6 == 6.0,
          "max deviation " + num(worst) + " over 10000 blocks; constant -> " + num(h0, 17) + ", all-distinct -> " +
              num(h6, 17)};
}

// 4. DCT oracle.
Verdict criterion_4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pixel(0.0, 255.0);
  const Dct dct(8);
  std::vector<double> in(64), fast(64), ref(64);
  double worst_coeff = 0.0, worst_energy = 0.0;
  for (int t = 0; t < 1000; ++t) {
    for (double& v : in) v = pixel(rng);
    dct.forward(in, fast);
    forward_dct_reference(8, in, ref);
    double e_in = 0.0, e_out = 0.0;
    for (int k = 0; k < 64; ++k) {
      worst_coeff = std::max(worst_coeff, std::abs(fast[k] - ref[k]));
      e_in += in[k] * in[k];
      e_out += fast[k] * fast[k];
    }
    worst_energy = std::max(worst_energy, std::abs(e_out - e_in) / e_in);
  }
  return {worst_coeff <= 1e-9 && worst_energy <= 1e-4,
          "max |fast-reference| " + num(worst_coeff) + ", max Parseval error " + num(worst_energy)};
}

// 5. Eccentricity oracle.
Verdict criterion_5() {
  std::mt19937_64 rng(5);
  constexpr int kSize = 64;
  const double v = 37.5;
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Mask mask(kSize, kSize, 0);
    const double density = 0.002 + 0.1 * static_cast<double>(rng() % 1000) / 1000.0;
    std::bernoulli_distribution on(density);
    for (auto& m : mask.values()) m = on(rng) ? 1 : 0;
    if (std::none_of(mask.values().begin(), mask.values().end(), [](auto m) { return m != 0; }))
      mask.at(static_cast<int>(rng() % kSize), static_cast<int>(rng() % kSize)) = 1;
    const RealField tau = eccentricity_field(mask, v);
    for (int y = 0; y < kSize; ++y)
      for (int x = 0; x < kSize; ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (int qy = 0; qy < kSize; ++qy)
          for (int qx = 0; qx < kSize; ++qx)
            if (mask.at(qx, qy)) {
              const double d2 = static_cast<double>((x - qx) * (x - qx) + (y - qy) * (y - qy));
              best = std::min(best, std::atan(std::sqrt(d2) / v) * (180.0 / std::numbers::pi));
            }
        mismatches += tau.at(x, y) != best;
      }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatching pixels over 100 random 64x64 masks"};
}

// 6. Foveation contract.
Verdict criterion_6() {
  const LumaPlane& plane = corpus()[0];
  const SjndParams params;
  const SjndStages whole = compute_sjnd(
      plane, make_saliency_field(RealField(plane.width(), plane.height(), 1.0), params.fovea.s_thresh), params);
  double worst = 0.0;
  for (std::size_t k = 0; k < whole.sjnd.size(); ++k)
    worst = std::max(worst, std::abs(whole.sjnd.values()[k] - whole.map_lat.values()[k]) /
                                std::abs(whole.map_lat.values()[k]));
  bool dc_ok = true;
  for (const auto& p : corpus()) {
    const SjndStages s = stages_for(p);
    for (int by = 0; by < s.fovea.blocks_y(); ++by)
      for (int bx = 0; bx < s.fovea.blocks_x(); ++bx) dc_ok = dc_ok && s.fovea.coeff(bx, by, 0, 0) == 1.0;
  }
  const double knee = fovea_factor(2.7, false, params.fovea);
  const double knee_err = std::abs(knee - std::log(2.7));
  return {worst <= 1e-9 && dc_ok && knee_err <= 1e-12,
          "whole-frame saliency max rel |sjnd-mapLat| " + num(worst) + "; DC plane == 1: " +
              (dc_ok ? "yes" : "no") + "; |alpha_fov(2.7) - ln 2.7| = " + num(knee_err)};
}

// 7. Injection energy.
Verdict criterion_7() {
  const LumaPlane& plane = corpus()[0];
  const SjndStages stages = stages_for(plane);
  const ThresholdMap& map = stages.sjnd;
  double energy = 0.0;
  for (double v : map.values()) energy += v * v;
  const double expected = energy / static_cast<double>(map.size());
  const double covered = static_cast<double>(map.size()) / static_cast<double>(plane.size());
  int eligible = 0, within = 0;
  double worst = 0.0, worst_clamp = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const InjectionOutcome out = inject(plane, map, {1.0, seed, true});
    const double clamp_fraction = static_cast<double>(out.clamped_samples) / static_cast<double>(plane.size());
    worst_clamp = std::max(worst_clamp, clamp_fraction);
    if (clamp_fraction > 0.01) continue;
    ++eligible;
    const double measured = mean_squared_error(plane, out.plane) / covered;
    const double rel = std::abs(measured - expected) / expected;
    worst = std::max(worst, rel);
    within += rel <= 0.03;
  }
  return {eligible > 0 && within == eligible,
          "mean(SJND^2) " + num(expected) + "; " + std::to_string(within) + "/" + std::to_string(eligible) +
              " eligible seeds within 3% (worst " + num(worst, 4) + "); max clamped fraction " +
              num(worst_clamp, 4)};
}

// 8. Calibration on every fixture.
Verdict criterion_8() {
  int ok = 0;
  std::string detail;
  for (std::size_t k = 0; k < corpus().size(); ++k) {
    const LumaPlane& plane = corpus()[k];
    const SjndStages stages = stages_for(plane);
    const CalibrationResult a = calibrate_amplitude(plane, stages.sjnd, 0.975, 0.002, 7);
    const CalibrationResult b = calibrate_amplitude(plane, stages.sjnd, 0.975, 0.002, 7, 40, 4);
    const bool good = a.converged && std::abs(a.ssim - 0.975) <= 0.002 && a.bisection_steps <= 40 &&
                      a.beta == b.beta && a.ssim == b.ssim && a.psnr == b.psnr;
    ok += good;
    detail += fixtures::fixture_names()[k] + " beta=" + num(a.beta, 6) + " ssim=" + num(a.ssim, 6) +
              " steps=" + std::to_string(a.bisection_steps) + (good ? "" : " [bad]") + "; ";
  }
  return {ok == static_cast<int>(corpus().size()), detail};
}

// 9. Directional model comparison.
Verdict criterion_9() {
  int wins = 0;
  std::string detail;
  for (std::size_t k = 0; k < corpus().size(); ++k) {
    const LumaPlane& plane = corpus()[k];
    const SjndStages stages = stages_for(plane);
    const auto rows = compare_models(plane, {{"jnd2d", stages.map2d}, {"sjnd", stages.sjnd}}, 0.975, 0.002, 7);
    const double p2d = rows[0].calibration.psnr, psj = rows[1].calibration.psnr;
    wins += psj <= p2d;
    detail += fixtures::fixture_names()[k] + " " + num(psj, 5) + (psj <= p2d ? "<=" : ">") + num(p2d, 5) + "; ";
  }
  return {wins >= 5, std::to_string(wins) + "/6 fixtures with PSNR(SJND) <= PSNR(JND_2D): " + detail};
}

// 10. QP neutrality, bounds and the foveation ablation.
Verdict criterion_10() {
  const QpMapConfig cfg;
  const QpMap neutral = build_qpmap(ThresholdMap(8, 128, 64, 5.25), 1024, 512, cfg);
  const bool neutral_ok = std::all_of(neutral.qp.begin(), neutral.qp.end(), [](int q) { return q == 32; });

  std::mt19937_64 rng(10);
  std::lognormal_distribution<double> value(1.0, 1.0);
  std::lognormal_distribution<double> level(0.0, 1.5);
  double lo = 10.0, hi = 0.0;
  for (int t = 0; t < 50; ++t) {
    ThresholdMap map(8, 64, 32, 1.0);
    std::vector<double> cu_level(8 * 4);
    for (double& l : cu_level) l = level(rng);
    for (int by = 0; by < 32; ++by)
      for (int bx = 0; bx < 64; ++bx)
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) map.coeff(bx, by, i, j) = cu_level[(by / 8) * 8 + bx / 8] * value(rng);
    const CuMeans means = cu_means(map, 64, 512, 256);
    for (double m : means.cu_mean) {
      const double f = qp_factor(m, means.frame_mean, cfg);
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
  }
  // Closed-form limits at full precision; 0.843 and 1.140 are their
  // three-decimal roundings (sqrt(1.3) = 1.14018).
  const double f_min = std::sqrt(cfg.m + cfg.n / (1.0 + cfg.p * std::exp(cfg.q)));
  const double f_max = std::sqrt(cfg.m + cfg.n);
  const bool limits_match = std::abs(f_min - 0.843) < 5e-4 && std::abs(f_max - 1.140) < 5e-4;
  const bool bounds_ok = limits_match && lo >= f_min && hi <= f_max;

  int distinct = 0;
  SjndParams ablation;
  ablation.foveation = false;
  for (const auto& plane : corpus()) {
    const QpMap with = build_qpmap(stages_for(plane).sjnd, plane.width(), plane.height(), cfg);
    const QpMap without = build_qpmap(stages_for(plane, ablation).sjnd, plane.width(), plane.height(), cfg);
    distinct += !(with == without);
  }
  return {neutral_ok && bounds_ok && distinct >= 1,
          std::string("constant map neutral: ") + (neutral_ok ? "yes" : "no") + "; random-map factors in [" +
              num(lo, 7) + ", " + num(hi, 7) + "] within [" + num(f_min, 7) + ", " + num(f_max, 7) + "]; ablation changes QP map on " + std::to_string(distinct) +
              "/6 fixtures"};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Runs every subcommand into `dir` and returns stdout plus every produced file.
std::map<std::string, std::string> run_pipelines(const fs::path& dir, const fs::path& input, const std::string& threads) {
  fs::create_directories(dir);
  const std::string d = dir.string();
  const std::string in = input.string();
  const std::vector<std::vector<std::string>> commands{
      {"jnd2d", "--input", in, "--out-map", d + "/jnd2d.sjndmap", "--out-pgm", d + "/jnd2d.pgm", "--block-csv",
       d + "/blocks.csv"},
      {"sjnd", "--input", in, "--saliency-prior", "equator-gaussian", "--out-map", d + "/sjnd.sjndmap", "--out-pgm",
       d + "/sjnd.pgm", "--emit-stages", d + "/stages", "--stats-csv", d + "/stats.csv"},
      {"sjnd", "--input", in, "--saliency-prior", "equator-gaussian", "--no-foveation", "--out-map",
       d + "/sjnd_nofov.sjndmap"},
      {"inject", "--input", in, "--map", d + "/sjnd.sjndmap", "--beta", "0.5", "--seed", "3", "--out",
       d + "/noisy.pgm"},
      {"inject", "--input", in, "--map", d + "/sjnd.sjndmap", "--target-ssim", "0.975", "--seed", "7", "--out",
       d + "/calibrated.png"},
      {"metrics", "--reference", in, "--test", d + "/noisy.pgm"},
      {"qpmap", "--input", in, "--saliency-prior", "equator-gaussian", "--format", "csv", "--out", d + "/qp.csv"},
      {"qpmap", "--map", d + "/sjnd.sjndmap", "--format", "dqp-text", "--out", d + "/qp.txt"},
      {"viewport", "--input", in, "--yaw", "30", "--pitch", "-20", "--roll", "10", "--out-width", "256",
       "--out-height", "192", "--out", d + "/viewport.pgm"},
      {"curves", "--out", d + "/curves.csv"},
      {"curves", "--csf", "--out", d + "/csf.csv"},
      {"compare", "--input", in, "--saliency-prior", "equator-gaussian", "--models", "jnd2d,lat,sjnd",
       "--target-ssim", "0.975", "--seed", "7", "--out", d + "/compare.csv"},
  };
  std::map<std::string, std::string> outputs;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<std::string> args{"sjnd"};
    args.insert(args.end(), commands[c].begin(), commands[c].end());
    if (commands[c][0] != "metrics") {
      args.push_back("--threads");
      args.push_back(threads);
    }
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    outputs["#" + std::to_string(c) + " exit"] = std::to_string(code) + err.str();
    outputs["#" + std::to_string(c) + " stdout"] = out.str();
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) outputs[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
  return outputs;
}

// 11. Determinism of every CLI pipeline across reruns and thread counts.
Verdict criterion_11() {
  const fs::path root = fs::temp_directory_path() / "sjnd_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path input = root / "input.pgm";
  write_text(input, encode_pgm(fixtures::make_fixture(3, 512)));
  const auto a = run_pipelines(root / "run_a", input, "1");
  const auto b = run_pipelines(root / "run_b", input, "1");
  const auto c = run_pipelines(root / "run_c", input, "4");
  int failures = 0;
  for (const auto& [key, value] : a)
    if (key.ends_with(" exit") && value != "0") ++failures;
  const bool same = a == b && a == c;
  std::size_t files = 0;
  for (const auto& [key, value] : a) files += key.front() != '#';
  fs::remove_all(root);
  return {same && failures == 0, std::to_string(a.size()) + " artifacts (" + std::to_string(files) +
                                     " files) compared across 2 single-thread runs and a 4-thread run: " +
                                     (same ? "byte-identical" : "DIFFERENT") + "; failing commands " +
                                     std::to_string(failures)};
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                       criterion_5, criterion_6, criterion_7, criterion_8,
                                                       criterion_9, criterion_10, criterion_11};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << (k + 1) << ": " << v.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
