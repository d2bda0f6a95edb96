#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sjnd/dct.hpp"
#include "sjnd/error.hpp"
#include "sjnd/image_io.hpp"
#include "sjnd/parallel.hpp"
#include "sjnd/raster.hpp"

namespace sjnd {

// xorshift64* (Vigna): shifts 12/25/27, multiplier 0x2545F4914F6CDD1D. The seed
// is expanded through one splitmix64 step so that seed 0 is usable.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    state_ = z ^ (z >> 31);
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;
  }

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
  }

  // +1 or -1 from the top output bit.
  int sign() noexcept { return (next() >> 63) ? 1 : -1; }

 private:
  std::uint64_t state_;
};

// d in {+1, -1} for every coefficient, drawn in raster order over (block, i, j).
inline std::vector<std::int8_t> sign_field(std::size_t count, std::uint64_t seed) {
  XorShift64Star rng(seed);
  std::vector<std::int8_t> signs(count);
  for (auto& s : signs) s = static_cast<std::int8_t>(rng.sign());
  return signs;
}

struct InjectionConfig {
  double beta = 1.0;
  std::uint64_t seed = 0;
  // When false, an output that would need clamping is an error.
  bool clamp_output = true;
};

struct InjectionOutcome {
  LumaPlane plane;
  std::size_t clamped_samples = 0;
};

// C' = C + d * beta * map for every coefficient; remainder pixels outside the
// block grid are copied through. Coefficients and signs are computed once so
// that repeated amplitudes are cheap.
class NoiseInjector {
 public:
  NoiseInjector(const LumaPlane& plane, const ThresholdMap& map, std::uint64_t seed, unsigned threads = 1)
      : plane_(plane), map_(map), threads_(threads) {
    const int n = map.block_size();
    if (n < 2 || map.blocks_x() != plane.width() / n || map.blocks_y() != plane.height() / n)
      throw_validation("inject: threshold map shape does not match the plane's block grid");
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    coefficients_.resize(map.size());
    const Dct dct(n);
    parallel_for(static_cast<std::size_t>(map.blocks_y()), threads_, [&](std::size_t row) {
      const int by = static_cast<int>(row);
      std::vector<double> pixels(n2);
      for (int bx = 0; bx < map.blocks_x(); ++bx) {
        read_block(plane, n, bx, by, pixels);
        dct.forward(pixels, std::span<double>(coefficients_).subspan(block_offset(bx, by), n2));
      }
    });
    signs_ = sign_field(map.size(), seed);
  }

  const ThresholdMap& map() const noexcept { return map_; }

  InjectionOutcome apply(double beta) const {
    if (!(beta >= 0.0)) throw_validation("inject: beta must be >= 0");
    const int n = map_.block_size();
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    InjectionOutcome out{plane_, 0};
    std::vector<std::size_t> clamped(static_cast<std::size_t>(map_.blocks_y()), 0);
    const Dct dct(n);
    parallel_for(static_cast<std::size_t>(map_.blocks_y()), threads_, [&](std::size_t row) {
      const int by = static_cast<int>(row);
      std::vector<double> noisy(n2), pixels(n2);
      for (int bx = 0; bx < map_.blocks_x(); ++bx) {
        const std::size_t base = block_offset(bx, by);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const std::size_t k = base + static_cast<std::size_t>(i) * n + j;
            noisy[i * n + j] = coefficients_[k] + signs_[k] * beta * map_.coeff(bx, by, i, j);
          }
        dct.inverse(noisy, pixels);
        for (int y = 0; y < n; ++y) {
          auto dst = out.plane.row(by * n + y).subspan(bx * n, n);
          for (int x = 0; x < n; ++x) {
            const long v = std::lround(pixels[y * n + x]);
            if (v < 0 || v > 255) ++clamped[row];
            dst[x] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
          }
        }
      }
    });
    for (auto c : clamped) out.clamped_samples += c;
    return out;
  }

 private:
  std::size_t block_offset(int bx, int by) const {
    const std::size_t n2 = static_cast<std::size_t>(map_.block_size()) * map_.block_size();
    return (static_cast<std::size_t>(by) * map_.blocks_x() + bx) * n2;
  }

  const LumaPlane& plane_;
  const ThresholdMap& map_;
  unsigned threads_;
  std::vector<double> coefficients_;
  std::vector<std::int8_t> signs_;
};

inline InjectionOutcome inject(const LumaPlane& plane, const ThresholdMap& map, const InjectionConfig& cfg,
                               unsigned threads = 1) {
  if (!(cfg.beta >= 0.0)) throw_validation("inject: beta must be >= 0");
  InjectionOutcome out = NoiseInjector(plane, map, cfg.seed, threads).apply(cfg.beta);
  if (!cfg.clamp_output && out.clamped_samples > 0)
    throw_validation("inject: " + std::to_string(out.clamped_samples) +
                     " samples fall outside [0, 255] and clamping is disabled");
  return out;
}

inline constexpr double kPsnrIdentical = 99.0;

inline void require_same_size(const LumaPlane& a, const LumaPlane& b, const char* who) {
  if (!a.same_shape(b))
    throw_validation(std::string(who) + ": images differ in size (" + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()) + ")");
}

inline double mean_squared_error(const LumaPlane& reference, const LumaPlane& test) {
  require_same_size(reference, test, "mse");
  double sum = 0.0;
  const auto a = reference.values();
  const auto b = test.values();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - b[k];
    sum += d * d;
  }
  return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
}

// Luma PSNR in dB with peak 255; identical images report 99 dB.
inline double psnr(const LumaPlane& reference, const LumaPlane& test) {
  const double mse = mean_squared_error(reference, test);
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace detail {

inline std::array<double, 11> ssim_window() {
  std::array<double, 11> w{};
  double sum = 0.0;
  for (int k = 0; k < 11; ++k) {
    const double d = k - 5;
    w[k] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += w[k];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Valid-region separable filtering of a row-major field.
inline std::vector<double> filter_valid(const std::vector<double>& src, int width, int height,
                                        const std::array<double, 11>& w) {
  const int ow = width - 10;
  const int oh = height - 10;
  std::vector<double> horiz(static_cast<std::size_t>(ow) * height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 11; ++k) acc += w[k] * src[static_cast<std::size_t>(y) * width + x + k];
      horiz[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 11; ++k) acc += w[k] * horiz[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

}  // namespace detail

// Single-scale luma SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, L = 255, averaged over all valid window positions.
inline double ssim(const LumaPlane& reference, const LumaPlane& test) {
  require_same_size(reference, test, "ssim");
  if (reference.width() < 11 || reference.height() < 11)
    throw_validation("ssim: images must be at least 11x11");
  const int w = reference.width();
  const int h = reference.height();
  const std::size_t count = reference.size();
  std::vector<double> x(count), y(count), xx(count), yy(count), xy(count);
  for (std::size_t k = 0; k < count; ++k) {
    x[k] = reference.values()[k];
    y[k] = test.values()[k];
    xx[k] = x[k] * x[k];
    yy[k] = y[k] * y[k];
    xy[k] = x[k] * y[k];
  }
  const auto window = detail::ssim_window();
  const auto mu_x = detail::filter_valid(x, w, h, window);
  const auto mu_y = detail::filter_valid(y, w, h, window);
  const auto e_xx = detail::filter_valid(xx, w, h, window);
  const auto e_yy = detail::filter_valid(yy, w, h, window);
  const auto e_xy = detail::filter_valid(xy, w, h, window);
  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  double total = 0.0;
  for (std::size_t k = 0; k < mu_x.size(); ++k) {
    const double mxy = mu_x[k] * mu_y[k];
    const double mxx = mu_x[k] * mu_x[k];
    const double myy = mu_y[k] * mu_y[k];
    const double var_x = e_xx[k] - mxx;
    const double var_y = e_yy[k] - myy;
    const double cov = e_xy[k] - mxy;
    total += ((2.0 * mxy + c1) * (2.0 * cov + c2)) / ((mxx + myy + c1) * (var_x + var_y + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

struct CalibrationResult {
  double beta = 0.0;
  double ssim = 1.0;
  double psnr = kPsnrIdentical;
  int bisection_steps = 0;
  bool converged = true;  // false: best effort, the target was not met within tolerance
};

// Finds the global amplitude beta at which the injected image reaches the
// target SSIM: doubles an upper bound until SSIM drops below target, then bisects.
inline CalibrationResult calibrate_amplitude(const LumaPlane& plane, const ThresholdMap& map, double target_ssim,
                                             double tol, std::uint64_t seed, int max_steps = 40,
                                             unsigned threads = 1) {
  if (!(target_ssim > 0.0 && target_ssim <= 1.0)) throw_validation("calibrate: target SSIM must lie in (0, 1]");
  if (!(tol >= 0.0)) throw_validation("calibrate: tolerance must be >= 0");
  CalibrationResult result;
  if (target_ssim >= 1.0) return result;
  if (std::all_of(map.values().begin(), map.values().end(), [](double v) { return v == 0.0; }))
    throw_validation("calibrate: map has no noise capacity");

  const NoiseInjector injector(plane, map, seed, threads);
  CalibrationResult best;
  best.ssim = 1.0;
  auto evaluate = [&](double beta) {
    const InjectionOutcome out = injector.apply(beta);
    CalibrationResult r;
    r.beta = beta;
    r.ssim = ssim(plane, out.plane);
    r.psnr = psnr(plane, out.plane);
    if (std::abs(r.ssim - target_ssim) < std::abs(best.ssim - target_ssim)) best = r;
    return r;
  };

  double lo = 0.0;
  double hi = 1.0;
  CalibrationResult at_hi = evaluate(hi);
  for (int doubling = 0; at_hi.ssim >= target_ssim && doubling < 64; ++doubling) {
    if (std::abs(at_hi.ssim - target_ssim) <= tol) return at_hi;
    lo = hi;
    hi *= 2.0;
    at_hi = evaluate(hi);
  }
  if (at_hi.ssim >= target_ssim) {
    best.converged = false;
    return best;
  }
  if (std::abs(at_hi.ssim - target_ssim) <= tol) return at_hi;

  for (int step = 1; step <= max_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    CalibrationResult r = evaluate(mid);
    r.bisection_steps = step;
    if (std::abs(r.ssim - target_ssim) <= tol) return r;
    (r.ssim > target_ssim ? lo : hi) = mid;
  }
  best.bisection_steps = max_steps;
  best.converged = false;
  return best;
}

struct NamedMap {
  std::string name;
  ThresholdMap map;
};

struct ComparisonRow {
  std::string model;
  CalibrationResult calibration;
};

// One calibrated injection per map, all sharing the same seed.
inline std::vector<ComparisonRow> compare_models(const LumaPlane& plane, const std::vector<NamedMap>& maps,
                                                 double target_ssim, double tol, std::uint64_t seed,
                                                 unsigned threads = 1) {
  if (maps.empty()) throw_validation("compare: need at least one model");
  std::vector<ComparisonRow> rows;
  for (const auto& m : maps)
    rows.push_back({m.name, calibrate_amplitude(plane, m.map, target_ssim, tol, seed, 40, threads)});
  return rows;
}

inline std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "model,beta,ssim,psnr\n";
  for (const auto& r : rows)
    out += r.model + "," + format_number(r.calibration.beta) + "," + format_number(r.calibration.ssim) + "," +
           format_number(r.calibration.psnr) + "\n";
  return out;
}

}  // namespace sjnd
