// SPDX-License-Identifier: Apache-2.0
#include "emr/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace emr {

double plane_mse(const PlaneImage& a, const PlaneImage& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("plane size mismatch");
  if (a.width == 0 || a.height == 0) return 0.0;
  double sse = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    double d = a.samples[i] - b.samples[i];
    sse += d * d;
  }
  return sse / static_cast<double>(a.samples.size());
}

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double plane_psnr(const PlaneImage& a, const PlaneImage& b) {
  return psnr_from_mse(plane_mse(a, b));
}

namespace {

// 11-tap Gaussian, sigma 1.5, normalized.
std::vector<double> ssim_window() {
  std::vector<double> w(11);
  double sum = 0.0;
  for (int i = 0; i < 11; ++i) {
    double d = i - 5.0;
    w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

struct WindowStats {
  double mu_a = 0.0, mu_b = 0.0, var_a = 0.0, var_b = 0.0, cov = 0.0;
};

double ssim_value(const WindowStats& s) {
  constexpr double kC1 = 6.5025;    // (0.01 * 255)^2
  constexpr double kC2 = 58.5225;   // (0.03 * 255)^2
  double num = (2.0 * s.mu_a * s.mu_b + kC1) * (2.0 * s.cov + kC2);
  double den = (s.mu_a * s.mu_a + s.mu_b * s.mu_b + kC1) * (s.var_a + s.var_b + kC2);
  return num / den;
}

// Uniform-weight stats over a whole plane, for the tiny-plane fallback.
WindowStats global_stats(const PlaneImage& a, const PlaneImage& b) {
  WindowStats s;
  double n = static_cast<double>(a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    s.mu_a += a.samples[i];
    s.mu_b += b.samples[i];
  }
  s.mu_a /= n;
  s.mu_b /= n;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    double da = a.samples[i] - s.mu_a;
    double db = b.samples[i] - s.mu_b;
    s.var_a += da * da;
    s.var_b += db * db;
    s.cov += da * db;
  }
  s.var_a /= n;
  s.var_b /= n;
  s.cov /= n;
  return s;
}

}  // namespace

double plane_ssim(const PlaneImage& a, const PlaneImage& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("plane size mismatch");
  if (a.width == 0 || a.height == 0) return 1.0;
  if (a.width < 11 || a.height < 11) return ssim_value(global_stats(a, b));

  const std::vector<double> w = ssim_window();
  double total = 0.0;
  std::size_t count = 0;
  for (int r0 = 0; r0 + 11 <= a.height; ++r0) {
    for (int c0 = 0; c0 + 11 <= a.width; ++c0) {
      WindowStats s;
      double m2a = 0.0, m2b = 0.0, mab = 0.0;
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          double wt = w[i] * w[j];
          double va = a.at(r0 + i, c0 + j);
          double vb = b.at(r0 + i, c0 + j);
          s.mu_a += wt * va;
          s.mu_b += wt * vb;
          m2a += wt * va * va;
          m2b += wt * vb * vb;
          mab += wt * va * vb;
        }
      }
      s.var_a = m2a - s.mu_a * s.mu_a;
      s.var_b = m2b - s.mu_b * s.mu_b;
      s.cov = mab - s.mu_a * s.mu_b;
      total += ssim_value(s);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double bits_per_pixel(std::size_t stream_bytes, int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("empty raster");
  return 8.0 * static_cast<double>(stream_bytes) /
         (static_cast<double>(width) * static_cast<double>(height));
}

}  // namespace emr
