// SPDX-License-Identifier: Apache-2.0
#include "emr/mixture_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "emr/rng.hpp"

namespace emr {

namespace {

constexpr double kSupport = 7.0;

double dist2(const Vec3& a, const Vec3& b) {
  double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

// Mean and covariance of samples under weights w (w may be null for unit
// weights). Two-pass for stability; deterministic order.
KernelParams weighted_moments(const std::vector<Vec3>& s, const double* w, size_t stride,
                              double wsum) {
  KernelParams k;
  double sx = 0, sy = 0, sz = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    double q = w ? w[i * stride] : 1.0;
    sx += q * s[i].x;
    sy += q * s[i].y;
    sz += q * s[i].z;
  }
  k.mu = {sx / wsum, sy / wsum, sz / wsum};
  Sym3 c;
  for (size_t i = 0; i < s.size(); ++i) {
    double q = w ? w[i * stride] : 1.0;
    double dx = s[i].x - k.mu.x, dy = s[i].y - k.mu.y, dz = s[i].z - k.mu.z;
    c.xx += q * dx * dx;
    c.xy += q * dx * dy;
    c.xz += q * dx * dz;
    c.yy += q * dy * dy;
    c.yz += q * dy * dz;
    c.zz += q * dz * dz;
  }
  c.xx /= wsum;
  c.xy /= wsum;
  c.xz /= wsum;
  c.yy /= wsum;
  c.yz /= wsum;
  c.zz /= wsum;
  k.sigma = regularize_covariance(c);
  return k;
}

// Per-kernel precomputation for the E-step.
struct JointEval {
  Sym3 inv;
  double scale = 0;     // EK: alpha * density constant
  double log_w = 0;     // GK: log(alpha) - 0.5 log((2pi)^3 det)
  Vec3 mu;
};

std::vector<JointEval> make_joint_evals(const MixtureModel& m) {
  std::vector<JointEval> evs;
  evs.reserve(m.kernels.size());
  for (const KernelParams& k : m.kernels) {
    double d = det(k.sigma);
    if (!(d > 0) || !std::isfinite(d)) throw std::domain_error("singular covariance");
    JointEval e;
    e.inv = inverse(k.sigma);
    e.mu = k.mu;
    if (m.kind == KernelKind::Epanechnikov) {
      e.scale = k.alpha * 15.0 / (8.0 * std::numbers::pi * std::sqrt(343.0 * d));
    } else {
      double la = k.alpha > 0 ? std::log(k.alpha) : -std::numeric_limits<double>::infinity();
      e.log_w = la - 1.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(d);
    }
    evs.push_back(e);
  }
  return evs;
}

}  // namespace

std::vector<Vec3> block_to_samples(const Block& block) {
  std::vector<Vec3> s;
  s.reserve((size_t)block.width * block.height);
  for (int r = 0; r < block.height; ++r)
    for (int c = 0; c < block.width; ++c)
      s.push_back({(double)c, (double)r, block.at(r, c)});
  return s;
}

MixtureModel kmeanspp_init(const std::vector<Vec3>& samples, int k, KernelKind kind,
                           uint64_t seed) {
  const size_t n = samples.size();
  if (k < 1 || (size_t)k > n) throw std::invalid_argument("bad cluster count");
  Rng rng(seed);

  std::vector<Vec3> centers;
  centers.reserve(k);
  centers.push_back(samples[rng.below(n)]);
  std::vector<double> d2(n);
  for (int j = 1; j < k; ++j) {
    double total = 0;
    for (size_t i = 0; i < n; ++i) {
      double best = dist2(samples[i], centers[0]);
      for (size_t c = 1; c < centers.size(); ++c) best = std::min(best, dist2(samples[i], centers[c]));
      d2[i] = best;
      total += best;
    }
    if (total <= 0) {
      centers.push_back(samples[rng.below(n)]);
      continue;
    }
    double r = rng.u01() * total;
    double acc = 0;
    size_t pick = n - 1;
    for (size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc >= r) {
        pick = i;
        break;
      }
    }
    centers.push_back(samples[pick]);
  }

  std::vector<int> assign(n, 0);
  std::vector<double> near(n, 0);
  for (int iter = 0; iter < 25; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = dist2(samples[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        double d = dist2(samples[i], centers[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      near[i] = bd;
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    std::vector<int> count(k, 0);
    for (size_t i = 0; i < n; ++i) ++count[assign[i]];
    bool reseeded = false;
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) {
        size_t far = std::max_element(near.begin(), near.end()) - near.begin();
        centers[c] = samples[far];
        near[far] = 0;
        reseeded = true;
      }
    }
    if (reseeded) continue;
    if (!changed && iter > 0) break;
    std::vector<Vec3> sums(k, Vec3{});
    for (size_t i = 0; i < n; ++i) {
      sums[assign[i]].x += samples[i].x;
      sums[assign[i]].y += samples[i].y;
      sums[assign[i]].z += samples[i].z;
    }
    for (int c = 0; c < k; ++c)
      centers[c] = {sums[c].x / count[c], sums[c].y / count[c], sums[c].z / count[c]};
  }

  // Guarantee nonempty clusters: move the farthest member of the largest
  // cluster into each empty one.
  std::vector<int> count(k, 0);
  for (size_t i = 0; i < n; ++i) ++count[assign[i]];
  for (int c = 0; c < k; ++c) {
    while (count[c] == 0) {
      int big = std::max_element(count.begin(), count.end()) - count.begin();
      size_t steal = n;
      double bd = -1;
      for (size_t i = 0; i < n; ++i) {
        if (assign[i] != big) continue;
        double d = dist2(samples[i], centers[big]);
        if (d > bd) {
          bd = d;
          steal = i;
        }
      }
      assign[steal] = c;
      --count[big];
      ++count[c];
    }
  }

  MixtureModel model;
  model.kind = kind;
  model.kernels.resize(k);
  std::vector<double> w(n);
  for (int c = 0; c < k; ++c) {
    for (size_t i = 0; i < n; ++i) w[i] = assign[i] == c ? 1.0 : 0.0;
    KernelParams kp = weighted_moments(samples, w.data(), 1, count[c]);
    kp.alpha = (double)count[c] / n;
    model.kernels[c] = kp;
  }
  return model;
}

std::vector<double> e_step(const std::vector<Vec3>& samples, const MixtureModel& model) {
  const size_t n = samples.size();
  const size_t k = model.kernels.size();
  std::vector<JointEval> evs = make_joint_evals(model);
  std::vector<double> q(n * k);
  std::vector<double> row(k);
  for (size_t i = 0; i < n; ++i) {
    double sum = 0;
    if (model.kind == KernelKind::Epanechnikov) {
      for (size_t j = 0; j < k; ++j) {
        Vec3 d{samples[i].x - evs[j].mu.x, samples[i].y - evs[j].mu.y,
               samples[i].z - evs[j].mu.z};
        double qf = quad_form(evs[j].inv, d);
        row[j] = qf <= kSupport ? evs[j].scale * (1.0 - qf / kSupport) : 0.0;
        sum += row[j];
      }
    } else {
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < k; ++j) {
        Vec3 d{samples[i].x - evs[j].mu.x, samples[i].y - evs[j].mu.y,
               samples[i].z - evs[j].mu.z};
        row[j] = evs[j].log_w - 0.5 * quad_form(evs[j].inv, d);
        mx = std::max(mx, row[j]);
      }
      if (std::isfinite(mx)) {
        for (size_t j = 0; j < k; ++j) {
          row[j] = std::exp(row[j] - mx);
          sum += row[j];
        }
      }
    }
    if (sum <= 0) {
      for (size_t j = 0; j < k; ++j) q[i * k + j] = 1.0 / k;
    } else {
      for (size_t j = 0; j < k; ++j) q[i * k + j] = row[j] / sum;
    }
  }
  return q;
}

MixtureModel m_step(const std::vector<Vec3>& samples, const std::vector<double>& q, int k,
                    KernelKind kind, const MixtureModel* prev) {
  const size_t n = samples.size();
  MixtureModel model;
  model.kind = kind;
  model.kernels.resize(k);
  double alpha_sum = 0;
  for (int j = 0; j < k; ++j) {
    double s0 = 0;
    for (size_t i = 0; i < n; ++i) s0 += q[i * k + j];
    KernelParams kp;
    if (s0 < 1e-12 * n) {
      // Dead column: keep the previous shape, floor the weight.
      if (prev && (size_t)j < prev->kernels.size()) {
        kp = prev->kernels[j];
      } else {
        kp = weighted_moments(samples, nullptr, 1, (double)n);
      }
      kp.alpha = 1e-12;
    } else {
      kp = weighted_moments(samples, q.data() + j, k, s0);
      kp.alpha = s0 / n;
    }
    alpha_sum += kp.alpha;
    model.kernels[j] = kp;
  }
  for (KernelParams& kp : model.kernels) kp.alpha /= alpha_sum;
  return model;
}

std::vector<double> regress_block(const MixtureModel& model, int width, int height) {
  ModelEval ev = make_model_eval(model);
  std::vector<double> out((size_t)width * height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) out[(size_t)r * width + c] = ev.regress(c, r);
  return out;
}

double block_mse(const MixtureModel& model, const Block& block) {
  ModelEval ev = make_model_eval(model);
  double sse = 0;
  for (int r = block.core.row0; r < block.core.row1(); ++r)
    for (int c = block.core.col0; c < block.core.col1(); ++c) {
      double e = ev.regress(c, r) - block.at(r, c);
      sse += e * e;
    }
  return sse / (double)block.core.area();
}

FitResult fit_block(const Block& block, int k, KernelKind kind, uint64_t seed) {
  if (block.core.empty()) throw std::invalid_argument("empty core");
  std::vector<Vec3> samples = block_to_samples(block);
  FitResult out;
  int keff = std::min<int>(k, (int)samples.size());
  out.k_reduced = keff < k;

  MixtureModel cur = kmeanspp_init(samples, keff, kind, seed);
  out.model = cur;
  out.mse = block_mse(cur, block);
  out.iterations_used = 1;
  out.mse_trace.push_back(out.mse);
  for (int t = 2; t <= 8; ++t) {
    std::vector<double> q = e_step(samples, cur);
    cur = m_step(samples, q, keff, kind, &cur);
    double m = block_mse(cur, block);
    out.mse_trace.push_back(m);
    if (m < out.mse) {
      out.mse = m;
      out.model = cur;
      out.iterations_used = t;
    }
  }
  return out;
}

FitResult single_kernel_fit(const Block& block, KernelKind kind) {
  if (block.core.empty()) throw std::invalid_argument("empty core");
  std::vector<Vec3> samples = block_to_samples(block);
  KernelParams kp = weighted_moments(samples, nullptr, 1, (double)samples.size());
  kp.alpha = 1.0;
  FitResult out;
  out.model.kind = kind;
  out.model.kernels = {kp};
  out.mse = block_mse(out.model, block);
  out.iterations_used = 1;
  out.mse_trace.push_back(out.mse);
  return out;
}

KernelKind single_kernel_kind(int blocksize) {
  return blocksize <= 16 ? KernelKind::Epanechnikov : KernelKind::Gaussian;
}

}  // namespace emr
