// SPDX-License-Identifier: Apache-2.0
#include "emr/kernel_math.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace emr {

namespace {

constexpr double kPi = std::numbers::pi;

// Support radius of the 3-D EK in Mahalanobis-squared units.
constexpr double kSupport = 7.0;

}  // namespace

double ek_density(const Vec3& phi, const KernelParams& k) {
  double d = det(k.sigma);
  if (!(d > 0) || !std::isfinite(d)) throw std::domain_error("singular covariance");
  Sym3 si = inverse(k.sigma);
  Vec3 c{phi.x - k.mu.x, phi.y - k.mu.y, phi.z - k.mu.z};
  double q = quad_form(si, c);
  if (q > kSupport) return 0.0;
  double scale = 15.0 / (8.0 * kPi * std::sqrt(kSupport * kSupport * kSupport * d));
  return scale * (1.0 - q / kSupport);
}

double gk_density(const Vec3& phi, const KernelParams& k) {
  double d = det(k.sigma);
  if (!(d > 0) || !std::isfinite(d)) throw std::domain_error("singular covariance");
  Sym3 si = inverse(k.sigma);
  Vec3 c{phi.x - k.mu.x, phi.y - k.mu.y, phi.z - k.mu.z};
  double q = quad_form(si, c);
  return std::exp(-0.5 * q) / (std::pow(2.0 * kPi, 1.5) * std::sqrt(d));
}

double ek_marginal(const Vec2& delta, const KernelParams& k) {
  Sym2 r = k.r_xy();
  double d = det(r);
  if (!(d > 0) || !std::isfinite(d)) throw std::domain_error("singular covariance");
  Sym2 ri = inverse(r);
  Vec2 c{delta.x - k.mu.x, delta.y - k.mu.y};
  double q = quad_form(ri, c);
  double b = 1.0 - q / kSupport;
  if (b <= 0.0) return 0.0;
  return 5.0 / (14.0 * kPi * std::sqrt(d)) * b * std::sqrt(b);
}

double gk_marginal(const Vec2& delta, const KernelParams& k) {
  Sym2 r = k.r_xy();
  double d = det(r);
  if (!(d > 0) || !std::isfinite(d)) throw std::domain_error("singular covariance");
  Sym2 ri = inverse(r);
  Vec2 c{delta.x - k.mu.x, delta.y - k.mu.y};
  double q = quad_form(ri, c);
  return std::exp(-0.5 * q) / (2.0 * kPi * std::sqrt(d));
}

double ek_conditional_mean(const Vec2& delta, const KernelParams& k) {
  Sym2 ri = inverse(k.r_xy());
  double dx = delta.x - k.mu.x;
  double dy = delta.y - k.mu.y;
  double gx = ri.xx * dx + ri.xy * dy;
  double gy = ri.xy * dx + ri.yy * dy;
  return k.mu.z + k.sigma_zx() * gx + k.sigma_zy() * gy;
}

std::vector<double> gate_weights(const Vec2& delta, const MixtureModel& model) {
  size_t n = model.kernels.size();
  std::vector<double> w(n);
  double sum = 0.0;
  for (size_t j = 0; j < n; ++j) {
    const KernelParams& k = model.kernels[j];
    double f = model.kind == KernelKind::Epanechnikov ? ek_marginal(delta, k)
                                                      : gk_marginal(delta, k);
    w[j] = k.alpha * f;
    sum += w[j];
  }
  if (sum <= 0.0) {
    // Every marginal vanished (EK sample outside all supports): inverse
    // Mahalanobis-distance routing so the nearest kernel dominates.
    sum = 0.0;
    for (size_t j = 0; j < n; ++j) {
      const KernelParams& k = model.kernels[j];
      Sym2 ri = inverse(k.r_xy());
      Vec2 c{delta.x - k.mu.x, delta.y - k.mu.y};
      w[j] = k.alpha / std::max(quad_form(ri, c), 1e-12);
      sum += w[j];
    }
  }
  for (double& v : w) v /= sum;
  return w;
}

double regress_point(const Vec2& delta, const MixtureModel& model) {
  std::vector<double> w = gate_weights(delta, model);
  double out = 0.0;
  for (size_t j = 0; j < model.kernels.size(); ++j)
    out += w[j] * ek_conditional_mean(delta, model.kernels[j]);
  return out;
}

Eigen2 eigendecompose_2x2(const Sym2& r) {
  double scale = std::max({std::abs(r.xx), std::abs(r.yy), std::abs(r.xy)});
  if (r.xx < -1e-12 * scale || r.yy < -1e-12 * scale || det(r) < -1e-9 * scale * scale)
    throw std::domain_error("non-PSD position covariance");
  double half_tr = 0.5 * (r.xx + r.yy);
  double disc = std::hypot(0.5 * (r.xx - r.yy), r.xy);
  Eigen2 out;
  out.e_small = std::max(0.0, half_tr - disc);
  out.e_large = half_tr + disc;
  if (disc <= 1e-9 * std::abs(half_tr) || disc == 0.0) {
    out.eta_deg = 0.0;
    return out;
  }
  double vx, vy;
  if (r.xy != 0.0) {
    // Null vector of (R - e_small I), picked from the better-conditioned row.
    vx = r.xy;
    vy = out.e_small - r.xx;
    double wx = out.e_small - r.yy;
    double wy = r.xy;
    if (wx * wx + wy * wy > vx * vx + vy * vy) {
      vx = wx;
      vy = wy;
    }
  } else {
    vx = r.xx <= r.yy ? 1.0 : 0.0;
    vy = r.xx <= r.yy ? 0.0 : 1.0;
  }
  double eta = std::atan2(vy, vx) * 180.0 / kPi;
  if (eta > 90.0) eta -= 180.0;
  if (eta <= -90.0) eta += 180.0;
  if (eta >= 90.0) eta = 90.0 - 1e-9;
  out.eta_deg = eta;
  return out;
}

Sym2 reconstruct_R(double e_small, double e_large, double eta_deg) {
  double t = eta_deg * kPi / 180.0;
  double c = std::cos(t);
  double s = std::sin(t);
  return {e_small * c * c + e_large * s * s, (e_small - e_large) * c * s,
          e_small * s * s + e_large * c * c};
}

Sym3 unit_ellipsoid_covariance(double a, double b, double c) {
  Sym3 m;
  m.xx = a * a / 7.0;
  m.yy = b * b / 7.0;
  m.zz = c * c / 7.0;
  return m;
}

namespace {

bool pd_with_margin(const Sym3& s, double tau) {
  Sym3 shifted = s;
  shifted.xx -= tau;
  shifted.yy -= tau;
  shifted.zz -= tau;
  return positive_definite(shifted);
}

}  // namespace

Sym3 regularize_covariance(Sym3 sigma) {
  double tr = trace(sigma);
  if (!(tr > 0)) {
    double eps = 1e-9;
    sigma.xx += eps;
    sigma.yy += eps;
    sigma.zz += eps;
    return sigma;
  }
  // Stage 1: the position block. The conditional mean never reads sigma.zz,
  // so repairs go there first; only a degenerate position support may touch
  // the xx/yy diagonal.
  Sym2 r{sigma.xx, sigma.xy, sigma.yy};
  Sym2 rr = regularize_position(r);
  sigma.xx = rr.xx;
  sigma.yy = rr.yy;
  double tau = 1e-9 * tr;
  if (pd_with_margin(sigma, tau)) return sigma;
  // Stage 2: z-variance bump. Exactly planar samples land here; their fitted
  // regression plane must stay untouched.
  sigma.zz += 1e-6 * tr / 3.0;
  if (pd_with_margin(sigma, 0.0)) return sigma;
  // Stage 3: isotropic fallback for pathological cross terms.
  double eps = 1e-6 * tr / 3.0;
  sigma.xx += eps;
  sigma.yy += eps;
  sigma.zz += eps;
  return sigma;
}

Sym2 regularize_position(Sym2 r) {
  double tr = trace(r);
  if (!(tr > 0)) {
    r.xx += 1e-9;
    r.yy += 1e-9;
    return r;
  }
  double tau = 1e-9 * tr;
  double half_tr = 0.5 * (r.xx + r.yy);
  double disc = std::hypot(0.5 * (r.xx - r.yy), r.xy);
  if (half_tr - disc < tau) {
    double eps = 1e-6 * tr / 2.0;
    r.xx += eps;
    r.yy += eps;
  }
  return r;
}

double ModelEval::regress(double x, double y) const {
  double sw = 0.0, sm = 0.0;
  if (kind == KernelKind::Epanechnikov) {
    for (const KernelEval& e : k) {
      double dx = x - e.mx, dy = y - e.my;
      double q = e.ri_xx * dx * dx + 2.0 * e.ri_xy * dx * dy + e.ri_yy * dy * dy;
      double b = 1.0 - q / kSupport;
      if (b <= 0.0) continue;
      double w = e.marg_scale * b * std::sqrt(b);
      sw += w;
      sm += w * (e.c0 + e.cx * x + e.cy * y);
    }
  } else {
    for (const KernelEval& e : k) {
      double dx = x - e.mx, dy = y - e.my;
      double q = e.ri_xx * dx * dx + 2.0 * e.ri_xy * dx * dy + e.ri_yy * dy * dy;
      double w = e.marg_scale * std::exp(-0.5 * q);
      sw += w;
      sm += w * (e.c0 + e.cx * x + e.cy * y);
    }
  }
  if (sw <= 0.0) {
    // Same fallback as gate_weights.
    sw = 0.0;
    sm = 0.0;
    for (const KernelEval& e : k) {
      double dx = x - e.mx, dy = y - e.my;
      double q = e.ri_xx * dx * dx + 2.0 * e.ri_xy * dx * dy + e.ri_yy * dy * dy;
      double w = e.alpha / std::max(q, 1e-12);
      sw += w;
      sm += w * (e.c0 + e.cx * x + e.cy * y);
    }
  }
  return sm / sw;
}

ModelEval make_model_eval(const MixtureModel& model) {
  ModelEval ev;
  ev.kind = model.kind;
  ev.k.reserve(model.kernels.size());
  for (const KernelParams& kp : model.kernels) {
    Sym2 r = kp.r_xy();
    double d = det(r);
    if (!(d > 0) || !std::isfinite(d)) throw std::domain_error("singular covariance");
    Sym2 ri = inverse(r);
    KernelEval e;
    e.mx = kp.mu.x;
    e.my = kp.mu.y;
    e.ri_xx = ri.xx;
    e.ri_xy = ri.xy;
    e.ri_yy = ri.yy;
    e.alpha = kp.alpha;
    e.marg_scale = model.kind == KernelKind::Epanechnikov
                       ? kp.alpha * 5.0 / (14.0 * kPi * std::sqrt(d))
                       : kp.alpha / (2.0 * kPi * std::sqrt(d));
    double gx_x = ri.xx, gx_y = ri.xy;
    double gy_x = ri.xy, gy_y = ri.yy;
    e.cx = kp.sigma_zx() * gx_x + kp.sigma_zy() * gy_x;
    e.cy = kp.sigma_zx() * gx_y + kp.sigma_zy() * gy_y;
    e.c0 = kp.mu.z - e.cx * kp.mu.x - e.cy * kp.mu.y;
    ev.k.push_back(e);
  }
  return ev;
}

}  // namespace emr
