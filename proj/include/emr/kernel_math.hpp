// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "emr/linalg.hpp"

namespace emr {

enum class KernelKind { Epanechnikov, Gaussian };

// One mixture component Ω = (α, μ, Σ).
struct KernelParams {
  double alpha = 1.0;
  Vec3 mu;
  Sym3 sigma;

  Vec2 mu_xy() const { return {mu.x, mu.y}; }
  Sym2 r_xy() const { return {sigma.xx, sigma.xy, sigma.yy}; }
  double sigma_zx() const { return sigma.xz; }
  double sigma_zy() const { return sigma.yz; }
};

struct MixtureModel {
  KernelKind kind = KernelKind::Epanechnikov;
  std::vector<KernelParams> kernels;
};

// Joint densities.
double ek_density(const Vec3& phi, const KernelParams& k);
double gk_density(const Vec3& phi, const KernelParams& k);

// Spatial marginals over (x, y).
double ek_marginal(const Vec2& delta, const KernelParams& k);
double gk_marginal(const Vec2& delta, const KernelParams& k);

// Affine conditional mean E[z | x, y]; evaluated globally, support handled by
// the gate weights.
double ek_conditional_mean(const Vec2& delta, const KernelParams& k);

// Normalized gate weights; sums to 1.
std::vector<double> gate_weights(const Vec2& delta, const MixtureModel& model);

// Mixture regression at one point.
double regress_point(const Vec2& delta, const MixtureModel& model);

struct Eigen2 {
  double e_small = 0;
  double e_large = 0;
  double eta_deg = 0;  // principal direction of the SMALLER eigenvalue, degrees
};

Eigen2 eigendecompose_2x2(const Sym2& r);
Sym2 reconstruct_R(double e_small, double e_large, double eta_deg);

// Covariance of the axis-aligned unit-coefficient EK with semi-axes (a, b, c).
Sym3 unit_ellipsoid_covariance(double a, double b, double c);

// Eigenvalue-floor regularization, margin 1e-9 * trace, bump 1e-6 * trace /
// dim. The 3-D repair is staged: position block first, then the z variance
// alone, isotropic last. Planar samples must keep their exact regression
// plane, so xx/yy move only when the position support itself is degenerate.
Sym3 regularize_covariance(Sym3 sigma);
Sym2 regularize_position(Sym2 r);

// Precomputed per-kernel coefficients for tight evaluation loops. Produces
// values identical to regress_point; that per-point path stays as the serial
// reference the tests compare against.
struct KernelEval {
  double mx = 0, my = 0;            // mu_xy
  double ri_xx = 0, ri_xy = 0, ri_yy = 0;  // R^-1
  double marg_scale = 0;            // alpha * marginal normalization constant
  double c0 = 0, cx = 0, cy = 0;    // conditional mean plane
  double alpha = 0;
};

struct ModelEval {
  KernelKind kind = KernelKind::Epanechnikov;
  std::vector<KernelEval> k;

  double regress(double x, double y) const;
};

ModelEval make_model_eval(const MixtureModel& model);

}  // namespace emr
