// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one [PASS]/[FAIL] line per criterion, nonzero exit when a
// hard criterion fails. Oracles here are independent re-derivations (Monte
// Carlo, quadrature, rejection sampling, brute-force enumeration); they never
// call the code path they are checking to produce the expected value.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "emr/bitstream.hpp"
#include "emr/codec.hpp"
#include "emr/experiments.hpp"
#include "emr/image_pipeline.hpp"
#include "emr/kernel_math.hpp"
#include "emr/metrics.hpp"
#include "emr/mixture_regression.hpp"
#include "emr/mode_selection.hpp"
#include "emr/quant.hpp"
#include "emr/rng.hpp"

using namespace emr;

namespace {

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = true;
  std::string detail;              // one-line summary, shown on the status line
  std::vector<std::string> notes;  // extra lines, indented under the status
  void fail(const std::string& why) {
    pass = false;
    notes.push_back("FAIL: " + why);
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, ...) {
  va_list ap;
  va_start(ap, f);
  char buf[512];
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared synthesis helpers.

// SPD covariance with bounded correlations; Gershgorin keeps it PD.
Sym3 random_spd3(Rng& rng, double corr) {
  double d0 = 0.5 + 25.0 * rng.u01();
  double d1 = 0.5 + 25.0 * rng.u01();
  double d2 = 0.5 + 25.0 * rng.u01();
  Sym3 s;
  s.xx = d0;
  s.yy = d1;
  s.zz = d2;
  s.xy = (2.0 * rng.u01() - 1.0) * corr * std::sqrt(d0 * d1);
  s.xz = (2.0 * rng.u01() - 1.0) * corr * std::sqrt(d0 * d2);
  s.yz = (2.0 * rng.u01() - 1.0) * corr * std::sqrt(d1 * d2);
  return s;
}

// Smooth field with blobs, an oriented sinusoid, a soft edge, and mild noise;
// stands in for natural content at desk scale.
PlaneImage synth_plane(int w, int h, uint64_t seed) {
  Rng rng(seed);
  PlaneImage p = make_plane(w, h);
  double gx = 40.0 * (2.0 * rng.u01() - 1.0) / std::max(1, w);
  double gy = 40.0 * (2.0 * rng.u01() - 1.0) / std::max(1, h);
  double base = 70.0 + 110.0 * rng.u01();
  double fx = (0.5 + 2.5 * rng.u01()) * 2.0 * 3.14159265358979 / w;
  double fy = (0.5 + 2.5 * rng.u01()) * 2.0 * 3.14159265358979 / h;
  double amp = 8.0 + 22.0 * rng.u01();
  struct Blob {
    double r, c, s, a;
  };
  std::vector<Blob> blobs;
  int nb = 4 + (int)rng.below(5);
  for (int i = 0; i < nb; ++i)
    blobs.push_back({h * rng.u01(), w * rng.u01(), 4.0 + 18.0 * rng.u01(),
                     (2.0 * rng.u01() - 1.0) * 70.0});
  double edge_col = w * (0.25 + 0.5 * rng.u01());
  double edge_amp = (2.0 * rng.u01() - 1.0) * 50.0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double v = base + gx * c * 40.0 / 40.0 + gy * r + amp * std::sin(fx * c + fy * r);
      for (const Blob& b : blobs) {
        double dr = r - b.r, dc = c - b.c;
        v += b.a * std::exp(-(dr * dr + dc * dc) / (2.0 * b.s * b.s));
      }
      v += edge_amp / (1.0 + std::exp(-(c - edge_col) / 1.5));
      v += 2.0 * (2.0 * rng.u01() - 1.0);
      p.at(r, c) = std::clamp(v, 0.0, 255.0);
    }
  return p;
}

ImageU8 synth_image(int w, int h, int channels, uint64_t seed) {
  ImageU8 img = make_image(w, h, channels);
  for (int ch = 0; ch < channels; ++ch) {
    PlaneImage p = synth_plane(w, h, mix_seed(seed, {(uint64_t)ch}));
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) img.at(r, c, ch) = quantize_pixel(p.at(r, c));
  }
  return img;
}

Block planar_block(int n, double a, double b, double c) {
  Block blk;
  blk.width = n;
  blk.height = n;
  blk.core = {0, 0, n, n};
  blk.pixels.resize((size_t)n * n);
  for (int r = 0; r < n; ++r)
    for (int col = 0; col < n; ++col) blk.pixels[(size_t)r * n + col] = a + b * col + c * r;
  return blk;
}

Block textured_block(int n, Rng& rng) {
  Block blk;
  blk.width = n;
  blk.height = n;
  blk.core = {0, 0, n, n};
  blk.pixels.resize((size_t)n * n);
  double base = 50.0 + 150.0 * rng.u01();
  double gx = 6.0 * (2.0 * rng.u01() - 1.0);
  double gy = 6.0 * (2.0 * rng.u01() - 1.0);
  double br = n * rng.u01(), bc = n * rng.u01();
  double ba = (2.0 * rng.u01() - 1.0) * 90.0, bs = 2.0 + 5.0 * rng.u01();
  for (int r = 0; r < n; ++r)
    for (int col = 0; col < n; ++col) {
      double v = base + gx * col + gy * r +
                 ba * std::exp(-((r - br) * (r - br) + (col - bc) * (col - bc)) / (2 * bs * bs)) +
                 6.0 * (2.0 * rng.u01() - 1.0);
      blk.pixels[(size_t)r * n + col] = std::clamp(v, 0.0, 255.0);
    }
  return blk;
}

// ---------------------------------------------------------------------------
// Criterion 1: Monte-Carlo normalization of the 3-D EK.

void crit_normalization(Criterion& cr) {
  double t0 = now_s();
  Rng rng(20260819);
  const int kSamples = 1200000;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    KernelParams k;
    k.alpha = 1.0;
    k.mu = {10.0 * (2.0 * rng.u01() - 1.0), 10.0 * (2.0 * rng.u01() - 1.0),
            10.0 * (2.0 * rng.u01() - 1.0)};
    k.sigma = random_spd3(rng, 0.25);
    double hx = std::sqrt(7.0 * k.sigma.xx);
    double hy = std::sqrt(7.0 * k.sigma.yy);
    double hz = std::sqrt(7.0 * k.sigma.zz);
    double vol = 8.0 * hx * hy * hz;
    double acc = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      Vec3 p{k.mu.x + (2.0 * rng.u01() - 1.0) * hx, k.mu.y + (2.0 * rng.u01() - 1.0) * hy,
             k.mu.z + (2.0 * rng.u01() - 1.0) * hz};
      acc += ek_density(p, k);
    }
    double integral = vol * acc / kSamples;
    worst = std::max(worst, std::abs(integral - 1.0));
    cr.expect(integral >= 0.99 && integral <= 1.01,
              fmt("trial %d: integral %.6f outside [0.99, 1.01]", trial, integral));
  }
  double dt = now_s() - t0;
  cr.expect(dt < 30.0, fmt("runtime %.1f s exceeds 30 s", dt));
  cr.detail = fmt("max |integral-1| = %.2e over 20 covariances, %d samples each, %.1f s", worst,
                  kSamples, dt);
}

// ---------------------------------------------------------------------------
// Criterion 2: sampling covariance of the axis-aligned EK.

void crit_sampling_covariance(Criterion& cr) {
  Rng rng(777001);
  const double triples[3][3] = {{1, 1, 1}, {2, 1, 0.5}, {3, 1.5, 0.75}};
  double worst_rel = 0.0, worst_off = 0.0;
  for (const double* t : triples) {
    double a = t[0], b = t[1], c = t[2];
    Sym3 want = unit_ellipsoid_covariance(a, b, c);
    cr.expect(std::abs(want.xx - a * a / 7.0) < 1e-15 && want.xy == 0.0 && want.xz == 0.0 &&
                  std::abs(want.yy - b * b / 7.0) < 1e-15 && want.yz == 0.0 &&
                  std::abs(want.zz - c * c / 7.0) < 1e-15,
              "unit_ellipsoid_covariance is not diag(a^2,b^2,c^2)/7");
    const long long kWant = 1000000;
    long long n = 0;
    double sx = 0, sy = 0, sz = 0;
    double sxx = 0, syy = 0, szz = 0, sxy = 0, sxz = 0, syz = 0;
    while (n < kWant) {
      double u = 2.0 * rng.u01() - 1.0;
      double v = 2.0 * rng.u01() - 1.0;
      double w = 2.0 * rng.u01() - 1.0;
      double q = u * u + v * v + w * w;
      if (q >= 1.0 || rng.u01() >= (1.0 - q)) continue;
      double x = a * u, y = b * v, z = c * w;
      ++n;
      sx += x;
      sy += y;
      sz += z;
      sxx += x * x;
      syy += y * y;
      szz += z * z;
      sxy += x * y;
      sxz += x * z;
      syz += y * z;
    }
    double inv = 1.0 / kWant;
    double mx = sx * inv, my = sy * inv, mz = sz * inv;
    double cxx = sxx * inv - mx * mx;
    double cyy = syy * inv - my * my;
    double czz = szz * inv - mz * mz;
    double cxy = sxy * inv - mx * my;
    double cxz = sxz * inv - mx * mz;
    double cyz = syz * inv - my * mz;
    double maxdiag = std::max({want.xx, want.yy, want.zz});
    double rel = std::max({std::abs(cxx - want.xx) / want.xx, std::abs(cyy - want.yy) / want.yy,
                           std::abs(czz - want.zz) / want.zz});
    double off = std::max({std::abs(cxy), std::abs(cxz), std::abs(cyz)});
    worst_rel = std::max(worst_rel, rel);
    worst_off = std::max(worst_off, off / maxdiag);
    cr.expect(rel < 0.02, fmt("(%g,%g,%g): diagonal off by %.3f%%", a, b, c, 100 * rel));
    cr.expect(off < 0.01 * maxdiag,
              fmt("(%g,%g,%g): off-diagonal %.2e vs max diagonal %.2e", a, b, c, off, maxdiag));
  }
  cr.detail = fmt("3 triples, 1e6 draws each: worst diag error %.3f%%, worst |offdiag|/maxdiag %.4f",
                  100 * worst_rel, worst_off);
}

// ---------------------------------------------------------------------------
// Criterion 3: z-quadrature of the joint matches the marginal and the
// conditional mean. The integrand is polynomial in z on the support interval,
// so composite Simpson on the exact roots is machine-accurate.

void crit_marginal_conditional(Criterion& cr) {
  Rng rng(555123);
  double worst_m = 0.0, worst_c = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    KernelParams k;
    k.alpha = 1.0;
    k.mu = {20.0 * rng.u01(), 20.0 * rng.u01(), 100.0 + 100.0 * rng.u01()};
    k.sigma = random_spd3(rng, 0.4);
    Sym3 si = inverse(k.sigma);
    Sym2 r = k.r_xy();
    Eigen2 eg = eigendecompose_2x2(r);
    double w = std::sqrt(7.0 * eg.e_small / 2.0);  // axis-aligned inscribed box
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        double dx = w * (-0.9 + 1.8 * i / 9.0);
        double dy = w * (-0.9 + 1.8 * j / 9.0);
        Vec2 pos{k.mu.x + dx, k.mu.y + dy};
        // q(dz) = a2 dz^2 + b2 dz + c2; support where q <= 7.
        double a2 = si.zz;
        double b2 = 2.0 * (si.xz * dx + si.yz * dy);
        double c2 = si.xx * dx * dx + 2.0 * si.xy * dx * dy + si.yy * dy * dy;
        double disc = b2 * b2 - 4.0 * a2 * (c2 - 7.0);
        cr.expect(disc > 0.0, "grid point unexpectedly outside spatial support");
        if (disc <= 0.0) continue;
        double z1 = (-b2 - std::sqrt(disc)) / (2.0 * a2);
        double z2 = (-b2 + std::sqrt(disc)) / (2.0 * a2);
        const int kPanels = 256;
        double h = (z2 - z1) / kPanels;
        double s0 = 0.0, s1 = 0.0;  // Simpson sums for f and z*f
        for (int m = 0; m <= kPanels; ++m) {
          double dz = z1 + h * m;
          double z = k.mu.z + dz;
          double f = ek_density({pos.x, pos.y, z}, k);
          double wgt = (m == 0 || m == kPanels) ? 1.0 : (m % 2 ? 4.0 : 2.0);
          s0 += wgt * f;
          s1 += wgt * z * f;
        }
        double quad_marg = s0 * h / 3.0;
        double quad_num = s1 * h / 3.0;
        double marg = ek_marginal(pos, k);
        double cmean = ek_conditional_mean(pos, k);
        double em = std::abs(quad_marg - marg) / marg;
        double ec = std::abs(quad_num / quad_marg - cmean) / std::abs(cmean);
        worst_m = std::max(worst_m, em);
        worst_c = std::max(worst_c, ec);
        cr.expect(em <= 1e-6, fmt("trial %d: marginal relative error %.2e", trial, em));
        cr.expect(ec <= 1e-6, fmt("trial %d: conditional mean relative error %.2e", trial, ec));
      }
  }
  cr.detail = fmt("10 kernels x 100 grid points: worst marginal rel err %.2e, conditional %.2e",
                  worst_m, worst_c);
}

// ---------------------------------------------------------------------------
// Criterion 4: noiseless planes reconstruct exactly with one kernel.

void crit_planar_exactness(Criterion& cr) {
  Rng rng(424242);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    double a = 80.0 + 70.0 * rng.u01();
    double b = 4.0 * rng.u01() - 2.0;
    double c = 4.0 * rng.u01() - 2.0;
    Block blk = planar_block(16, a, b, c);
    KernelKind kind = trial % 2 ? KernelKind::Gaussian : KernelKind::Epanechnikov;
    FitResult fit = single_kernel_fit(blk, kind);
    std::vector<double> rec = regress_block(fit.model, blk.width, blk.height);
    double err = 0.0;
    for (size_t i = 0; i < rec.size(); ++i) err = std::max(err, std::abs(rec[i] - blk.pixels[i]));
    worst = std::max(worst, err);
    cr.expect(err <= 1e-9, fmt("trial %d: closed-form max abs error %.2e", trial, err));
    if (trial % 10 == 0) {
      FitResult em = fit_block(blk, 1, kind, 17 + trial);
      std::vector<double> rec2 = regress_block(em.model, blk.width, blk.height);
      double err2 = 0.0;
      for (size_t i = 0; i < rec2.size(); ++i)
        err2 = std::max(err2, std::abs(rec2[i] - blk.pixels[i]));
      worst = std::max(worst, err2);
      cr.expect(err2 <= 1e-9, fmt("trial %d: K=1 EM-path max abs error %.2e", trial, err2));
    }
  }
  cr.detail = fmt("50 random planes, K=1: worst max-abs reconstruction error %.2e", worst);
}

// ---------------------------------------------------------------------------
// Criterion 5: the fitted MSE is the minimum of the recorded trace.

void crit_trace_selection(Criterion& cr) {
  Rng rng(98765);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Block blk = textured_block(16, rng);
    int k = 2 + trial % 4;
    KernelKind kind = trial % 2 ? KernelKind::Gaussian : KernelKind::Epanechnikov;
    FitResult fit = fit_block(blk, k, kind, 1000 + trial);
    cr.expect(fit.mse_trace.size() == 8, fmt("trial %d: trace has %zu entries, expected 8", trial,
                                             fit.mse_trace.size()));
    double lo = *std::min_element(fit.mse_trace.begin(), fit.mse_trace.end());
    cr.expect(fit.mse == lo, fmt("trial %d: mse %.17g != trace minimum %.17g", trial, fit.mse, lo));
    cr.expect(fit.mse <= fit.mse_trace.front(),
              fmt("trial %d: mse exceeds initialization MSE", trial));
    cr.expect(fit.iterations_used >= 1 && fit.iterations_used <= (int)fit.mse_trace.size() &&
                  fit.mse_trace[fit.iterations_used - 1] == fit.mse,
              fmt("trial %d: iterations_used does not point at the selected MSE", trial));
    ++checked;
  }
  cr.detail = fmt("%d random 16x16 fits: returned MSE == trace minimum <= init MSE", checked);
}

// ---------------------------------------------------------------------------
// Criterion 6: the mode-selection DP equals brute-force enumeration.

std::vector<double> unit_js(const UnitCandidates& u, int ch, int bs, bool include_b, double lambda,
                            const QuantGrid& grid) {
  ModeMeta meta;
  meta.ch_idx = ch;
  meta.blocksize = bs;
  meta.include_b = include_b;
  meta.block = &u.block;
  meta.grid = &grid;
  std::vector<double> out;
  out.reserve(u.fits.size());
  for (const CandidateFit& f : u.fits) out.push_back(rd_cost(f.fit, meta, lambda).j_value);
  return out;
}

// Every legal tree: leaf64 candidates, or per present quad one leaf32
// candidate or a full set of leaf16 candidates. Sums fold left-to-right in
// quadrant / piece order; candidates never reorder.
double enumerate_best_j(const RegionCandidates& cands, int ch, double lambda,
                        const QuantGrid& grid) {
  std::vector<double> tree_sums{0.0};
  bool any_quad = false;
  for (int q = 0; q < 4; ++q) {
    if (!cands.l32[q]) continue;
    any_quad = true;
    std::vector<double> opts = unit_js(*cands.l32[q], ch, 32, true, lambda, grid);
    std::vector<double> group{lambda * (double)b_bits(16)};
    for (int p = 0; p < 4; ++p) {
      if (!cands.l16[q][p]) continue;
      std::vector<double> js = unit_js(*cands.l16[q][p], ch, 16, false, lambda, grid);
      std::vector<double> next;
      next.reserve(group.size() * js.size());
      for (double g : group)
        for (double j : js) next.push_back(g + j);
      group = std::move(next);
    }
    opts.insert(opts.end(), group.begin(), group.end());
    std::vector<double> next;
    next.reserve(tree_sums.size() * opts.size());
    for (double s : tree_sums)
      for (double o : opts) next.push_back(s + o);
    tree_sums = std::move(next);
  }
  std::vector<double> l64 = unit_js(cands.l64, ch, 64, true, lambda, grid);
  double best = *std::min_element(l64.begin(), l64.end());
  if (any_quad) best = std::min(best, *std::min_element(tree_sums.begin(), tree_sums.end()));
  return best;
}

void crit_mode_selection(Criterion& cr) {
  const AmsLimits limits{2, 2, 2};
  const int ol = 3;
  const double lambdas[4] = {1.0, 120.0, 2600.0, 45000.0};
  int regions_checked = 0;
  for (int pl = 0; pl < 5; ++pl) {
    PlaneImage plane = synth_plane(128, 128, 6000 + pl);
    std::vector<TileGeom> regions = tile_regions(plane.width, plane.height, ol);
    std::vector<RegionCandidates> cands;
    GridRanges ranges;
    for (const TileGeom& rg : regions) {
      cands.push_back(
          compute_region_candidates(plane, rg, 0, limits, ol, mix_seed(4400, {(uint64_t)pl, (uint64_t)cands.size()})));
      accumulate_grid_ranges(cands.back(), 0, &ranges);
    }
    QuantGrid grid = build_quant_grid(ranges);
    for (size_t i = 0; i < cands.size(); ++i) {
      double lambda = lambdas[(pl + i) % 4];
      ModeTree tree = select_mode_tree(cands[i], 0, lambda, grid);
      double want = enumerate_best_j(cands[i], 0, lambda, grid);
      cr.expect(tree.j_value == want,
                fmt("plane %d region %zu lambda %g: DP J %.17g != enumeration %.17g", pl, i,
                    lambda, tree.j_value, want));
      double recon = tree.distortion + lambda * (double)tree.rate_bits;
      cr.expect(std::abs(tree.j_value - recon) <= 1e-9 * std::max(1.0, std::abs(tree.j_value)),
                fmt("plane %d region %zu: J != D + lambda*R beyond 1e-9", pl, i));
      ++regions_checked;
    }
  }
  cr.detail = fmt("%d regions (limits 2/2/2, 4 lambdas): DP == full enumeration bit-exact",
                  regions_checked);
}

// ---------------------------------------------------------------------------
// Criterion 7: bitstream round-trips.

struct RegEncode {
  EncodeResult res;
  int w = 0, h = 0;
};

bool leaf_equal(const LeafChoice& a, const DecodedLeaf& b, std::string* why) {
  if (a.blocksize != b.blocksize || a.kind != b.kind || a.nm != b.nm) {
    *why = "leaf shape mismatch";
    return false;
  }
  if (!(a.core == b.core) || !(a.ext == b.ext)) {
    *why = "leaf geometry mismatch";
    return false;
  }
  if (a.codes != b.codes) {
    *why = "quantized codes mismatch";
    return false;
  }
  if (a.decoded.kind != b.model.kind || a.decoded.kernels.size() != b.model.kernels.size()) {
    *why = "decoded model shape mismatch";
    return false;
  }
  for (size_t i = 0; i < a.decoded.kernels.size(); ++i) {
    const KernelParams& x = a.decoded.kernels[i];
    const KernelParams& y = b.model.kernels[i];
    if (x.alpha != y.alpha || x.mu.x != y.mu.x || x.mu.y != y.mu.y || x.mu.z != y.mu.z ||
        x.sigma.xx != y.sigma.xx || x.sigma.xy != y.sigma.xy || x.sigma.xz != y.sigma.xz ||
        x.sigma.yy != y.sigma.yy || x.sigma.yz != y.sigma.yz || x.sigma.zz != y.sigma.zz) {
      *why = "decoded kernel parameters differ";
      return false;
    }
  }
  std::vector<double> sa = regress_block(a.decoded, a.ext.cols, a.ext.rows);
  std::vector<double> sb = regress_block(b.model, b.ext.cols, b.ext.rows);
  if (sa != sb) {
    *why = "rendered leaf surfaces differ";
    return false;
  }
  return true;
}

void crit_bitstream(Criterion& cr, std::vector<RegEncode>& registry) {
  const int ol = 2;
  const AmsLimits limits{3, 3, 2};
  const double lambdas[4] = {0.6, 90.0, 2000.0, 40000.0};
  struct PlaneCase {
    int w, h, ch;
    uint64_t seed;
  };
  const PlaneCase cases[4] = {
      {128, 128, 0, 9101}, {128, 128, 1, 9202}, {96, 80, 0, 9303}, {64, 64, 0, 9404}};
  int trees_checked = 0;
  for (const PlaneCase& pc : cases) {
    PlaneImage plane = synth_plane(pc.w, pc.h, pc.seed);
    if (pc.ch != 0) plane.role = PlaneImage::Role::U;
    std::vector<TileGeom> regions = tile_regions(plane.width, plane.height, ol);
    std::vector<RegionCandidates> cands;
    GridRanges ranges;
    for (const TileGeom& rg : regions) {
      cands.push_back(compute_region_candidates(plane, rg, pc.ch, limits, ol,
                                                mix_seed(pc.seed, {cands.size()})));
      accumulate_grid_ranges(cands.back(), pc.ch, &ranges);
    }
    QuantGrid grid = build_quant_grid(ranges);
    for (double lambda : lambdas) {
      std::vector<ModeTree> trees;
      for (const RegionCandidates& cd : cands)
        trees.push_back(select_mode_tree(cd, pc.ch, lambda, grid));
      ArithEncoder enc;
      ChannelContexts ectx(pc.ch);
      for (const ModeTree& t : trees) encode_region_tree(t, pc.ch, &enc, &ectx);
      std::vector<uint8_t> bytes = enc.finish();
      ArithDecoder dec(bytes.data(), bytes.size());
      ChannelContexts dctx(pc.ch);
      for (size_t i = 0; i < trees.size(); ++i) {
        std::vector<DecodedLeaf> got = decode_region_tree(&dec, &dctx, regions[i], pc.ch, ol,
                                                          plane.width, plane.height, grid);
        std::vector<const LeafChoice*> want = tree_leaves(trees[i]);
        cr.expect(got.size() == want.size(),
                  fmt("plane %dx%d ch %d lambda %g region %zu: %zu leaves decoded, %zu encoded",
                      pc.w, pc.h, pc.ch, lambda, i, got.size(), want.size()));
        if (got.size() == want.size()) {
          for (size_t l = 0; l < got.size(); ++l) {
            std::string why;
            cr.expect(leaf_equal(*want[l], got[l], &why),
                      fmt("plane %dx%d ch %d lambda %g region %zu leaf %zu: %s", pc.w, pc.h,
                          pc.ch, lambda, i, l, why.c_str()));
          }
        }
        ++trees_checked;
      }
    }
  }

  // Whole-stream check: a plain decode reproduces the encoder's own
  // reconstruction bit-exactly.
  int image_checks = 0;
  {
    struct ImgCase {
      int w, h, ch;
      double lambda;
      uint64_t seed;
    };
    const ImgCase imgs[2] = {{96, 80, 1, 400.0, 31001}, {80, 64, 3, 800.0, 31002}};
    for (const ImgCase& ic : imgs) {
      ImageU8 img = synth_image(ic.w, ic.h, ic.ch, ic.seed);
      EncodeConfig cfg;
      cfg.lambda = ic.lambda;
      cfg.seed = 5;
      EncodeResult res = encode_image(img, cfg);
      ImageU8 dec = decode_image(res.bytes);
      cr.expect(dec.width == res.reconstruction.width && dec.height == res.reconstruction.height &&
                    dec.channels == res.reconstruction.channels &&
                    dec.data == res.reconstruction.data,
                fmt("image %dx%dx%d: decoder output differs from encoder reconstruction", ic.w,
                    ic.h, ic.ch));
      registry.push_back({std::move(res), ic.w, ic.h});
      ++image_checks;
    }
  }

  // AAC fuzz: lossless on random symbol streams.
  Rng rng(515151);
  int fuzz_ok = 0;
  const int kStreams = 10000;
  for (int t = 0; t < kStreams; ++t) {
    int palette_n = 1 + (int)rng.below(6);
    std::vector<uint32_t> palette(palette_n);
    for (uint32_t& a : palette) a = 1 + (uint32_t)rng.below(60);
    int len = (int)rng.below(150);
    std::vector<uint32_t> alphabets(len), symbols(len);
    for (int i = 0; i < len; ++i) {
      alphabets[i] = palette[rng.below(palette_n)];
      symbols[i] = (uint32_t)rng.below(alphabets[i]);
    }
    std::vector<uint8_t> bytes = aac_encode(symbols, alphabets);
    std::vector<uint32_t> back = aac_decode(bytes, alphabets);
    if (back == symbols)
      ++fuzz_ok;
    else if (cr.pass)
      cr.fail(fmt("AAC fuzz stream %d: round-trip mismatch (len %d)", t, len));
  }
  cr.expect(fuzz_ok == kStreams, fmt("%d/%d AAC fuzz streams round-tripped", fuzz_ok, kStreams));
  cr.detail = fmt("%d mode trees round-tripped exactly; %d full streams decode == encoder "
                  "reconstruction; %d/%d AAC fuzz streams lossless",
                  trees_checked, image_checks, fuzz_ok, kStreams);
}

// ---------------------------------------------------------------------------
// Criterion 8: rate accounting.

void crit_rate_accounting(Criterion& cr, const std::vector<RegEncode>& registry) {
  cr.expect(kGridBytes * 8 == 1008, "mark grid is not 1008 bits");

  // Per-kernel parameter bit totals, re-summed by hand from the width tables.
  struct RowSum {
    ChannelClass ch;
    int bs;
    bool multi;
    int want;
  };
  const RowSum rows[8] = {
      {ChannelClass::Y, 16, true, 31},  {ChannelClass::Y, 32, true, 35},
      {ChannelClass::Y, 64, true, 39},  {ChannelClass::UV, 16, true, 17},
      {ChannelClass::UV, 32, true, 21}, {ChannelClass::UV, 64, true, 25},
      {ChannelClass::Y, 16, false, 13}, {ChannelClass::UV, 16, false, 4},
  };
  for (const RowSum& r : rows)
    cr.expect(kernel_param_bits(r.ch, r.bs, r.multi) == r.want,
              fmt("kernel_param_bits(%s, %d, %s) != %d", r.ch == ChannelClass::Y ? "Y" : "UV",
                  r.bs, r.multi ? "multi" : "single", r.want));
  cr.expect(leaf_rate_bits(ChannelClass::Y, 64, 3, true) == 1 + 4 + 3 * 39, "Y64 nm3 leaf rate");
  cr.expect(leaf_rate_bits(ChannelClass::Y, 32, 2, true) == 2 + 4 + 1 + 2 * 35,
            "Y32 nm2 leaf rate");
  cr.expect(leaf_rate_bits(ChannelClass::Y, 16, 4, false) == 2 + 4 * 31, "Y16 nm4 leaf rate");
  cr.expect(leaf_rate_bits(ChannelClass::UV, 32, 4, true) == 2 + 2 + 1 + 4 * 21,
            "UV32 nm4 leaf rate");
  cr.expect(leaf_rate_bits(ChannelClass::Y, 64, 1, true) == 18 &&
                leaf_rate_bits(ChannelClass::Y, 32, 1, true) == 19 &&
                leaf_rate_bits(ChannelClass::Y, 16, 1, false) == 15 &&
                leaf_rate_bits(ChannelClass::UV, 64, 1, true) == 8 &&
                leaf_rate_bits(ChannelClass::UV, 32, 1, true) == 8 &&
                leaf_rate_bits(ChannelClass::UV, 16, 1, false) == 6,
            "single-kernel leaf rates");

  int streams = 0;
  for (const RegEncode& re : registry) {
    double want_bpp = bits_per_pixel(re.res.bytes.size(), re.w, re.h);
    cr.expect(re.res.report.bpp == want_bpp,
              fmt("stream %d: reported bpp %.12f != 8*bytes/pixels %.12f", streams,
                  re.res.report.bpp, want_bpp));
    EncodedImage parsed = deserialize_image(re.res.bytes);
    cr.expect(serialize_image(parsed) == re.res.bytes,
              fmt("stream %d: reserialization differs", streams));
    size_t want_len = kPreambleBytes + kGridBytes + 3 * 4 + parsed.payloads[0].size() +
                      parsed.payloads[1].size() + parsed.payloads[2].size();
    cr.expect(re.res.bytes.size() == want_len,
              fmt("stream %d: length %zu != preamble+grid+payloads %zu", streams,
                  re.res.bytes.size(), want_len));
    ++streams;
  }
  cr.expect(streams > 0, "no encoded streams were registered for accounting");
  cr.detail = fmt("mark grid 1008 bits; width-table row sums match; %d streams: reported bits == "
                  "stream length and preamble+grid+payload accounting exact",
                  streams);
}

// ---------------------------------------------------------------------------
// Criterion 9: lambda sweep monotonicity.

void crit_lambda_sweep(Criterion& cr, std::vector<RegEncode>& registry) {
  double t0 = now_s();
  struct ImgCase {
    const char* name;
    int ch;
    uint64_t seed;
  };
  const ImgCase imgs[3] = {{"smooth", 1, 111}, {"textured", 1, 222}, {"color", 3, 333}};
  std::vector<std::string> lines;
  bool monotone = true;
  for (const ImgCase& ic : imgs) {
    ImageU8 img = synth_image(256, 256, ic.ch, ic.seed);
    double prev = -1.0;
    std::string row = fmt("%-8s bpp:", ic.name);
    for (double lambda : kDefaultLambdaSweep) {
      EncodeConfig cfg;
      cfg.lambda = lambda;
      cfg.seed = 9;
      EncodeResult res = encode_image(img, cfg);
      double bpp = res.report.bpp;
      row += fmt(" %.4f", bpp);
      if (bpp + 1e-12 < prev) {
        monotone = false;
        cr.fail(fmt("%s: bpp %.6f at lambda %g below %.6f at the previous (larger) lambda",
                    ic.name, bpp, lambda, prev));
      }
      prev = bpp;
      registry.push_back({std::move(res), 256, 256});
    }
    lines.push_back(row);
  }
  double dt = now_s() - t0;
  cr.expect(dt < 1800.0, fmt("sweep took %.0f s, limit 1800 s", dt));
  for (const std::string& l : lines) cr.notes.push_back(l);
  cr.detail = fmt("3 images x 7 lambdas: bpp non-decreasing as lambda decreases%s, %.0f s total",
                  monotone ? "" : " VIOLATED", dt);
}

// ---------------------------------------------------------------------------
// Criterion 10: model comparison table (informational delta).

void crit_model_table(Criterion& cr) {
  std::vector<int> ks = default_model_ks();
  double delta_sum = 0.0;
  int delta_n = 0;
  int tables = 0;
  for (int i = 0; i < 8; ++i) {
    ImageU8 img = synth_image(256, 256, 1, 9000 + i);
    std::vector<ModelRow> rows = run_model(img, ks, 4321 + i, 0);
    cr.expect(rows.size() == 3 * ks.size(),
              fmt("image %d: %zu rows, expected %zu", i, rows.size(), 3 * ks.size()));
    for (const ModelRow& r : rows) {
      int want_blocks = (256 / r.blocksize) * (256 / r.blocksize);
      cr.expect(r.blocks == want_blocks,
                fmt("image %d: blocksize %d has %d blocks, expected %d", i, r.blocksize, r.blocks,
                    want_blocks));
      cr.expect(std::isfinite(r.ek_ssim) && std::isfinite(r.gk_ssim) && r.ek_ssim <= 1.0 + 1e-12 &&
                    r.gk_ssim <= 1.0 + 1e-12,
                fmt("image %d: SSIM out of range at blocksize %d k %d", i, r.blocksize, r.k));
      cr.expect(r.bits_per_block == (long long)r.k * nominal_kernel_bits(r.blocksize),
                fmt("image %d: bits_per_block mismatch at blocksize %d k %d", i, r.blocksize,
                    r.k));
      if (r.blocksize == 16) {
        delta_sum += r.ek_ssim - r.gk_ssim;
        ++delta_n;
      }
    }
    std::string csv = model_csv(rows);
    cr.expect(csv.rfind("blocksize,k,blocks,ek_ssim,gk_ssim,ssim_delta,bits_per_block", 0) == 0,
              fmt("image %d: CSV header mismatch", i));
    ++tables;
  }
  double delta = delta_n ? delta_sum / delta_n : 0.0;
  cr.notes.push_back(fmt("informational: mean 16x16 SSIM delta (EK - GK) = %+.5f (%s ahead); "
                         "not a gate",
                         delta, delta >= 0 ? "EK" : "GK"));
  cr.detail = fmt("8 images x %zu k-values: comparison table emitted and well-formed", ks.size());
}

// ---------------------------------------------------------------------------
// Criterion 11: prior estimation.

void crit_priors(Criterion& cr) {
  std::vector<double> p = estimate_priors({{1.0, 1.0}, {1.0, 3.0}});
  cr.expect(p.size() == 2 && std::abs(p[0] - 0.375) <= 1e-15 && std::abs(p[1] - 0.625) <= 1e-15,
            fmt("hand example: got (%.17g, %.17g), want (0.375, 0.625)",
                p.empty() ? 0.0 : p[0], p.size() > 1 ? p[1] : 0.0));
  Rng rng(13579);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    int nm = 1 + (int)rng.below(16);
    std::vector<std::pair<double, double>> pairs(nm);
    for (auto& pr : pairs) pr = {1e-3 + 50.0 * rng.u01(), 1e-3 + 50.0 * rng.u01()};
    std::vector<double> a = estimate_priors(pairs);
    double sum = 0.0;
    bool positive = true;
    for (double v : a) {
      sum += v;
      positive = positive && v > 0.0;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
    cr.expect(std::abs(sum - 1.0) <= 1e-12, fmt("trial %d: priors sum to %.17g", t, sum));
    cr.expect(positive, fmt("trial %d: nonpositive prior", t));
  }
  cr.detail = fmt("hand example exact; 200 random sets: sums within %.1e of 1, all positive",
                  worst);
}

}  // namespace

int main() {
  std::vector<Criterion> crits(11);
  const char* names[11] = {
      "kernel normalization",        "EK sampling covariance",
      "marginal/conditional match",  "planar exactness",
      "EM trace selection",          "mode selection exactness",
      "bitstream round-trip",        "rate accounting",
      "lambda sweep monotonicity",   "model comparison table",
      "prior estimation",
  };
  for (int i = 0; i < 11; ++i) {
    crits[i].id = i + 1;
    crits[i].name = names[i];
  }

  std::vector<RegEncode> registry;
  fprintf(stderr, "running criterion 1...\n");
  crit_normalization(crits[0]);
  fprintf(stderr, "running criterion 2...\n");
  crit_sampling_covariance(crits[1]);
  fprintf(stderr, "running criterion 3...\n");
  crit_marginal_conditional(crits[2]);
  fprintf(stderr, "running criterion 4...\n");
  crit_planar_exactness(crits[3]);
  fprintf(stderr, "running criterion 5...\n");
  crit_trace_selection(crits[4]);
  fprintf(stderr, "running criterion 6...\n");
  crit_mode_selection(crits[5]);
  fprintf(stderr, "running criterion 7...\n");
  crit_bitstream(crits[6], registry);
  fprintf(stderr, "running criterion 9...\n");
  crit_lambda_sweep(crits[8], registry);
  fprintf(stderr, "running criterion 8...\n");
  crit_rate_accounting(crits[7], registry);
  fprintf(stderr, "running criterion 10...\n");
  crit_model_table(crits[9]);
  fprintf(stderr, "running criterion 11...\n");
  crit_priors(crits[10]);

  int passed = 0;
  for (const Criterion& c : crits) {
    printf("[%s] %02d %s: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
           c.detail.c_str());
    for (const std::string& n : c.notes) printf("         %s\n", n.c_str());
    if (c.pass) ++passed;
  }
  printf("acceptance: %d/11 criteria passed\n", passed);
  return passed == 11 ? 0 : 1;
}
