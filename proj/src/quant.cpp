// SPDX-License-Identifier: Apache-2.0
#include "emr/quant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emr {

namespace {

// Parameter code widths, indexed [size_index][param]. Zero = not encoded.
constexpr int kYMulti[3][kNumHeaderParams] = {
    {3, 3, 5, 4, 4, 4, 4},  // 16x16
    {4, 4, 5, 5, 5, 4, 4},  // 32x32
    {5, 5, 5, 6, 6, 4, 4},  // 64x64
};
constexpr int kUvMulti[3][kNumHeaderParams] = {
    {2, 2, 4, 3, 3, 0, 0},
    {3, 3, 4, 4, 4, 0, 0},
    {4, 4, 4, 5, 5, 0, 0},
};
constexpr int kYSingle[kNumHeaderParams] = {0, 0, 5, 0, 0, 4, 4};
constexpr int kUvSingle[kNumHeaderParams] = {0, 0, 4, 0, 0, 0, 0};

constexpr int kYNm[3] = {2, 4, 4};
constexpr int kUvNm[3] = {2, 2, 3};

}  // namespace

int param_bits(ChannelClass ch, int blocksize, ParamId p, bool multi) {
  int s = size_index(blocksize);
  int i = (int)p;
  if (multi) return ch == ChannelClass::Y ? kYMulti[s][i] : kUvMulti[s][i];
  return ch == ChannelClass::Y ? kYSingle[i] : kUvSingle[i];
}

int eta_bits(ChannelClass ch) { return ch == ChannelClass::Y ? 4 : 3; }

int nm_bits(ChannelClass ch, int blocksize) {
  int s = size_index(blocksize);
  return ch == ChannelClass::Y ? kYNm[s] : kUvNm[s];
}

int b_bits(int blocksize) { return blocksize == 64 ? 1 : 2; }

int kernel_param_bits(ChannelClass ch, int blocksize, bool multi) {
  int sum = 0;
  for (int i = 0; i < kNumHeaderParams; ++i)
    sum += param_bits(ch, blocksize, (ParamId)i, multi);
  if (multi) sum += eta_bits(ch);
  return sum;
}

long long leaf_rate_bits(ChannelClass ch, int blocksize, int nm, bool include_b) {
  bool multi = nm > 1;
  long long bits = include_b ? b_bits(blocksize) : 0;
  bits += nm_bits(ch, blocksize);
  if (blocksize == 32 && multi) bits += 1;  // EG
  bits += (long long)nm * kernel_param_bits(ch, blocksize, multi);
  return bits;
}

int quantize(double value, double m, double e, int nbits) {
  int levels = (1 << nbits) - 1;
  if (!(e > 0)) return 1;
  double step = e / levels;
  long long k = std::llround((value - m) / step) + 1;
  return (int)std::clamp<long long>(k, 1, levels + 1);
}

double dequantize(int code, double m, double e, int nbits) {
  int levels = (1 << nbits) - 1;
  return m + (double)(code - 1) * e / levels;
}

int encode_eta(double eta_deg, int nbits) { return quantize(eta_deg, -90.0, 180.0, nbits); }

double decode_eta(int code, int nbits) { return dequantize(code, -90.0, 180.0, nbits); }

std::vector<double> estimate_priors(const std::vector<std::pair<double, double>>& eigen_pairs) {
  size_t nm = eigen_pairs.size();
  std::vector<double> alpha(nm, 1.0 / nm);
  double total = 0;
  for (const auto& [e1, e2] : eigen_pairs) total += e1 * e2;
  if (total <= 0) return alpha;
  for (size_t j = 0; j < nm; ++j)
    alpha[j] = (1.0 / nm + eigen_pairs[j].first * eigen_pairs[j].second / total) / 2.0;
  return alpha;
}

void mark_outer_range(int blocksize, ParamId p, double* lo, double* hi) {
  int s = size_index(blocksize);
  // Bounds follow from block-local coordinates in [0, blocksize+16) and gray
  // values in [0, 255]: eigenvalues of R are at most the position trace, and
  // |cov(x,z)| <= sqrt(var x)*sqrt(var z).
  static constexpr double kEMax[3] = {500.0, 1150.0, 3200.0};
  static constexpr double kCovMax[3] = {2000.0, 3000.0, 5100.0};
  switch (p) {
    case ParamId::MuX:
    case ParamId::MuY:
      *lo = 0.0;
      *hi = blocksize + 16.0;
      break;
    case ParamId::MuZ:
      *lo = 0.0;
      *hi = 255.0;
      break;
    case ParamId::E1:
    case ParamId::E2:
      *lo = 0.0;
      *hi = kEMax[s];
      break;
    case ParamId::SigXZ:
    case ParamId::SigYZ:
      *lo = -kCovMax[s];
      *hi = kCovMax[s];
      break;
  }
}

uint8_t mark_m_code(double observed_min, int blocksize, ParamId p) {
  double lo = 0.0, hi = 0.0;
  mark_outer_range(blocksize, p, &lo, &hi);
  double v = std::clamp(observed_min, lo, hi);
  double step = (hi - lo) / 255.0;
  long long c = (long long)std::floor((v - lo) / step);
  return (uint8_t)std::clamp<long long>(c, 0, 255);
}

uint8_t mark_e_code(double decoded_m, double observed_max, int blocksize, ParamId p) {
  double lo = 0.0, hi = 0.0;
  mark_outer_range(blocksize, p, &lo, &hi);
  double v = std::clamp(observed_max, lo, hi);
  double need = std::max(0.0, v - decoded_m);
  double step = (hi - lo) / 255.0;
  long long c = (long long)std::ceil(need / step - 1e-12);
  return (uint8_t)std::clamp<long long>(c, 0, 255);
}

double decode_mark_m(uint8_t code, int blocksize, ParamId p) {
  double lo = 0.0, hi = 0.0;
  mark_outer_range(blocksize, p, &lo, &hi);
  return lo + code * (hi - lo) / 255.0;
}

double decode_mark_e(uint8_t code, int blocksize, ParamId p) {
  double lo = 0.0, hi = 0.0;
  mark_outer_range(blocksize, p, &lo, &hi);
  return code * (hi - lo) / 255.0;
}

double QuantGrid::m_value(int ch_idx, int blocksize, ParamId p) const {
  return decode_mark_m(marks[ch_idx][size_index(blocksize)][(int)p].m_code, blocksize, p);
}

double QuantGrid::e_value(int ch_idx, int blocksize, ParamId p) const {
  return decode_mark_e(marks[ch_idx][size_index(blocksize)][(int)p].e_code, blocksize, p);
}

KernelCode quantize_kernel(const KernelParams& k, int ch_idx, int blocksize, bool multi,
                           const QuantGrid& grid) {
  ChannelClass cc = class_of_channel(ch_idx);
  KernelCode code;
  auto q = [&](double v, ParamId p) {
    return quantize(v, grid.m_value(ch_idx, blocksize, p), grid.e_value(ch_idx, blocksize, p),
                    param_bits(cc, blocksize, p, multi));
  };
  code.muz = q(k.mu.z, ParamId::MuZ);
  if (cc == ChannelClass::Y) {
    code.sxz = q(k.sigma_zx(), ParamId::SigXZ);
    code.syz = q(k.sigma_zy(), ParamId::SigYZ);
  }
  if (multi) {
    code.mux = q(k.mu.x, ParamId::MuX);
    code.muy = q(k.mu.y, ParamId::MuY);
    Eigen2 eig = eigendecompose_2x2(k.r_xy());
    code.eta = encode_eta(eig.eta_deg, eta_bits(cc));
    code.e1 = q(eig.e_small, ParamId::E1);
    code.e2 = q(eig.e_large, ParamId::E2);
  }
  return code;
}

void grid_position_moments(int ext_w, int ext_h, Vec2* mu, Sym2* r) {
  mu->x = (ext_w - 1) / 2.0;
  mu->y = (ext_h - 1) / 2.0;
  r->xx = ((double)ext_w * ext_w - 1.0) / 12.0;
  r->xy = 0.0;
  r->yy = ((double)ext_h * ext_h - 1.0) / 12.0;
}

MixtureModel build_decoded_model(int ch_idx, int blocksize, KernelKind kind,
                                 const std::vector<KernelCode>& codes, const QuantGrid& grid,
                                 int ext_w, int ext_h) {
  ChannelClass cc = class_of_channel(ch_idx);
  bool multi = codes.size() > 1;
  auto dq = [&](int code, ParamId p) {
    return dequantize(code, grid.m_value(ch_idx, blocksize, p),
                      grid.e_value(ch_idx, blocksize, p), param_bits(cc, blocksize, p, multi));
  };

  MixtureModel model;
  model.kind = kind;
  model.kernels.resize(codes.size());

  std::vector<std::pair<double, double>> pairs;
  if (multi) {
    pairs.reserve(codes.size());
    for (const KernelCode& c : codes) pairs.push_back({dq(c.e1, ParamId::E1), dq(c.e2, ParamId::E2)});
  }
  std::vector<double> alpha =
      multi ? estimate_priors(pairs) : std::vector<double>{1.0};

  for (size_t j = 0; j < codes.size(); ++j) {
    const KernelCode& c = codes[j];
    KernelParams kp;
    kp.alpha = alpha[j];
    kp.mu.z = dq(c.muz, ParamId::MuZ);
    Sym2 r;
    if (multi) {
      kp.mu.x = dq(c.mux, ParamId::MuX);
      kp.mu.y = dq(c.muy, ParamId::MuY);
      r = reconstruct_R(pairs[j].first, pairs[j].second, decode_eta(c.eta, eta_bits(cc)));
    } else {
      Vec2 mu;
      grid_position_moments(ext_w, ext_h, &mu, &r);
      kp.mu.x = mu.x;
      kp.mu.y = mu.y;
    }
    r = regularize_position(r);
    kp.sigma.xx = r.xx;
    kp.sigma.xy = r.xy;
    kp.sigma.yy = r.yy;
    if (cc == ChannelClass::Y) {
      kp.sigma.xz = dq(c.sxz, ParamId::SigXZ);
      kp.sigma.yz = dq(c.syz, ParamId::SigYZ);
    }
    model.kernels[j] = kp;
  }
  return model;
}

void RangeAccum::add(double v) {
  if (!any) {
    lo = hi = v;
    any = true;
  } else {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}

void GridRanges::add_model(const MixtureModel& model, int ch_idx, int blocksize, bool multi) {
  int s = size_index(blocksize);
  auto& slot = acc[ch_idx][s];
  bool y = ch_idx == 0;
  for (const KernelParams& k : model.kernels) {
    slot[(int)ParamId::MuZ].add(k.mu.z);
    if (y) {
      slot[(int)ParamId::SigXZ].add(k.sigma_zx());
      slot[(int)ParamId::SigYZ].add(k.sigma_zy());
    }
    if (multi) {
      slot[(int)ParamId::MuX].add(k.mu.x);
      slot[(int)ParamId::MuY].add(k.mu.y);
      Eigen2 eig = eigendecompose_2x2(k.r_xy());
      slot[(int)ParamId::E1].add(eig.e_small);
      slot[(int)ParamId::E2].add(eig.e_large);
    }
  }
}

QuantGrid build_quant_grid(const GridRanges& ranges) {
  QuantGrid grid;
  for (int ch = 0; ch < 3; ++ch) {
    for (int s = 0; s < 3; ++s) {
      int blocksize = s == 0 ? 16 : s == 1 ? 32 : 64;
      for (int p = 0; p < kNumHeaderParams; ++p) {
        const RangeAccum& a = ranges.acc[ch][s][p];
        if (!a.any) continue;
        uint8_t mc = mark_m_code(a.lo, blocksize, (ParamId)p);
        double m = decode_mark_m(mc, blocksize, (ParamId)p);
        uint8_t ec = mark_e_code(m, a.hi, blocksize, (ParamId)p);
        grid.marks[ch][s][p] = {mc, ec};
      }
    }
  }
  return grid;
}

}  // namespace emr
