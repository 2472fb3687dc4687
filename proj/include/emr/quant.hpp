// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "emr/geometry.hpp"
#include "emr/kernel_math.hpp"

namespace emr {

// Header parameter slots, in stream order.
enum class ParamId { MuX = 0, MuY, MuZ, E1, E2, SigXZ, SigYZ };
constexpr int kNumHeaderParams = 7;

inline int size_index(int blocksize) { return blocksize == 16 ? 0 : blocksize == 32 ? 1 : 2; }
inline ChannelClass class_of_channel(int ch_idx) {
  return ch_idx == 0 ? ChannelClass::Y : ChannelClass::UV;
}

// Per-image quantization marks: 3 channels x 3 blocksizes x 7 parameters,
// (M, E) pair each, 8-bit codes. 1008 bits total.
struct QuantGrid {
  struct Mark {
    uint8_t m_code = 0;
    uint8_t e_code = 0;
  };
  Mark marks[3][3][kNumHeaderParams];

  double m_value(int ch_idx, int blocksize, ParamId p) const;
  double e_value(int ch_idx, int blocksize, ParamId p) const;
};

// Code widths per channel class, blocksize, and field. Zero = not coded.
int param_bits(ChannelClass ch, int blocksize, ParamId p, bool multi);
int eta_bits(ChannelClass ch);
int nm_bits(ChannelClass ch, int blocksize);
int b_bits(int blocksize);

// Parameter bits for one kernel (eta included for multi-kernel layouts).
int kernel_param_bits(ChannelClass ch, int blocksize, bool multi);

// Total rate of one leaf: optional B bits, NM field, EG bit (32x32
// multi-kernel only), NM kernels of parameters.
long long leaf_rate_bits(ChannelClass ch, int blocksize, int nm, bool include_b);

// Uniform quantizer, codes in [1, 2^nbits].
int quantize(double value, double m, double e, int nbits);
double dequantize(int code, double m, double e, int nbits);

// Angle codec over the fixed range [-90, 90), no header marks.
int encode_eta(double eta_deg, int nbits);
double decode_eta(int code, int nbits);

// Prior estimation from dequantized eigenvalue pairs.
std::vector<double> estimate_priors(const std::vector<std::pair<double, double>>& eigen_pairs);

// Fixed outer ranges bounding the 8-bit header marks; normative in FORMAT.md.
void mark_outer_range(int blocksize, ParamId p, double* lo, double* hi);

// Mark codes: M floors (decoded M <= observed min), E ceils (decoded M + E >=
// observed max).
uint8_t mark_m_code(double observed_min, int blocksize, ParamId p);
uint8_t mark_e_code(double decoded_m, double observed_max, int blocksize, ParamId p);
double decode_mark_m(uint8_t code, int blocksize, ParamId p);
double decode_mark_e(uint8_t code, int blocksize, ParamId p);

// Quantized integer codes of one kernel. Inactive fields stay 0.
struct KernelCode {
  int mux = 0, muy = 0, muz = 0, eta = 0, e1 = 0, e2 = 0, sxz = 0, syz = 0;
  bool operator==(const KernelCode&) const = default;
};

// Encoder side: kernel parameters to codes. multi selects the full layout;
// the single-kernel layout carries muz (and sxz/syz for Y) only.
KernelCode quantize_kernel(const KernelParams& k, int ch_idx, int blocksize, bool multi,
                           const QuantGrid& grid);

// Decoder side, also the encoder's RD simulation: codes to a usable model.
// ext_w/ext_h give the extended block geometry for the NM=1 closed-form
// position moments.
MixtureModel build_decoded_model(int ch_idx, int blocksize, KernelKind kind,
                                 const std::vector<KernelCode>& codes, const QuantGrid& grid,
                                 int ext_w, int ext_h);

// Closed-form mean/variance of the 0-based coordinate lattice.
void grid_position_moments(int ext_w, int ext_h, Vec2* mu, Sym2* r);

// Observed parameter ranges feeding the marks, one accumulator per
// (channel, blocksize, parameter).
struct RangeAccum {
  double lo = 0, hi = 0;
  bool any = false;
  void add(double v);
};

struct GridRanges {
  RangeAccum acc[3][3][kNumHeaderParams];
  void add_model(const MixtureModel& model, int ch_idx, int blocksize, bool multi);
};

QuantGrid build_quant_grid(const GridRanges& ranges);

}  // namespace emr
