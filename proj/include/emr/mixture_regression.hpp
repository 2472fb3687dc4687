// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "emr/geometry.hpp"
#include "emr/kernel_math.hpp"

namespace emr {

// One coding block: extended rect pixels plus the core sub-rectangle used for
// distortion accounting. core is in block-local coordinates.
struct Block {
  int origin_row = 0;
  int origin_col = 0;
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major, width*height, values in [0,255]
  Rect core;

  double at(int r, int c) const { return pixels[(size_t)r * width + c]; }
};

struct FitResult {
  MixtureModel model;
  double mse = 0.0;       // over core, with the selected parameter set
  int iterations_used = 1;  // t index of the selected set, 1 = initialization
  std::vector<double> mse_trace;  // recorded MSE per parameter set, t = 1..8
  bool k_reduced = false;   // K was clamped to the sample count
};

// Samples use block-local 0-based coordinates: x = column, y = row.
std::vector<Vec3> block_to_samples(const Block& block);

MixtureModel kmeanspp_init(const std::vector<Vec3>& samples, int k, KernelKind kind,
                           uint64_t seed);

// N x K responsibilities, row-major. Rows sum to 1.
std::vector<double> e_step(const std::vector<Vec3>& samples, const MixtureModel& model);

MixtureModel m_step(const std::vector<Vec3>& samples, const std::vector<double>& q, int k,
                    KernelKind kind, const MixtureModel* prev = nullptr);

// Regression over a width x height grid of block-local coordinates.
std::vector<double> regress_block(const MixtureModel& model, int width, int height);

// MSE of the model's regression against the block's core pixels.
double block_mse(const MixtureModel& model, const Block& block);

// Init, EM sweeps t = 2..8, keep the minimum-MSE parameter set.
FitResult fit_block(const Block& block, int k, KernelKind kind, uint64_t seed);

// Closed-form single-kernel moments; no iteration.
FitResult single_kernel_fit(const Block& block, KernelKind kind);

// Blocksize rule for single-kernel blocks: 16 -> EK, 32/64 -> GK.
KernelKind single_kernel_kind(int blocksize);

}  // namespace emr
