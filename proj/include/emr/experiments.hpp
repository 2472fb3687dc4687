// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emr/codec.hpp"

namespace emr {

// One row of the analyze sweep. CSV schema analyze-v1 (see README).
struct AnalyzeRow {
  double lambda = 0.0;
  double bpp = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  ModeHistogram hist;
};

// Encodes the image once per lambda; rows keep the schedule's order.
std::vector<AnalyzeRow> run_analyze(const ImageU8& input, const std::vector<double>& lambdas,
                                    const EncodeConfig& base);
std::string analyze_csv(const std::vector<AnalyzeRow>& rows);

// One row of the model comparison. CSV schema model-v1 (see README).
struct ModelRow {
  int blocksize = 16;
  int k = 1;
  int blocks = 0;          // full blocks of that size in the luma plane
  double ek_ssim = 0.0;    // mean per-block SSIM, Epanechnikov fits
  double gk_ssim = 0.0;    // same, Gaussian fits
  long long bits_per_block = 0;  // k kernels at the per-blocksize accurate-model cost
};

// Fits both kernel kinds to every full blocksize x blocksize luma block, for
// each blocksize in {16, 32, 64} and each k in ks (clamped to the blocksize's
// model ceiling). Deterministic under (seed, k grid).
std::vector<ModelRow> run_model(const ImageU8& input, const std::vector<int>& ks, uint64_t seed,
                                int threads);
std::string model_csv(const std::vector<ModelRow>& rows);

// Default k grid for run_model.
std::vector<int> default_model_ks();

}  // namespace emr
