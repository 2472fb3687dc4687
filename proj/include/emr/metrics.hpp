// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "emr/plane.hpp"

namespace emr {

// Mean squared error over two planes of identical geometry.
double plane_mse(const PlaneImage& a, const PlaneImage& b);

// Peak signal-to-noise ratio in dB for 8-bit data. Infinite for identical planes.
double psnr_from_mse(double mse);
double plane_psnr(const PlaneImage& a, const PlaneImage& b);

// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), valid-window placement.
// Planes smaller than the window fall back to one global window.
double plane_ssim(const PlaneImage& a, const PlaneImage& b);

// Bits per pixel of a coded payload relative to the luma raster.
double bits_per_pixel(std::size_t stream_bytes, int width, int height);

struct QualityReport {
  double mse = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double bpp = 0.0;
};

}  // namespace emr
