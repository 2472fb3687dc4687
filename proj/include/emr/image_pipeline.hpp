// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "emr/geometry.hpp"
#include "emr/image.hpp"
#include "emr/plane.hpp"

namespace emr {

struct OverlapConfig {
  int ol_y = 1;
  int ol_uv = 2;
};

OverlapConfig overlap_for_lambda(double lambda);

// BT.601 full-range. Output planes are real-valued; chroma clamped to
// [0, 255].
void rgb_to_yuv(const ImageU8& rgb, PlaneImage* y, PlaneImage* u, PlaneImage* v);
ImageU8 yuv_to_rgb(const PlaneImage& y, const PlaneImage& u, const PlaneImage& v);

// 2x2 box mean, edge pixels averaged over the clipped window.
PlaneImage downsample_uv(const PlaneImage& plane);
// Pixel replication, cropped to the target size.
PlaneImage upsample_uv(const PlaneImage& plane, int target_w, int target_h);

// 64-grid cores clipped to the plane, extended rects grown by ol.
std::vector<TileGeom> tile_regions(int plane_w, int plane_h, int ol);

// One reconstructed patch: extended rect plus its values.
struct Patch {
  Rect ext;
  std::vector<double> values;  // row-major, ext.cols * ext.rows
};

// Tent-weighted blend of overlapping patches; pixels covered by exactly one
// patch pass through unchanged.
PlaneImage merge_overlaps(int width, int height, const std::vector<Patch>& patches);

// Leaf core rects with their nominal blocksize class, for deblock widths.
struct BlockBound {
  Rect core;
  int blocksize = 64;
};

int deblock_width(ChannelClass ch, int blocksize, double lambda);
PlaneImage deblock(const PlaneImage& in, double lambda, const std::vector<BlockBound>& blocks,
                   ChannelClass ch);

// Post-filter hook. Identity by default; a separable Gaussian smoother is
// provided; external filters attach at the CLI level.
using DenoiseFn = std::function<PlaneImage(const PlaneImage&, double)>;
PlaneImage denoise_identity(const PlaneImage& plane, double sigma);
PlaneImage denoise_gaussian(const PlaneImage& plane, double sigma);

// Clamp to [0,255] and round half away from zero.
uint8_t quantize_pixel(double v);

}  // namespace emr
