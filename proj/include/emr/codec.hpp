// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "emr/bitstream.hpp"
#include "emr/image.hpp"
#include "emr/image_pipeline.hpp"
#include "emr/metrics.hpp"
#include "emr/mode_selection.hpp"

namespace emr {

struct EncodeConfig {
  double lambda = 800.0;
  uint64_t seed = 1;
  AmsLimits limits_y = default_limits(ChannelClass::Y);
  AmsLimits limits_uv = default_limits(ChannelClass::UV);
  int threads = 0;  // 0 = all available
};

struct DecodeConfig {
  int threads = 0;
  bool deblock = true;
  DenoiseFn denoise;  // empty = identity
  double denoise_param = 0.8;
};

// Leaf counts over all channels, by blocksize and kernel kind.
struct ModeHistogram {
  uint64_t counts[3][2] = {};  // [size_index][kind], 0 = EK, 1 = GK

  void add(int blocksize, KernelKind kind) {
    ++counts[size_index(blocksize)][kind == KernelKind::Gaussian ? 1 : 0];
  }
  uint64_t at(int blocksize, KernelKind kind) const {
    return counts[size_index(blocksize)][kind == KernelKind::Gaussian ? 1 : 0];
  }
  uint64_t total() const {
    uint64_t t = 0;
    for (const auto& row : counts)
      for (uint64_t c : row) t += c;
    return t;
  }
};

struct EncodeResult {
  std::vector<uint8_t> bytes;
  // Decode of bytes under default settings (deblock on, no denoise); what a
  // plain decode of the stream reproduces bit-exactly.
  ImageU8 reconstruction;
  QualityReport report;  // luma-plane quality vs the input, bpp of bytes
  ModeHistogram histogram;
};

// Input must be 1- or 3-channel, nonempty, at most 65535 px per side.
EncodeResult encode_image(const ImageU8& input, const EncodeConfig& cfg);

ImageU8 decode_image(const EncodedImage& parsed, const DecodeConfig& cfg = {});
ImageU8 decode_image(const std::vector<uint8_t>& bytes, const DecodeConfig& cfg = {});

// Luma plane of an image: channel 0 for grayscale, BT.601 luma for RGB.
PlaneImage luma_plane(const ImageU8& img);

}  // namespace emr
