// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emr/image.hpp"

namespace emr {

std::vector<uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::vector<uint8_t>& bytes);

// Dispatches on magic bytes: PNG, or binary PPM/PGM (P5/P6, maxval <= 255).
// 16-bit PNG is reduced to 8; alpha is stripped; palette images expand to RGB.
ImageU8 load_image(const std::string& path);

// Dispatches on extension: .png, .ppm (RGB), .pgm (gray). PPM output of a
// grayscale image replicates the channel; PGM of RGB is rejected.
void save_image(const std::string& path, const ImageU8& img);

// In-memory PPM/PGM codecs, also used by the external denoise bridge.
std::vector<uint8_t> encode_pnm(const ImageU8& img);
ImageU8 decode_pnm(const std::vector<uint8_t>& bytes);

}  // namespace emr
