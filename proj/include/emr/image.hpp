// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace emr {

// 8-bit image, interleaved channels (1 = gray, 3 = RGB).
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<uint8_t> data;

  uint8_t at(int r, int c, int ch = 0) const {
    return data[((size_t)r * width + c) * channels + ch];
  }
  uint8_t& at(int r, int c, int ch = 0) {
    return data[((size_t)r * width + c) * channels + ch];
  }
};

inline ImageU8 make_image(int width, int height, int channels) {
  ImageU8 img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data.assign((size_t)width * height * channels, 0);
  return img;
}

}  // namespace emr
