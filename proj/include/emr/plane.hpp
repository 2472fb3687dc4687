// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "emr/geometry.hpp"

namespace emr {

struct PlaneImage {
  enum class Role { Y, U, V };

  int width = 0;
  int height = 0;
  std::vector<double> samples;  // row-major, values in [0,255]
  Role role = Role::Y;

  double at(int r, int c) const { return samples[(size_t)r * width + c]; }
  double& at(int r, int c) { return samples[(size_t)r * width + c]; }
};

inline PlaneImage make_plane(int width, int height, PlaneImage::Role role = PlaneImage::Role::Y,
                             double fill = 0.0) {
  PlaneImage p;
  p.width = width;
  p.height = height;
  p.role = role;
  p.samples.assign((size_t)width * height, fill);
  return p;
}

}  // namespace emr
