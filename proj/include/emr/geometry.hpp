// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>

namespace emr {

// Channel bit-allocation class. U and V share one class.
enum class ChannelClass { Y, UV };

// Half-open rectangle in row/col order.
struct Rect {
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;

  int row1() const { return row0 + rows; }
  int col1() const { return col0 + cols; }
  bool empty() const { return rows <= 0 || cols <= 0; }
  long long area() const { return (long long)rows * cols; }

  bool operator==(const Rect&) const = default;
};

inline Rect intersect(const Rect& a, const Rect& b) {
  int r0 = std::max(a.row0, b.row0);
  int c0 = std::max(a.col0, b.col0);
  int r1 = std::min(a.row1(), b.row1());
  int c1 = std::min(a.col1(), b.col1());
  return {r0, c0, std::max(0, r1 - r0), std::max(0, c1 - c0)};
}

// Clip a rect to a w x h plane.
inline Rect clip(const Rect& a, int width, int height) {
  return intersect(a, Rect{0, 0, height, width});
}

// One tiling region: core rect (disjoint across regions) plus the extended
// rect grown by the overlap margin and clipped to the plane.
struct TileGeom {
  Rect core;
  Rect ext;
};

// Quadtree geometry, shared by the encoder's mode selection and the decoder's
// tree parser. Quadrants and pieces are anchored at the region core origin;
// raster order TL, TR, BL, BR.
inline Rect quad_core(const Rect& region_core, int q) {
  return intersect(region_core, Rect{region_core.row0 + 32 * (q >> 1),
                                     region_core.col0 + 32 * (q & 1), 32, 32});
}

inline Rect piece_core(const Rect& region_core, int q, int p) {
  return intersect(region_core, Rect{region_core.row0 + 32 * (q >> 1) + 16 * (p >> 1),
                                     region_core.col0 + 32 * (q & 1) + 16 * (p & 1), 16, 16});
}

inline Rect grow_clip(const Rect& core, int ol, int plane_w, int plane_h) {
  return clip(Rect{core.row0 - ol, core.col0 - ol, core.rows + 2 * ol, core.cols + 2 * ol},
              plane_w, plane_h);
}

}  // namespace emr
