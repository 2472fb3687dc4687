// SPDX-License-Identifier: Apache-2.0
#include "emr/image_pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace emr {

OverlapConfig overlap_for_lambda(double lambda) {
  if (lambda > 3200) return {6, 8};
  if (lambda > 400) return {4, 5};
  if (lambda > 100) return {2, 3};
  return {1, 2};
}

void rgb_to_yuv(const ImageU8& rgb, PlaneImage* y, PlaneImage* u, PlaneImage* v) {
  *y = make_plane(rgb.width, rgb.height, PlaneImage::Role::Y);
  *u = make_plane(rgb.width, rgb.height, PlaneImage::Role::U);
  *v = make_plane(rgb.width, rgb.height, PlaneImage::Role::V);
  for (int r = 0; r < rgb.height; ++r) {
    for (int c = 0; c < rgb.width; ++c) {
      double R = rgb.at(r, c, 0), G = rgb.at(r, c, 1), B = rgb.at(r, c, 2);
      y->at(r, c) = 0.299 * R + 0.587 * G + 0.114 * B;
      u->at(r, c) = std::clamp(-0.168736 * R - 0.331264 * G + 0.5 * B + 128.0, 0.0, 255.0);
      v->at(r, c) = std::clamp(0.5 * R - 0.418688 * G - 0.081312 * B + 128.0, 0.0, 255.0);
    }
  }
}

ImageU8 yuv_to_rgb(const PlaneImage& y, const PlaneImage& u, const PlaneImage& v) {
  ImageU8 out = make_image(y.width, y.height, 3);
  for (int r = 0; r < y.height; ++r) {
    for (int c = 0; c < y.width; ++c) {
      double Y = y.at(r, c), U = u.at(r, c) - 128.0, V = v.at(r, c) - 128.0;
      out.at(r, c, 0) = quantize_pixel(Y + 1.402 * V);
      out.at(r, c, 1) = quantize_pixel(Y - 0.344136 * U - 0.714136 * V);
      out.at(r, c, 2) = quantize_pixel(Y + 1.772 * U);
    }
  }
  return out;
}

PlaneImage downsample_uv(const PlaneImage& plane) {
  int ow = (plane.width + 1) / 2;
  int oh = (plane.height + 1) / 2;
  PlaneImage out = make_plane(ow, oh, plane.role);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double sum = 0;
      int n = 0;
      for (int dr = 0; dr < 2; ++dr)
        for (int dc = 0; dc < 2; ++dc) {
          int rr = 2 * r + dr, cc = 2 * c + dc;
          if (rr < plane.height && cc < plane.width) {
            sum += plane.at(rr, cc);
            ++n;
          }
        }
      out.at(r, c) = sum / n;
    }
  }
  return out;
}

PlaneImage upsample_uv(const PlaneImage& plane, int target_w, int target_h) {
  PlaneImage out = make_plane(target_w, target_h, plane.role);
  for (int r = 0; r < target_h; ++r)
    for (int c = 0; c < target_w; ++c)
      out.at(r, c) = plane.at(std::min(r / 2, plane.height - 1), std::min(c / 2, plane.width - 1));
  return out;
}

std::vector<TileGeom> tile_regions(int plane_w, int plane_h, int ol) {
  std::vector<TileGeom> out;
  for (int r0 = 0; r0 < plane_h; r0 += 64) {
    for (int c0 = 0; c0 < plane_w; c0 += 64) {
      TileGeom g;
      g.core = clip(Rect{r0, c0, 64, 64}, plane_w, plane_h);
      g.ext = clip(Rect{r0 - ol, c0 - ol, 64 + 2 * ol, 64 + 2 * ol}, plane_w, plane_h);
      out.push_back(g);
    }
  }
  return out;
}

PlaneImage merge_overlaps(int width, int height, const std::vector<Patch>& patches) {
  PlaneImage out = make_plane(width, height);
  std::vector<int> count((size_t)width * height, 0);
  for (const Patch& p : patches)
    for (int r = p.ext.row0; r < p.ext.row1(); ++r)
      for (int c = p.ext.col0; c < p.ext.col1(); ++c) ++count[(size_t)r * width + c];

  std::vector<double> wsum((size_t)width * height, 0.0);
  for (const Patch& p : patches) {
    for (int r = p.ext.row0; r < p.ext.row1(); ++r) {
      double wy = std::min(r - p.ext.row0 + 1, p.ext.row1() - r);
      for (int c = p.ext.col0; c < p.ext.col1(); ++c) {
        size_t i = (size_t)r * width + c;
        double v = p.values[(size_t)(r - p.ext.row0) * p.ext.cols + (c - p.ext.col0)];
        if (count[i] == 1) {
          out.samples[i] = v;
          continue;
        }
        double w = wy * std::min(c - p.ext.col0 + 1, p.ext.col1() - c);
        wsum[i] += w;
        out.samples[i] += w * v;
      }
    }
  }
  for (size_t i = 0; i < out.samples.size(); ++i)
    if (count[i] > 1) out.samples[i] /= wsum[i];
  return out;
}

int deblock_width(ChannelClass ch, int blocksize, double lambda) {
  if (blocksize == 16) return 2;
  if (ch == ChannelClass::Y) {
    if (blocksize == 32) return lambda > 800 ? 3 : 2;
    return lambda > 800 ? 5 : lambda > 100 ? 3 : 2;
  }
  if (blocksize == 32) return lambda > 200 ? 3 : 2;
  return lambda > 200 ? 6 : 4;
}

namespace {

inline void blend_into(double* px, double edge, int w, int i) {
  *px = ((w + 1 + i) * *px + (w + 1 - i) * edge) / (2.0 * (w + 1));
}

}  // namespace

PlaneImage deblock(const PlaneImage& in, double lambda, const std::vector<BlockBound>& blocks,
                   ChannelClass ch) {
  PlaneImage out = in;
  // Pass 1: vertical borders (blend across columns).
  {
    PlaneImage snap = out;
    for (const BlockBound& b : blocks) {
      int w = deblock_width(ch, b.blocksize, lambda);
      if (b.core.col1() < in.width) {
        int ec = b.core.col1() - 1;
        for (int r = b.core.row0; r < b.core.row1(); ++r) {
          double edge = snap.at(r, ec);
          for (int i = 1; i <= w && ec + i < in.width; ++i)
            blend_into(&out.at(r, ec + i), edge, w, i);
        }
      }
      if (b.core.col0 > 0) {
        int ec = b.core.col0;
        for (int r = b.core.row0; r < b.core.row1(); ++r) {
          double edge = snap.at(r, ec);
          for (int i = 1; i <= w && ec - i >= 0; ++i)
            blend_into(&out.at(r, ec - i), edge, w, i);
        }
      }
    }
  }
  // Pass 2: horizontal borders (blend across rows).
  {
    PlaneImage snap = out;
    for (const BlockBound& b : blocks) {
      int w = deblock_width(ch, b.blocksize, lambda);
      if (b.core.row1() < in.height) {
        int er = b.core.row1() - 1;
        for (int c = b.core.col0; c < b.core.col1(); ++c) {
          double edge = snap.at(er, c);
          for (int i = 1; i <= w && er + i < in.height; ++i)
            blend_into(&out.at(er + i, c), edge, w, i);
        }
      }
      if (b.core.row0 > 0) {
        int er = b.core.row0;
        for (int c = b.core.col0; c < b.core.col1(); ++c) {
          double edge = snap.at(er, c);
          for (int i = 1; i <= w && er - i >= 0; ++i)
            blend_into(&out.at(er - i, c), edge, w, i);
        }
      }
    }
  }
  return out;
}

PlaneImage denoise_identity(const PlaneImage& plane, double) { return plane; }

PlaneImage denoise_gaussian(const PlaneImage& plane, double sigma) {
  if (!(sigma > 0)) return plane;
  int radius = std::max(1, (int)std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;

  PlaneImage tmp = plane;
  for (int r = 0; r < plane.height; ++r)
    for (int c = 0; c < plane.width; ++c) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * plane.at(r, std::clamp(c + i, 0, plane.width - 1));
      tmp.at(r, c) = acc;
    }
  PlaneImage out = tmp;
  for (int r = 0; r < plane.height; ++r)
    for (int c = 0; c < plane.width; ++c) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * tmp.at(std::clamp(r + i, 0, plane.height - 1), c);
      out.at(r, c) = acc;
    }
  return out;
}

uint8_t quantize_pixel(double v) {
  double c = std::clamp(v, 0.0, 255.0);
  return (uint8_t)std::lround(c);
}

}  // namespace emr
