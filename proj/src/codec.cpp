// SPDX-License-Identifier: Apache-2.0
#include "emr/codec.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

#include "emr/parallel.hpp"
#include "emr/rng.hpp"

namespace emr {

namespace {

struct ChannelWork {
  PlaneImage plane;
  int ol = 1;
  std::vector<TileGeom> regions;
  std::vector<RegionCandidates> cands;
  std::vector<ModeTree> trees;
};

void validate_limits(const AmsLimits& l, ChannelClass ch, const char* name) {
  const int cap64 = 1 << nm_bits(ch, 64);
  const int cap32 = 1 << nm_bits(ch, 32);
  const int cap16 = 1 << nm_bits(ch, 16);
  if (l.n64 < 1 || l.n32 < 1 || l.n16 < 1 || l.n64 > cap64 || l.n32 > cap32 || l.n16 > cap16)
    throw std::invalid_argument(std::string(name) + " limits out of range");
}

}  // namespace

PlaneImage luma_plane(const ImageU8& img) {
  if (img.channels == 1) {
    PlaneImage p = make_plane(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) p.samples[i] = img.data[i];
    return p;
  }
  PlaneImage y, u, v;
  rgb_to_yuv(img, &y, &u, &v);
  return y;
}

EncodeResult encode_image(const ImageU8& input, const EncodeConfig& cfg) {
  if (input.width <= 0 || input.height <= 0) throw std::invalid_argument("empty image");
  if (input.width > 65535 || input.height > 65535)
    throw std::invalid_argument("image exceeds 65535 px per side");
  if (input.channels != 1 && input.channels != 3)
    throw std::invalid_argument("input must be grayscale or RGB");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  validate_limits(cfg.limits_y, ChannelClass::Y, "y");
  validate_limits(cfg.limits_uv, ChannelClass::UV, "uv");

  const OverlapConfig ol = overlap_for_lambda(cfg.lambda);
  const bool color = input.channels == 3;

  std::vector<ChannelWork> work(color ? 3 : 1);
  if (color) {
    PlaneImage y, u, v;
    rgb_to_yuv(input, &y, &u, &v);
    work[0].plane = std::move(y);
    work[1].plane = downsample_uv(u);
    work[2].plane = downsample_uv(v);
  } else {
    work[0].plane = luma_plane(input);
  }
  for (std::size_t ch = 0; ch < work.size(); ++ch) {
    ChannelWork& w = work[ch];
    w.ol = ch == 0 ? ol.ol_y : ol.ol_uv;
    w.regions = tile_regions(w.plane.width, w.plane.height, w.ol);
    w.cands.resize(w.regions.size());
    w.trees.resize(w.regions.size());
  }

  struct Job {
    int ch;
    int region;
  };
  std::vector<Job> jobs;
  for (std::size_t ch = 0; ch < work.size(); ++ch)
    for (std::size_t r = 0; r < work[ch].regions.size(); ++r)
      jobs.push_back({static_cast<int>(ch), static_cast<int>(r)});

  // Phase 1: every candidate fit. Regions are independent and carry their own
  // derived seed, so the schedule cannot change results.
  for_each_index(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
    const Job& j = jobs[i];
    ChannelWork& w = work[j.ch];
    const AmsLimits& lim = j.ch == 0 ? cfg.limits_y : cfg.limits_uv;
    uint64_t seed =
        mix_seed(cfg.seed, {static_cast<uint64_t>(j.ch), static_cast<uint64_t>(j.region)});
    w.cands[j.region] =
        compute_region_candidates(w.plane, w.regions[j.region], j.ch, lim, w.ol, seed);
  });

  // Header marks cover every candidate fit, selected or not, so phase 2 can
  // score all of them against one grid.
  GridRanges ranges;
  for (std::size_t ch = 0; ch < work.size(); ++ch)
    for (const RegionCandidates& rc : work[ch].cands)
      accumulate_grid_ranges(rc, static_cast<int>(ch), &ranges);
  const QuantGrid grid = build_quant_grid(ranges);

  // Phase 2: exact RD selection.
  for_each_index(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
    const Job& j = jobs[i];
    ChannelWork& w = work[j.ch];
    w.trees[j.region] = select_mode_tree(w.cands[j.region], j.ch, cfg.lambda, grid);
  });

  EncodedImage img;
  img.width = static_cast<uint16_t>(input.width);
  img.height = static_cast<uint16_t>(input.height);
  img.lambda_index = lambda_to_index(cfg.lambda);
  img.grid = grid;

  EncodeResult res;
  for (std::size_t ch = 0; ch < work.size(); ++ch) {
    ArithEncoder enc;
    ChannelContexts ctx(static_cast<int>(ch));
    for (const ModeTree& tree : work[ch].trees) {
      encode_region_tree(tree, static_cast<int>(ch), &enc, &ctx);
      for (const LeafChoice* lf : tree_leaves(tree)) res.histogram.add(lf->blocksize, lf->kind);
    }
    img.payloads[ch] = enc.finish();
  }

  res.bytes = serialize_image(img);

  // Decode through the full deserialize path, exactly what a reader sees.
  DecodeConfig dc;
  dc.threads = cfg.threads;
  res.reconstruction = decode_image(res.bytes, dc);

  const PlaneImage in_luma = luma_plane(input);
  const PlaneImage out_luma = luma_plane(res.reconstruction);
  res.report.mse = plane_mse(in_luma, out_luma);
  res.report.psnr_db = psnr_from_mse(res.report.mse);
  res.report.ssim = plane_ssim(in_luma, out_luma);
  res.report.bpp = bits_per_pixel(res.bytes.size(), input.width, input.height);
  return res;
}

ImageU8 decode_image(const EncodedImage& parsed, const DecodeConfig& cfg) {
  const int w = parsed.width;
  const int h = parsed.height;
  const double lambda = lambda_from_index(parsed.lambda_index);
  const OverlapConfig ol = overlap_for_lambda(lambda);
  const bool gray = parsed.grayscale();
  const int nch = gray ? 1 : 3;

  std::array<PlaneImage, 3> planes;
  for (int ch = 0; ch < nch; ++ch) {
    const int pw = ch == 0 ? w : (w + 1) / 2;
    const int ph = ch == 0 ? h : (h + 1) / 2;
    const int chol = ch == 0 ? ol.ol_y : ol.ol_uv;

    std::vector<DecodedLeaf> leaves;
    {
      ArithDecoder dec(parsed.payloads[ch].data(), parsed.payloads[ch].size());
      ChannelContexts ctx(ch);
      for (const TileGeom& region : tile_regions(pw, ph, chol)) {
        std::vector<DecodedLeaf> part =
            decode_region_tree(&dec, &ctx, region, ch, chol, pw, ph, parsed.grid);
        for (DecodedLeaf& l : part) leaves.push_back(std::move(l));
      }
    }

    std::vector<Patch> patches(leaves.size());
    std::vector<BlockBound> bounds(leaves.size());
    for_each_index(static_cast<int>(leaves.size()), cfg.threads, [&](int i) {
      const DecodedLeaf& lf = leaves[i];
      Patch& p = patches[i];
      p.ext = lf.ext;
      p.values.resize(static_cast<std::size_t>(lf.ext.rows) * lf.ext.cols);
      const ModelEval me = make_model_eval(lf.model);
      std::size_t idx = 0;
      for (int r = lf.ext.row0; r < lf.ext.row1(); ++r)
        for (int c = lf.ext.col0; c < lf.ext.col1(); ++c)
          p.values[idx++] = me.regress(c - lf.ext.col0, r - lf.ext.row0);
      bounds[i] = BlockBound{lf.core, lf.blocksize};
    });

    PlaneImage merged = merge_overlaps(pw, ph, patches);
    merged.role = ch == 0 ? PlaneImage::Role::Y
                          : (ch == 1 ? PlaneImage::Role::U : PlaneImage::Role::V);
    if (cfg.deblock) merged = deblock(merged, lambda, bounds, class_of_channel(ch));
    if (cfg.denoise) merged = cfg.denoise(merged, cfg.denoise_param);
    planes[ch] = std::move(merged);
  }

  if (gray) {
    ImageU8 out = make_image(w, h, 1);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) out.at(r, c) = quantize_pixel(planes[0].at(r, c));
    return out;
  }
  const PlaneImage u = upsample_uv(planes[1], w, h);
  const PlaneImage v = upsample_uv(planes[2], w, h);
  return yuv_to_rgb(planes[0], u, v);
}

ImageU8 decode_image(const std::vector<uint8_t>& bytes, const DecodeConfig& cfg) {
  return decode_image(deserialize_image(bytes), cfg);
}

}  // namespace emr
