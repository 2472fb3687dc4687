// SPDX-License-Identifier: Apache-2.0
#include "emr/mode_selection.hpp"

#include <cmath>
#include <stdexcept>

#include "emr/rng.hpp"

namespace emr {

namespace {

Block make_block(const PlaneImage& plane, const Rect& core, const Rect& ext) {
  Block b;
  b.origin_row = ext.row0;
  b.origin_col = ext.col0;
  b.width = ext.cols;
  b.height = ext.rows;
  b.pixels.resize((size_t)ext.cols * ext.rows);
  for (int r = 0; r < ext.rows; ++r)
    for (int c = 0; c < ext.cols; ++c)
      b.pixels[(size_t)r * ext.cols + c] = plane.at(ext.row0 + r, ext.col0 + c);
  b.core = {core.row0 - ext.row0, core.col0 - ext.col0, core.rows, core.cols};
  return b;
}

UnitCandidates make_unit(const PlaneImage& plane, const Rect& core, int ol) {
  UnitCandidates u;
  u.core = core;
  u.ext = grow_clip(core, ol, plane.width, plane.height);
  u.block = make_block(plane, core, u.ext);
  return u;
}

void fill_fits(UnitCandidates& u, int blocksize, int limit, ChannelClass cc,
               uint64_t unit_seed) {
  int cap = std::min(limit, 1 << nm_bits(cc, blocksize));
  KernelKind single = single_kernel_kind(blocksize);
  u.fits.push_back({single, 1, single_kernel_fit(u.block, single)});
  for (int nm = 2; nm <= cap; ++nm) {
    for (int kid = 0; kid < 2; ++kid) {
      KernelKind kind = kid == 0 ? KernelKind::Epanechnikov : KernelKind::Gaussian;
      if (blocksize == 16 && kind != KernelKind::Epanechnikov) continue;
      if (blocksize == 64 && kind != KernelKind::Gaussian) continue;
      FitResult fit = fit_block(u.block, nm, kind, mix_seed(unit_seed, {(uint64_t)kid, (uint64_t)nm}));
      int actual = (int)fit.model.kernels.size();
      if (actual < 2) continue;  // collapsed to the single-kernel case
      u.fits.push_back({kind, actual, std::move(fit)});
    }
  }
}

LeafChoice evaluate_leaf(const UnitCandidates& unit, const CandidateFit& cand, int ch_idx,
                         int blocksize, bool include_b, double lambda, const QuantGrid& grid) {
  ChannelClass cc = class_of_channel(ch_idx);
  bool multi = cand.nm > 1;
  LeafChoice lc;
  lc.blocksize = blocksize;
  lc.kind = cand.kind;
  lc.nm = cand.nm;
  lc.core = unit.core;
  lc.ext = unit.ext;
  lc.fit = cand.fit;
  lc.codes.reserve(cand.nm);
  for (const KernelParams& k : cand.fit.model.kernels)
    lc.codes.push_back(quantize_kernel(k, ch_idx, blocksize, multi, grid));
  lc.decoded =
      build_decoded_model(ch_idx, blocksize, cand.kind, lc.codes, grid, unit.ext.cols, unit.ext.rows);
  ModelEval ev = make_model_eval(lc.decoded);
  double sse = 0;
  for (int r = 0; r < lc.core.rows; ++r) {
    int br = lc.core.row0 - lc.ext.row0 + r;
    for (int c = 0; c < lc.core.cols; ++c) {
      int bc = lc.core.col0 - lc.ext.col0 + c;
      double e = ev.regress(bc, br) - unit.block.at(br, bc);
      sse += e * e;
    }
  }
  lc.cost.distortion = sse;
  lc.cost.rate_bits = leaf_rate_bits(cc, blocksize, cand.nm, include_b);
  lc.cost.j_value = sse + lambda * (double)lc.cost.rate_bits;
  return lc;
}

// Minimum-J leaf over a unit's candidates; strict < keeps the canonical-order
// winner on ties (fewer models, then EK).
LeafChoice best_leaf(const UnitCandidates& unit, int ch_idx, int blocksize, bool include_b,
                     double lambda, const QuantGrid& grid) {
  LeafChoice best;
  bool first = true;
  for (const CandidateFit& cand : unit.fits) {
    LeafChoice lc = evaluate_leaf(unit, cand, ch_idx, blocksize, include_b, lambda, grid);
    if (first || lc.cost.j_value < best.cost.j_value) {
      best = std::move(lc);
      first = false;
    }
  }
  return best;
}

}  // namespace

RdCost rd_cost(const FitResult& fit, const ModeMeta& meta, double lambda) {
  if (!meta.block || !meta.grid) throw std::invalid_argument("rd_cost needs block and grid");
  ChannelClass cc = class_of_channel(meta.ch_idx);
  int nm = (int)fit.model.kernels.size();
  bool multi = nm > 1;
  std::vector<KernelCode> codes;
  codes.reserve(nm);
  for (const KernelParams& k : fit.model.kernels)
    codes.push_back(quantize_kernel(k, meta.ch_idx, meta.blocksize, multi, *meta.grid));
  MixtureModel decoded = build_decoded_model(meta.ch_idx, meta.blocksize, fit.model.kind, codes,
                                             *meta.grid, meta.block->width, meta.block->height);
  ModelEval ev = make_model_eval(decoded);
  RdCost cost;
  double sse = 0;
  for (int r = meta.block->core.row0; r < meta.block->core.row1(); ++r)
    for (int c = meta.block->core.col0; c < meta.block->core.col1(); ++c) {
      double e = ev.regress(c, r) - meta.block->at(r, c);
      sse += e * e;
    }
  cost.distortion = sse;
  cost.rate_bits = leaf_rate_bits(cc, meta.blocksize, nm, meta.include_b);
  cost.j_value = sse + lambda * (double)cost.rate_bits;
  return cost;
}

std::vector<const LeafChoice*> tree_leaves(const ModeTree& tree) {
  std::vector<const LeafChoice*> out;
  if (!tree.split) {
    out.push_back(&tree.leaf64);
    return out;
  }
  for (const ModeTree::Quad& q : tree.quads) {
    if (!q.present) continue;
    if (!q.split) {
      out.push_back(&q.leaf32);
    } else {
      for (const LeafChoice& l : q.leaves16) out.push_back(&l);
    }
  }
  return out;
}

RegionCandidates compute_region_candidates(const PlaneImage& plane, const TileGeom& region,
                                           int ch_idx, const AmsLimits& limits, int ol,
                                           uint64_t seed) {
  ChannelClass cc = class_of_channel(ch_idx);
  RegionCandidates out;
  out.region = region;

  out.l64 = make_unit(plane, region.core, ol);
  fill_fits(out.l64, 64, limits.n64, cc, mix_seed(seed, {0}));

  const Rect& core = region.core;
  for (int q = 0; q < 4; ++q) {
    Rect qr = quad_core(core, q);
    if (qr.empty()) continue;
    UnitCandidates u32 = make_unit(plane, qr, ol);
    fill_fits(u32, 32, limits.n32, cc, mix_seed(seed, {1ull + q}));
    out.l32[q] = std::move(u32);
    for (int p = 0; p < 4; ++p) {
      Rect pr = piece_core(core, q, p);
      if (pr.empty()) continue;
      UnitCandidates u16 = make_unit(plane, pr, ol);
      fill_fits(u16, 16, limits.n16, cc, mix_seed(seed, {5ull + q * 4 + p}));
      out.l16[q][p] = std::move(u16);
    }
  }
  return out;
}

void accumulate_grid_ranges(const RegionCandidates& cands, int ch_idx, GridRanges* ranges) {
  for (const CandidateFit& f : cands.l64.fits)
    ranges->add_model(f.fit.model, ch_idx, 64, f.nm > 1);
  for (int q = 0; q < 4; ++q) {
    if (!cands.l32[q]) continue;
    for (const CandidateFit& f : cands.l32[q]->fits)
      ranges->add_model(f.fit.model, ch_idx, 32, f.nm > 1);
    for (int p = 0; p < 4; ++p) {
      if (!cands.l16[q][p]) continue;
      for (const CandidateFit& f : cands.l16[q][p]->fits)
        ranges->add_model(f.fit.model, ch_idx, 16, f.nm > 1);
    }
  }
}

ModeTree select_mode_tree(const RegionCandidates& cands, int ch_idx, double lambda,
                          const QuantGrid& grid) {
  ModeTree tree;
  tree.core = cands.region.core;
  tree.ext = cands.region.ext;

  tree.leaf64 = best_leaf(cands.l64, ch_idx, 64, true, lambda, grid);

  double split_j = 0;
  bool any_quad = false;
  std::array<ModeTree::Quad, 4> quads{};
  for (int q = 0; q < 4; ++q) {
    if (!cands.l32[q]) continue;
    ModeTree::Quad& quad = quads[q];
    quad.present = true;
    any_quad = true;
    quad.leaf32 = best_leaf(*cands.l32[q], ch_idx, 32, true, lambda, grid);

    double group_j = lambda * (double)b_bits(16);  // shared "11" mark
    std::vector<LeafChoice> leaves;
    for (int p = 0; p < 4; ++p) {
      if (!cands.l16[q][p]) continue;
      LeafChoice l = best_leaf(*cands.l16[q][p], ch_idx, 16, false, lambda, grid);
      group_j += l.cost.j_value;
      leaves.push_back(std::move(l));
    }
    if (group_j < quad.leaf32.cost.j_value) {
      quad.split = true;
      quad.leaves16 = std::move(leaves);
      split_j += group_j;
    } else {
      split_j += quad.leaf32.cost.j_value;
    }
  }

  if (any_quad && split_j < tree.leaf64.cost.j_value) {
    tree.split = true;
    tree.quads = std::move(quads);
    tree.j_value = split_j;
    for (const ModeTree::Quad& q : tree.quads) {
      if (!q.present) continue;
      if (!q.split) {
        tree.distortion += q.leaf32.cost.distortion;
        tree.rate_bits += q.leaf32.cost.rate_bits;
      } else {
        tree.rate_bits += b_bits(16);
        for (const LeafChoice& l : q.leaves16) {
          tree.distortion += l.cost.distortion;
          tree.rate_bits += l.cost.rate_bits;
        }
      }
    }
  } else {
    tree.split = false;
    tree.j_value = tree.leaf64.cost.j_value;
    tree.distortion = tree.leaf64.cost.distortion;
    tree.rate_bits = tree.leaf64.cost.rate_bits;
  }
  return tree;
}

ModeTree ams_select(const PlaneImage& plane, const TileGeom& region, int ch_idx, double lambda,
                    const AmsLimits& limits, int ol, const QuantGrid& grid, uint64_t seed) {
  RegionCandidates cands = compute_region_candidates(plane, region, ch_idx, limits, ol, seed);
  return select_mode_tree(cands, ch_idx, lambda, grid);
}

int nominal_kernel_bits(int blocksize) { return blocksize == 16 ? 62 : blocksize == 32 ? 72 : 81; }

int critical_models(int blocksize) {
  int budget = blocksize == 16 ? 248 : blocksize == 32 ? 720 : 1296;
  return budget / nominal_kernel_bits(blocksize);
}

}  // namespace emr
