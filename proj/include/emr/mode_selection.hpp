// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "emr/mixture_regression.hpp"
#include "emr/plane.hpp"
#include "emr/quant.hpp"

namespace emr {

struct AmsLimits {
  int n64 = 16;
  int n32 = 10;
  int n16 = 4;
};

inline AmsLimits default_limits(ChannelClass ch) {
  return ch == ChannelClass::Y ? AmsLimits{16, 10, 4} : AmsLimits{8, 4, 4};
}

struct RdCost {
  double distortion = 0.0;   // SSE over core pixels, decoded-model simulation
  long long rate_bits = 0;
  double j_value = 0.0;
};

// Everything rd_cost needs besides the fit itself.
struct ModeMeta {
  int ch_idx = 0;
  int blocksize = 64;  // nominal class, 16/32/64
  bool include_b = true;
  const Block* block = nullptr;
  const QuantGrid* grid = nullptr;
};

RdCost rd_cost(const FitResult& fit, const ModeMeta& meta, double lambda);

// One selected leaf. cost.rate_bits excludes the shared B mark for 16x16
// leaves (paid once per four-leaf group).
struct LeafChoice {
  int blocksize = 64;
  KernelKind kind = KernelKind::Gaussian;
  int nm = 1;
  Rect core;  // plane coordinates
  Rect ext;
  std::vector<KernelCode> codes;
  MixtureModel decoded;
  FitResult fit;
  RdCost cost;
};

struct ModeTree {
  Rect core;  // region core, plane coordinates
  Rect ext;
  bool split = false;
  LeafChoice leaf64;  // valid when !split
  struct Quad {
    bool present = false;  // quadrant intersects the region core
    bool split = false;
    LeafChoice leaf32;                // valid when present && !split
    std::vector<LeafChoice> leaves16;  // present 16x16 pieces, raster order
  };
  std::array<Quad, 4> quads;  // raster order: TL, TR, BL, BR
  double distortion = 0.0;
  long long rate_bits = 0;
  double j_value = 0.0;
};

// Collects every leaf of the tree in stream order.
std::vector<const LeafChoice*> tree_leaves(const ModeTree& tree);

// One candidate fit at one geometry unit.
struct CandidateFit {
  KernelKind kind = KernelKind::Gaussian;
  int nm = 1;
  FitResult fit;
};

struct UnitCandidates {
  Rect core;  // plane coordinates, non-empty
  Rect ext;
  Block block;
  std::vector<CandidateFit> fits;  // canonical order: nm ascending, EK before GK
};

struct RegionCandidates {
  TileGeom region;
  UnitCandidates l64;
  std::array<std::optional<UnitCandidates>, 4> l32;
  std::array<std::array<std::optional<UnitCandidates>, 4>, 4> l16;
};

// Phase 1: run every candidate fit for one region. ol is the overlap margin
// applied to every unit, clipped at plane borders.
RegionCandidates compute_region_candidates(const PlaneImage& plane, const TileGeom& region,
                                           int ch_idx, const AmsLimits& limits, int ol,
                                           uint64_t seed);

// Feed all candidate models of a region into the header-range accumulators.
void accumulate_grid_ranges(const RegionCandidates& cands, int ch_idx, GridRanges* ranges);

// Phase 2: exact bottom-up DP over the candidate set.
ModeTree select_mode_tree(const RegionCandidates& cands, int ch_idx, double lambda,
                          const QuantGrid& grid);

// Convenience: phases 1 and 2 with a caller-provided grid.
ModeTree ams_select(const PlaneImage& plane, const TileGeom& region, int ch_idx, double lambda,
                    const AmsLimits& limits, int ol, const QuantGrid& grid, uint64_t seed);

// Nominal per-kernel costs and the model-count ceilings they imply.
int nominal_kernel_bits(int blocksize);
int critical_models(int blocksize);

}  // namespace emr
