// SPDX-License-Identifier: Apache-2.0
#include "emr/bitstream.hpp"

#include <algorithm>
#include <map>

#include "emr/image_pipeline.hpp"

namespace emr {

namespace {

constexpr uint32_t kHalf = 0x80000000u;
constexpr uint32_t kQuarter = 0x40000000u;
constexpr uint32_t kThreeQuarter = 0xC0000000u;

}  // namespace

void ArithEncoder::emit(int bit) {
  bw_.put(bit);
  while (pending_ > 0) {
    bw_.put(!bit);
    --pending_;
  }
}

void ArithEncoder::encode(FreqTable& t, uint32_t sym) {
  uint32_t cum_lo = 0;
  for (uint32_t s = 0; s < sym; ++s) cum_lo += t.freq[s];
  uint32_t cum_hi = cum_lo + t.freq[sym];
  uint64_t range = (uint64_t)high_ - low_ + 1;
  high_ = low_ + (uint32_t)(range * cum_hi / t.total) - 1;
  low_ = low_ + (uint32_t)(range * cum_lo / t.total);
  for (;;) {
    if (high_ < kHalf) {
      emit(0);
    } else if (low_ >= kHalf) {
      emit(1);
      low_ -= kHalf;
      high_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarter) {
      ++pending_;
      low_ -= kQuarter;
      high_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
  }
  t.update(sym);
}

std::vector<uint8_t> ArithEncoder::finish() {
  ++pending_;
  if (low_ < kQuarter) {
    emit(0);
  } else {
    emit(1);
  }
  return bw_.finish();
}

ArithDecoder::ArithDecoder(const uint8_t* data, size_t size) : br_(data, size) {
  for (int i = 0; i < 32; ++i) value_ = (value_ << 1) | br_.get();
}

uint32_t ArithDecoder::decode(FreqTable& t) {
  uint64_t range = (uint64_t)high_ - low_ + 1;
  uint32_t target = (uint32_t)((((uint64_t)(value_ - low_) + 1) * t.total - 1) / range);
  uint32_t sym = 0;
  uint32_t cum_lo = 0;
  while (cum_lo + t.freq[sym] <= target) {
    cum_lo += t.freq[sym];
    ++sym;
  }
  uint32_t cum_hi = cum_lo + t.freq[sym];
  high_ = low_ + (uint32_t)(range * cum_hi / t.total) - 1;
  low_ = low_ + (uint32_t)(range * cum_lo / t.total);
  for (;;) {
    if (high_ < kHalf) {
    } else if (low_ >= kHalf) {
      low_ -= kHalf;
      high_ -= kHalf;
      value_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarter) {
      low_ -= kQuarter;
      high_ -= kQuarter;
      value_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
    value_ = (value_ << 1) | br_.get();
  }
  t.update(sym);
  return sym;
}

std::vector<uint8_t> aac_encode(const std::vector<uint32_t>& symbols,
                                const std::vector<uint32_t>& alphabets) {
  if (symbols.empty()) return {};
  ArithEncoder enc;
  std::map<uint32_t, FreqTable> ctx;
  for (size_t i = 0; i < symbols.size(); ++i) {
    auto [it, _] = ctx.try_emplace(alphabets[i], alphabets[i]);
    enc.encode(it->second, symbols[i]);
  }
  return enc.finish();
}

std::vector<uint32_t> aac_decode(const std::vector<uint8_t>& bytes,
                                 const std::vector<uint32_t>& alphabets) {
  if (alphabets.empty()) return {};
  ArithDecoder dec(bytes.data(), bytes.size());
  std::map<uint32_t, FreqTable> ctx;
  std::vector<uint32_t> out;
  out.reserve(alphabets.size());
  for (uint32_t a : alphabets) {
    auto [it, _] = ctx.try_emplace(a, a);
    out.push_back(dec.decode(it->second));
  }
  return out;
}

ChannelContexts::ChannelContexts(int ch_idx) : b_(3), eg_(2) {
  ChannelClass cc = class_of_channel(ch_idx);
  for (int s = 0; s < 3; ++s) {
    int blocksize = s == 0 ? 16 : s == 1 ? 32 : 64;
    nm_.emplace_back(1u << nm_bits(cc, blocksize));
    eta_.emplace_back(1u << eta_bits(cc));
    for (int p = 0; p < kNumHeaderParams; ++p) {
      int w = param_bits(cc, blocksize, (ParamId)p, true);
      params_.emplace_back(w > 0 ? (1u << w) : 1u);
    }
  }
}

namespace {

void encode_leaf(const LeafChoice& leaf, int ch_idx, ArithEncoder* enc, ChannelContexts* ctx) {
  ChannelClass cc = class_of_channel(ch_idx);
  bool multi = leaf.nm > 1;
  enc->encode(ctx->nm_ctx(leaf.blocksize), (uint32_t)(leaf.nm - 1));
  if (leaf.blocksize == 32 && multi)
    enc->encode(ctx->eg_ctx(), leaf.kind == KernelKind::Epanechnikov ? 1 : 0);
  for (const KernelCode& c : leaf.codes) {
    if (multi) {
      enc->encode(ctx->param_ctx(leaf.blocksize, ParamId::MuX), (uint32_t)(c.mux - 1));
      enc->encode(ctx->param_ctx(leaf.blocksize, ParamId::MuY), (uint32_t)(c.muy - 1));
      enc->encode(ctx->param_ctx(leaf.blocksize, ParamId::MuZ), (uint32_t)(c.muz - 1));
      enc->encode(ctx->eta_ctx(leaf.blocksize), (uint32_t)(c.eta - 1));
      enc->encode(ctx->param_ctx(leaf.blocksize, ParamId::E1), (uint32_t)(c.e1 - 1));
      enc->encode(ctx->param_ctx(leaf.blocksize, ParamId::E2), (uint32_t)(c.e2 - 1));
    } else {
      enc->encode(ctx->param_ctx(leaf.blocksize, ParamId::MuZ), (uint32_t)(c.muz - 1));
    }
    if (cc == ChannelClass::Y) {
      enc->encode(ctx->param_ctx(leaf.blocksize, ParamId::SigXZ), (uint32_t)(c.sxz - 1));
      enc->encode(ctx->param_ctx(leaf.blocksize, ParamId::SigYZ), (uint32_t)(c.syz - 1));
    }
  }
}

DecodedLeaf decode_leaf(int blocksize, const Rect& core, int ch_idx, int ol, int plane_w,
                        int plane_h, const QuantGrid& grid, ArithDecoder* dec,
                        ChannelContexts* ctx) {
  ChannelClass cc = class_of_channel(ch_idx);
  DecodedLeaf leaf;
  leaf.blocksize = blocksize;
  leaf.core = core;
  leaf.ext = grow_clip(core, ol, plane_w, plane_h);
  leaf.nm = (int)dec->decode(ctx->nm_ctx(blocksize)) + 1;
  bool multi = leaf.nm > 1;
  if (blocksize == 32 && multi) {
    leaf.kind = dec->decode(ctx->eg_ctx()) == 1 ? KernelKind::Epanechnikov : KernelKind::Gaussian;
  } else if (multi) {
    leaf.kind = blocksize == 16 ? KernelKind::Epanechnikov : KernelKind::Gaussian;
  } else {
    leaf.kind = single_kernel_kind(blocksize);
  }
  leaf.codes.resize(leaf.nm);
  for (KernelCode& c : leaf.codes) {
    if (multi) {
      c.mux = (int)dec->decode(ctx->param_ctx(blocksize, ParamId::MuX)) + 1;
      c.muy = (int)dec->decode(ctx->param_ctx(blocksize, ParamId::MuY)) + 1;
      c.muz = (int)dec->decode(ctx->param_ctx(blocksize, ParamId::MuZ)) + 1;
      c.eta = (int)dec->decode(ctx->eta_ctx(blocksize)) + 1;
      c.e1 = (int)dec->decode(ctx->param_ctx(blocksize, ParamId::E1)) + 1;
      c.e2 = (int)dec->decode(ctx->param_ctx(blocksize, ParamId::E2)) + 1;
    } else {
      c.muz = (int)dec->decode(ctx->param_ctx(blocksize, ParamId::MuZ)) + 1;
    }
    if (cc == ChannelClass::Y) {
      c.sxz = (int)dec->decode(ctx->param_ctx(blocksize, ParamId::SigXZ)) + 1;
      c.syz = (int)dec->decode(ctx->param_ctx(blocksize, ParamId::SigYZ)) + 1;
    }
  }
  leaf.model = build_decoded_model(ch_idx, blocksize, leaf.kind, leaf.codes, grid, leaf.ext.cols,
                                   leaf.ext.rows);
  return leaf;
}

}  // namespace

void encode_region_tree(const ModeTree& tree, int ch_idx, ArithEncoder* enc,
                        ChannelContexts* ctx) {
  if (!tree.split) {
    enc->encode(ctx->b_ctx(), 0);
    encode_leaf(tree.leaf64, ch_idx, enc, ctx);
    return;
  }
  for (const ModeTree::Quad& q : tree.quads) {
    if (!q.present) continue;
    if (!q.split) {
      enc->encode(ctx->b_ctx(), 1);
      encode_leaf(q.leaf32, ch_idx, enc, ctx);
    } else {
      enc->encode(ctx->b_ctx(), 2);
      for (const LeafChoice& l : q.leaves16) encode_leaf(l, ch_idx, enc, ctx);
    }
  }
}

std::vector<DecodedLeaf> decode_region_tree(ArithDecoder* dec, ChannelContexts* ctx,
                                            const TileGeom& region, int ch_idx, int ol,
                                            int plane_w, int plane_h, const QuantGrid& grid) {
  std::vector<DecodedLeaf> out;
  uint32_t b = dec->decode(ctx->b_ctx());
  if (b == 0) {
    out.push_back(
        decode_leaf(64, region.core, ch_idx, ol, plane_w, plane_h, grid, dec, ctx));
    return out;
  }
  bool first = true;
  for (int q = 0; q < 4; ++q) {
    Rect qr = quad_core(region.core, q);
    if (qr.empty()) continue;
    // The first present quadrant's B mark was consumed before the loop.
    if (!first) b = dec->decode(ctx->b_ctx());
    first = false;
    if (b == 1) {
      out.push_back(decode_leaf(32, qr, ch_idx, ol, plane_w, plane_h, grid, dec, ctx));
    } else if (b == 2) {
      for (int p = 0; p < 4; ++p) {
        Rect pr = piece_core(region.core, q, p);
        if (pr.empty()) continue;
        out.push_back(decode_leaf(16, pr, ch_idx, ol, plane_w, plane_h, grid, dec, ctx));
      }
    } else {
      throw CorruptStream("unexpected region mark");
    }
  }
  return out;
}

std::vector<uint8_t> serialize_image(const EncodedImage& img) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kFormatVersion);
  out.push_back((uint8_t)(img.width >> 8));
  out.push_back((uint8_t)(img.width & 0xFF));
  out.push_back((uint8_t)(img.height >> 8));
  out.push_back((uint8_t)(img.height & 0xFF));
  out.push_back(img.lambda_index);
  for (int ch = 0; ch < 3; ++ch)
    for (int s = 0; s < 3; ++s)
      for (int p = 0; p < kNumHeaderParams; ++p) {
        out.push_back(img.grid.marks[ch][s][p].m_code);
        out.push_back(img.grid.marks[ch][s][p].e_code);
      }
  for (const std::vector<uint8_t>& payload : img.payloads) {
    uint32_t n = (uint32_t)payload.size();
    out.push_back((uint8_t)(n >> 24));
    out.push_back((uint8_t)(n >> 16));
    out.push_back((uint8_t)(n >> 8));
    out.push_back((uint8_t)n);
    out.insert(out.end(), payload.begin(), payload.end());
  }
  return out;
}

EncodedImage deserialize_image(const std::vector<uint8_t>& bytes) {
  size_t need = kPreambleBytes + kGridBytes;
  if (bytes.size() < need) throw CorruptStream("truncated stream");
  if (!std::equal(kMagic, kMagic + 4, bytes.begin())) throw CorruptStream("bad magic");
  if (bytes[4] != kFormatVersion) throw CorruptStream("unsupported version");
  EncodedImage img;
  img.width = (uint16_t)((bytes[5] << 8) | bytes[6]);
  img.height = (uint16_t)((bytes[7] << 8) | bytes[8]);
  img.lambda_index = bytes[9];
  if (img.width == 0 || img.height == 0) throw CorruptStream("bad dimensions");
  if (img.lambda_index >= 8) throw CorruptStream("bad lambda index");
  size_t pos = kPreambleBytes;
  for (int ch = 0; ch < 3; ++ch)
    for (int s = 0; s < 3; ++s)
      for (int p = 0; p < kNumHeaderParams; ++p) {
        img.grid.marks[ch][s][p].m_code = bytes[pos++];
        img.grid.marks[ch][s][p].e_code = bytes[pos++];
      }
  for (int i = 0; i < 3; ++i) {
    if (bytes.size() - pos < 4) throw CorruptStream("truncated payload table");
    uint32_t n = ((uint32_t)bytes[pos] << 24) | ((uint32_t)bytes[pos + 1] << 16) |
                 ((uint32_t)bytes[pos + 2] << 8) | bytes[pos + 3];
    pos += 4;
    if (bytes.size() - pos < n) throw CorruptStream("truncated payload");
    img.payloads[i].assign(bytes.begin() + pos, bytes.begin() + pos + n);
    pos += n;
  }
  if (pos != bytes.size()) throw CorruptStream("trailing bytes");
  return img;
}

namespace {

// Decoder-visible configuration class of a lambda value.
struct LambdaClass {
  int ol_y, ol_uv, y64, y32, uv64, uv32;
  bool operator==(const LambdaClass&) const = default;
};

LambdaClass lambda_class(double lambda) {
  OverlapConfig ol = overlap_for_lambda(lambda);
  return {ol.ol_y,
          ol.ol_uv,
          deblock_width(ChannelClass::Y, 64, lambda),
          deblock_width(ChannelClass::Y, 32, lambda),
          deblock_width(ChannelClass::UV, 64, lambda),
          deblock_width(ChannelClass::UV, 32, lambda)};
}

}  // namespace

uint8_t lambda_to_index(double lambda) {
  for (int i = 0; i < 8; ++i)
    if (lambda == kLambdaIndexTable[i]) return (uint8_t)i;
  LambdaClass want = lambda_class(lambda);
  for (int i = 0; i < 8; ++i)
    if (lambda_class(kLambdaIndexTable[i]) == want) return (uint8_t)i;
  throw std::logic_error("lambda class not covered by index table");
}

double lambda_from_index(uint8_t idx) {
  if (idx >= 8) throw CorruptStream("bad lambda index");
  return kLambdaIndexTable[idx];
}

}  // namespace emr
