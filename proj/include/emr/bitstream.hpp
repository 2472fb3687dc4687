// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "emr/mode_selection.hpp"

namespace emr {

struct CorruptStream : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// MSB-first bit I/O.
class BitWriter {
 public:
  void put(int bit) {
    cur_ = (cur_ << 1) | (bit & 1);
    if (++nbits_ == 8) {
      bytes_.push_back(cur_);
      cur_ = 0;
      nbits_ = 0;
    }
  }
  std::vector<uint8_t> finish() {
    if (nbits_ > 0) bytes_.push_back(cur_ << (8 - nbits_));
    cur_ = 0;
    nbits_ = 0;
    return std::move(bytes_);
  }

 private:
  std::vector<uint8_t> bytes_;
  uint8_t cur_ = 0;
  int nbits_ = 0;
};

// Reads 0 past the end; the arithmetic decoder relies on that.
class BitReader {
 public:
  BitReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}
  int get() {
    if (pos_ >= size_ * 8) return 0;
    int bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return bit;
  }

 private:
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

// Adaptive frequency table: uniform init, +1 per symbol, halved when the
// total reaches 2^15 (keeps the coder's total < 2^16).
struct FreqTable {
  explicit FreqTable(uint32_t alphabet) : freq(alphabet, 1), total(alphabet) {}
  std::vector<uint32_t> freq;
  uint32_t total;

  void update(uint32_t sym) {
    ++freq[sym];
    if (++total >= (1u << 15)) {
      total = 0;
      for (uint32_t& f : freq) {
        f = (f + 1) >> 1;
        total += f;
      }
    }
  }
};

class ArithEncoder {
 public:
  void encode(FreqTable& t, uint32_t sym);
  std::vector<uint8_t> finish();

 private:
  void emit(int bit);
  uint32_t low_ = 0;
  uint32_t high_ = 0xFFFFFFFFu;
  long long pending_ = 0;
  BitWriter bw_;
};

class ArithDecoder {
 public:
  ArithDecoder(const uint8_t* data, size_t size);
  uint32_t decode(FreqTable& t);

 private:
  BitReader br_;
  uint32_t low_ = 0;
  uint32_t high_ = 0xFFFFFFFFu;
  uint32_t value_ = 0;
};

// Generic symbol-sequence surface: alphabets[i] is the alphabet size of
// symbols[i]; one adaptive context per distinct alphabet size.
std::vector<uint8_t> aac_encode(const std::vector<uint32_t>& symbols,
                                const std::vector<uint32_t>& alphabets);
std::vector<uint32_t> aac_decode(const std::vector<uint8_t>& bytes,
                                 const std::vector<uint32_t>& alphabets);

// Adaptive contexts of one channel payload: one table per
// (blocksize, parameter kind), plus B / NM / EG / eta.
class ChannelContexts {
 public:
  explicit ChannelContexts(int ch_idx);
  FreqTable& b_ctx() { return b_; }
  FreqTable& eg_ctx() { return eg_; }
  FreqTable& nm_ctx(int blocksize) { return nm_[size_index(blocksize)]; }
  FreqTable& eta_ctx(int blocksize) { return eta_[size_index(blocksize)]; }
  FreqTable& param_ctx(int blocksize, ParamId p) {
    return params_[size_index(blocksize) * kNumHeaderParams + (int)p];
  }

 private:
  FreqTable b_;
  FreqTable eg_;
  std::vector<FreqTable> nm_, eta_, params_;
};

// One decoded leaf, ready for reconstruction.
struct DecodedLeaf {
  int blocksize = 64;
  KernelKind kind = KernelKind::Gaussian;
  int nm = 1;
  Rect core;  // plane coordinates
  Rect ext;
  std::vector<KernelCode> codes;
  MixtureModel model;
};

void encode_region_tree(const ModeTree& tree, int ch_idx, ArithEncoder* enc,
                        ChannelContexts* ctx);

std::vector<DecodedLeaf> decode_region_tree(ArithDecoder* dec, ChannelContexts* ctx,
                                            const TileGeom& region, int ch_idx, int ol,
                                            int plane_w, int plane_h, const QuantGrid& grid);

struct EncodedImage {
  uint16_t width = 0;
  uint16_t height = 0;
  uint8_t lambda_index = 0;
  QuantGrid grid;
  std::array<std::vector<uint8_t>, 3> payloads;  // Y, U, V; U/V empty for gray

  bool grayscale() const { return payloads[1].empty() && payloads[2].empty(); }
};

std::vector<uint8_t> serialize_image(const EncodedImage& img);
EncodedImage deserialize_image(const std::vector<uint8_t>& bytes);

// Stream preamble: magic, version, width, height, lambda index, then the
// 1008-bit mark grid and three length-prefixed payloads.
constexpr uint8_t kMagic[4] = {'E', 'M', 'R', 'K'};
constexpr uint8_t kFormatVersion = 1;
constexpr size_t kPreambleBytes = 4 + 1 + 2 + 2 + 1;
constexpr size_t kGridBytes = 126;  // 3*3*7 marks, (M, E) byte pair each

// The coded lambda index table. Entry order is normative; every lambda maps
// to the first entry sharing its (overlap, deblock-width) configuration.
constexpr double kLambdaIndexTable[8] = {50000, 10000, 3200, 800, 400, 200, 100, 20};
// The published sweep schedule used by analyze.
constexpr double kDefaultLambdaSweep[7] = {50000, 10000, 3200, 800, 400, 100, 20};

uint8_t lambda_to_index(double lambda);
double lambda_from_index(uint8_t idx);

}  // namespace emr
