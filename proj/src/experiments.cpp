// SPDX-License-Identifier: Apache-2.0
#include "emr/experiments.hpp"

#include <algorithm>
#include <cstdarg>
#include <cstdio>

#include "emr/parallel.hpp"
#include "emr/rng.hpp"

namespace emr {

std::vector<AnalyzeRow> run_analyze(const ImageU8& input, const std::vector<double>& lambdas,
                                    const EncodeConfig& base) {
  std::vector<AnalyzeRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    EncodeConfig cfg = base;
    cfg.lambda = lambda;
    EncodeResult res = encode_image(input, cfg);
    AnalyzeRow row;
    row.lambda = lambda;
    row.bpp = res.report.bpp;
    row.psnr_db = res.report.psnr_db;
    row.ssim = res.report.ssim;
    row.hist = res.histogram;
    rows.push_back(row);
  }
  return rows;
}

namespace {

void append_line(std::string* out, const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  *out += buf;
}

}  // namespace

std::string analyze_csv(const std::vector<AnalyzeRow>& rows) {
  std::string out =
      "lambda,bpp,psnr_db,ssim,n16_ek,n16_gk,n32_ek,n32_gk,n64_ek,n64_gk,leaves\n";
  for (const AnalyzeRow& r : rows) {
    append_line(&out, "%g,%.6f,%.4f,%.6f,%llu,%llu,%llu,%llu,%llu,%llu,%llu\n", r.lambda, r.bpp,
                r.psnr_db, r.ssim,
                (unsigned long long)r.hist.at(16, KernelKind::Epanechnikov),
                (unsigned long long)r.hist.at(16, KernelKind::Gaussian),
                (unsigned long long)r.hist.at(32, KernelKind::Epanechnikov),
                (unsigned long long)r.hist.at(32, KernelKind::Gaussian),
                (unsigned long long)r.hist.at(64, KernelKind::Epanechnikov),
                (unsigned long long)r.hist.at(64, KernelKind::Gaussian),
                (unsigned long long)r.hist.total());
  }
  return out;
}

std::vector<int> default_model_ks() { return {1, 2, 4}; }

std::vector<ModelRow> run_model(const ImageU8& input, const std::vector<int>& ks, uint64_t seed,
                                int threads) {
  const PlaneImage luma = luma_plane(input);
  std::vector<ModelRow> rows;

  for (int bs : {16, 32, 64}) {
    const int nbx = luma.width / bs;
    const int nby = luma.height / bs;
    const int nblocks = nbx * nby;
    if (nblocks == 0) continue;

    std::vector<int> ks_used;
    for (int k : ks) {
      int kk = std::clamp(k, 1, critical_models(bs));
      if (std::find(ks_used.begin(), ks_used.end(), kk) == ks_used.end()) ks_used.push_back(kk);
    }

    for (int k : ks_used) {
      std::vector<double> ek_s(nblocks), gk_s(nblocks);
      for_each_index(nblocks, threads, [&](int b) {
        const int br = (b / nbx) * bs;
        const int bc = (b % nbx) * bs;
        Block blk;
        blk.origin_row = br;
        blk.origin_col = bc;
        blk.width = bs;
        blk.height = bs;
        blk.core = Rect{0, 0, bs, bs};
        blk.pixels.resize((size_t)bs * bs);
        for (int r = 0; r < bs; ++r)
          for (int c = 0; c < bs; ++c) blk.pixels[(size_t)r * bs + c] = luma.at(br + r, bc + c);

        PlaneImage orig = make_plane(bs, bs);
        orig.samples = blk.pixels;
        for (int kind = 0; kind < 2; ++kind) {
          const KernelKind kk = kind == 0 ? KernelKind::Epanechnikov : KernelKind::Gaussian;
          const uint64_t s = mix_seed(
              seed, {(uint64_t)bs, (uint64_t)k, (uint64_t)b, (uint64_t)kind});
          FitResult fit = fit_block(blk, k, kk, s);
          PlaneImage rec = make_plane(bs, bs);
          rec.samples = regress_block(fit.model, bs, bs);
          (kind == 0 ? ek_s : gk_s)[b] = plane_ssim(orig, rec);
        }
      });

      ModelRow row;
      row.blocksize = bs;
      row.k = k;
      row.blocks = nblocks;
      for (int b = 0; b < nblocks; ++b) {
        row.ek_ssim += ek_s[b];
        row.gk_ssim += gk_s[b];
      }
      row.ek_ssim /= nblocks;
      row.gk_ssim /= nblocks;
      row.bits_per_block = (long long)k * nominal_kernel_bits(bs);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string model_csv(const std::vector<ModelRow>& rows) {
  std::string out = "blocksize,k,blocks,ek_ssim,gk_ssim,ssim_delta,bits_per_block\n";
  for (const ModelRow& r : rows) {
    append_line(&out, "%d,%d,%d,%.6f,%.6f,%.6f,%lld\n", r.blocksize, r.k, r.blocks, r.ek_ssim,
                r.gk_ssim, r.ek_ssim - r.gk_ssim, r.bits_per_block);
  }
  return out;
}

}  // namespace emr
