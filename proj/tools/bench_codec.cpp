// SPDX-License-Identifier: Apache-2.0
// Times the serial reference path against the parallel one and checks that
// both produce byte-identical streams and images.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "emr/codec.hpp"
#include "emr/parallel.hpp"
#include "emr/rng.hpp"

namespace {

using namespace emr;

ImageU8 synthetic_image(int size, uint64_t seed) {
  ImageU8 img = make_image(size, size, 3);
  Rng rng(seed);
  struct Blob {
    double r, c, rad, amp;
  };
  std::vector<Blob> blobs(12);
  for (Blob& b : blobs) {
    b.r = rng.u01() * size;
    b.c = rng.u01() * size;
    b.rad = 8 + rng.u01() * (size / 4.0);
    b.amp = (rng.u01() - 0.5) * 160.0;
  }
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      double base = 100.0 + 60.0 * std::sin(r * 0.035) + 60.0 * std::cos(c * 0.021);
      double bump = 0.0;
      for (const Blob& b : blobs) {
        double d2 = (r - b.r) * (r - b.r) + (c - b.c) * (c - b.c);
        bump += b.amp * std::exp(-d2 / (2.0 * b.rad * b.rad));
      }
      double noise = (rng.u01() - 0.5) * 6.0;
      for (int ch = 0; ch < 3; ++ch) {
        double shade = base + bump * (0.7 + 0.15 * ch) + noise;
        img.at(r, c, ch) = quantize_pixel(shade);
      }
    }
  }
  return img;
}

template <typename F>
double time_ms(F&& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int size = argc > 1 ? std::atoi(argv[1]) : 256;
  const double lambda = argc > 2 ? std::atof(argv[2]) : 800.0;
  if (size < 16 || size > 4096) {
    std::fprintf(stderr, "usage: bench_codec [size=256] [lambda=800]\n");
    return 2;
  }

  const ImageU8 img = synthetic_image(size, 42);
  const int hw = resolve_threads(0);

  EncodeConfig serial_cfg;
  serial_cfg.lambda = lambda;
  serial_cfg.threads = 1;
  EncodeConfig par_cfg = serial_cfg;
  par_cfg.threads = 0;

  EncodeResult serial_res, par_res;
  const double t_enc_serial = time_ms([&] { serial_res = encode_image(img, serial_cfg); });
  const double t_enc_par = time_ms([&] { par_res = encode_image(img, par_cfg); });

  if (serial_res.bytes != par_res.bytes) {
    std::fprintf(stderr, "FAIL: serial and parallel encodes differ\n");
    return 1;
  }

  ImageU8 dec_serial, dec_par;
  DecodeConfig dc_serial;
  dc_serial.threads = 1;
  DecodeConfig dc_par;
  dc_par.threads = 0;
  const double t_dec_serial = time_ms([&] { dec_serial = decode_image(serial_res.bytes, dc_serial); });
  const double t_dec_par = time_ms([&] { dec_par = decode_image(par_res.bytes, dc_par); });

  if (dec_serial.data != dec_par.data) {
    std::fprintf(stderr, "FAIL: serial and parallel decodes differ\n");
    return 1;
  }

  std::printf("image %dx%d rgb, lambda %g, %d hardware threads\n", size, size, lambda, hw);
  std::printf("encode  serial %8.1f ms   parallel %8.1f ms   speedup %.2fx\n", t_enc_serial,
              t_enc_par, t_enc_serial / t_enc_par);
  std::printf("decode  serial %8.1f ms   parallel %8.1f ms   speedup %.2fx\n", t_dec_serial,
              t_dec_par, t_dec_serial / t_dec_par);
  std::printf("stream  %zu bytes, %.4f bpp, psnr %.2f dB, ssim %.4f\n", serial_res.bytes.size(),
              serial_res.report.bpp, serial_res.report.psnr_db, serial_res.report.ssim);
  std::printf("serial and parallel outputs identical\n");
  return 0;
}
