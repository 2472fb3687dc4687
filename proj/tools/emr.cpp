// SPDX-License-Identifier: Apache-2.0
// Command-line front end: encode, decode, analyze, model.
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emr/codec.hpp"
#include "emr/experiments.hpp"
#include "emr/image_io.hpp"
#include "emr/image_pipeline.hpp"

namespace {

using namespace emr;

void apply_limits(const std::vector<std::string>& specs, EncodeConfig* cfg) {
  for (const std::string& spec : specs) {
    const auto eq = spec.find('=');
    int a = 0, b = 0, c = 0;
    if (eq == std::string::npos ||
        std::sscanf(spec.c_str() + eq + 1, "%d,%d,%d", &a, &b, &c) != 3)
      throw std::invalid_argument("bad --limits, expected y=16,10,4 or uv=8,4,4");
    const std::string key = spec.substr(0, eq);
    if (key == "y")
      cfg->limits_y = AmsLimits{a, b, c};
    else if (key == "uv")
      cfg->limits_uv = AmsLimits{a, b, c};
    else
      throw std::invalid_argument("bad --limits key: " + key);
  }
}

std::vector<double> parse_lambda_list(const std::string& spec) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= spec.size()) {
    size_t comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    const std::string tok = spec.substr(pos, comma - pos);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size() || !(v > 0))
      throw std::invalid_argument("bad --lambda-list entry: '" + tok + "'");
    out.push_back(v);
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty --lambda-list");
  return out;
}

// Bridges `--denoise external:<cmd>`: the command is invoked per plane as
// `<cmd> <in.pgm> <out.pgm>` and must write a same-size 8-bit PGM.
PlaneImage external_denoise(const std::string& cmd, const PlaneImage& plane) {
  namespace fs = std::filesystem;
  static std::atomic<uint64_t> counter{0};
  static const uint64_t run_tag = std::random_device{}();
  const uint64_t tag = run_tag ^ (counter++ << 20);
  const fs::path in_path = fs::temp_directory_path() / ("emr_dn_" + std::to_string(tag) + "_in.pgm");
  const fs::path out_path =
      fs::temp_directory_path() / ("emr_dn_" + std::to_string(tag) + "_out.pgm");

  ImageU8 img = make_image(plane.width, plane.height, 1);
  for (int r = 0; r < plane.height; ++r)
    for (int c = 0; c < plane.width; ++c) img.at(r, c) = quantize_pixel(plane.at(r, c));
  save_image(in_path.string(), img);

  const std::string full = cmd + " " + in_path.string() + " " + out_path.string();
  const int rc = std::system(full.c_str());
  if (rc != 0) {
    fs::remove(in_path);
    throw std::runtime_error("denoise command failed: " + cmd);
  }
  ImageU8 filtered = load_image(out_path.string());
  fs::remove(in_path);
  fs::remove(out_path);
  if (filtered.channels != 1 || filtered.width != plane.width || filtered.height != plane.height)
    throw std::runtime_error("denoise command returned a mismatched image");

  PlaneImage out = make_plane(plane.width, plane.height, plane.role);
  for (int r = 0; r < plane.height; ++r)
    for (int c = 0; c < plane.width; ++c) out.at(r, c) = filtered.at(r, c);
  return out;
}

DenoiseFn make_denoise(const std::string& spec) {
  if (spec == "none") return {};
  if (spec == "gaussian") return denoise_gaussian;
  const std::string prefix = "external:";
  if (spec.rfind(prefix, 0) == 0 && spec.size() > prefix.size()) {
    const std::string cmd = spec.substr(prefix.size());
    return [cmd](const PlaneImage& p, double) { return external_denoise(cmd, p); };
  }
  throw std::invalid_argument("bad --denoise, expected none|gaussian|external:<cmd>");
}

void emit_csv(const std::string& csv, const std::string& path) {
  if (path.empty()) {
    std::fputs(csv.c_str(), stdout);
    return;
  }
  write_binary_file(path, std::vector<uint8_t>(csv.begin(), csv.end()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel mixture regression image codec"};
  app.require_subcommand(1);

  std::string input, output, csv_path;
  std::string lambda_list_spec, denoise_spec = "none";
  std::vector<std::string> limit_specs;
  double lambda = 800.0, denoise_param = 0.8;
  uint64_t seed = 1;
  int threads = 0;
  bool no_deblock = false;

  CLI::App* enc = app.add_subcommand("encode", "encode an image to a coded stream");
  enc->add_option("input", input, "input image (PNG/PPM/PGM)")->required();
  enc->add_option("-o,--output", output, "output stream path")->required();
  enc->add_option("--lambda", lambda, "rate-distortion multiplier");
  enc->add_option("--seed", seed, "RNG seed");
  enc->add_option("--limits", limit_specs, "model-count limits, y=16,10,4 and/or uv=8,4,4");
  enc->add_option("--threads", threads, "worker threads, 0 = all");

  CLI::App* dec = app.add_subcommand("decode", "decode a coded stream to an image");
  dec->add_option("input", input, "input stream path")->required();
  dec->add_option("-o,--output", output, "output image (.png/.ppm/.pgm)")->required();
  dec->add_option("--threads", threads, "worker threads, 0 = all");
  dec->add_flag("--no-deblock", no_deblock, "skip the deblocking filter");
  dec->add_option("--denoise", denoise_spec, "none|gaussian|external:<cmd>");
  dec->add_option("--denoise-param", denoise_param, "sigma for the gaussian denoiser");

  CLI::App* ana = app.add_subcommand("analyze", "rate-distortion sweep over a lambda schedule");
  ana->add_option("input", input, "input image (PNG/PPM/PGM)")->required();
  ana->add_option("--lambda-list", lambda_list_spec, "comma-separated lambdas, high to low");
  ana->add_option("--seed", seed, "RNG seed");
  ana->add_option("--limits", limit_specs, "model-count limits, y=16,10,4 and/or uv=8,4,4");
  ana->add_option("--threads", threads, "worker threads, 0 = all");
  ana->add_option("--csv", csv_path, "CSV output path, default stdout");

  CLI::App* mdl = app.add_subcommand("model", "per-blocksize kernel-kind model comparison");
  mdl->add_option("input", input, "input image (PNG/PPM/PGM)")->required();
  mdl->add_option("--seed", seed, "RNG seed");
  mdl->add_option("--threads", threads, "worker threads, 0 = all");
  mdl->add_option("--csv", csv_path, "CSV output path, default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (enc->parsed()) {
      EncodeConfig cfg;
      cfg.lambda = lambda;
      cfg.seed = seed;
      cfg.threads = threads;
      apply_limits(limit_specs, &cfg);
      const EncodeResult res = encode_image(load_image(input), cfg);
      write_binary_file(output, res.bytes);
      std::printf("bytes=%zu bpp=%.6f psnr_db=%.4f ssim=%.6f\n", res.bytes.size(),
                  res.report.bpp, res.report.psnr_db, res.report.ssim);
    } else if (dec->parsed()) {
      DecodeConfig cfg;
      cfg.threads = threads;
      cfg.deblock = !no_deblock;
      cfg.denoise = make_denoise(denoise_spec);
      cfg.denoise_param = denoise_param;
      save_image(output, decode_image(read_binary_file(input), cfg));
    } else if (ana->parsed()) {
      EncodeConfig cfg;
      cfg.seed = seed;
      cfg.threads = threads;
      apply_limits(limit_specs, &cfg);
      std::vector<double> lambdas(std::begin(kDefaultLambdaSweep), std::end(kDefaultLambdaSweep));
      if (!lambda_list_spec.empty()) lambdas = parse_lambda_list(lambda_list_spec);
      emit_csv(analyze_csv(run_analyze(load_image(input), lambdas, cfg)), csv_path);
    } else if (mdl->parsed()) {
      emit_csv(model_csv(run_model(load_image(input), default_model_ks(), seed, threads)),
               csv_path);
    }
  } catch (const CorruptStream& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
