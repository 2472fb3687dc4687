// SPDX-License-Identifier: Apache-2.0
#include "emr/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace emr {

std::vector<uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failed: " + path);
  return bytes;
}

void write_binary_file(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

struct PngByteSource {
  const uint8_t* data;
  size_t size;
  size_t pos;
};

void png_read_fn(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngByteSource*>(png_get_io_ptr(png));
  if (src->pos + n > src->size) png_error(png, "truncated PNG");
  std::memcpy(out, src->data + src->pos, n);
  src->pos += n;
}

void png_write_fn(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_fn(png_structp) {}

ImageU8 decode_png(const std::vector<uint8_t>& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("libpng init failed");
  }
  ImageU8 img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("invalid PNG");
  }
  PngByteSource src{bytes.data(), bytes.size(), 0};
  png_set_read_fn(png, &src, png_read_fn);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unsupported PNG channel layout");
  }
  img = make_image(static_cast<int>(w), static_cast<int>(h), channels);
  rows.resize(h);
  for (png_uint_32 r = 0; r < h; ++r)
    rows[r] = img.data.data() + static_cast<size_t>(r) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

std::vector<uint8_t> encode_png(const ImageU8& img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng init failed");
  }
  std::vector<uint8_t> out;
  std::vector<png_const_bytep> rows(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG encode failed");
  }
  png_set_write_fn(png, &out, png_write_fn, png_flush_fn);
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < img.height; ++r)
    rows[r] = img.data.data() + static_cast<size_t>(r) * img.width * img.channels;
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

// PNM token scanner: skips whitespace and # comments.
struct PnmParser {
  const std::vector<uint8_t>& b;
  size_t pos = 0;

  int next_token() {
    for (;;) {
      while (pos < b.size() && std::isspace(b[pos])) ++pos;
      if (pos < b.size() && b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= b.size() || !std::isdigit(b[pos])) throw std::runtime_error("invalid PNM header");
    long v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
      v = v * 10 + (b[pos] - '0');
      if (v > 1 << 30) throw std::runtime_error("invalid PNM header");
      ++pos;
    }
    return static_cast<int>(v);
  }
};

}  // namespace

ImageU8 decode_pnm(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw std::runtime_error("not a binary PGM/PPM");
  const int channels = bytes[1] == '5' ? 1 : 3;
  PnmParser p{bytes, 2};
  const int w = p.next_token();
  const int h = p.next_token();
  const int maxval = p.next_token();
  if (w <= 0 || h <= 0) throw std::runtime_error("invalid PNM size");
  if (maxval <= 0 || maxval > 255) throw std::runtime_error("only 8-bit PNM is supported");
  if (p.pos >= bytes.size() || !std::isspace(bytes[p.pos]))
    throw std::runtime_error("invalid PNM header");
  ++p.pos;  // single whitespace separates header from raster
  const size_t need = static_cast<size_t>(w) * h * channels;
  if (bytes.size() - p.pos < need) throw std::runtime_error("truncated PNM");
  ImageU8 img = make_image(w, h, channels);
  std::memcpy(img.data.data(), bytes.data() + p.pos, need);
  return img;
}

std::vector<uint8_t> encode_pnm(const ImageU8& img) {
  char header[64];
  int n = std::snprintf(header, sizeof header, "P%c\n%d %d\n255\n", img.channels == 1 ? '5' : '6',
                        img.width, img.height);
  std::vector<uint8_t> out(header, header + n);
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

ImageU8 load_image(const std::string& path) {
  const std::vector<uint8_t> bytes = read_binary_file(path);
  static const uint8_t kPngMagic[4] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kPngMagic, 4) == 0) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
    return decode_pnm(bytes);
  throw std::runtime_error("unrecognized image format: " + path);
}

namespace {

std::string lower_ext(const std::string& path) {
  size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

}  // namespace

void save_image(const std::string& path, const ImageU8& img) {
  if (img.channels != 1 && img.channels != 3)
    throw std::runtime_error("unsupported channel count");
  const std::string ext = lower_ext(path);
  if (ext == "png") {
    write_binary_file(path, encode_png(img));
    return;
  }
  if (ext == "ppm") {
    if (img.channels == 3) {
      write_binary_file(path, encode_pnm(img));
    } else {
      ImageU8 rgb = make_image(img.width, img.height, 3);
      for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c)
          for (int ch = 0; ch < 3; ++ch) rgb.at(r, c, ch) = img.at(r, c);
      write_binary_file(path, encode_pnm(rgb));
    }
    return;
  }
  if (ext == "pgm") {
    if (img.channels != 1) throw std::runtime_error("PGM cannot hold RGB; use .ppm or .png");
    write_binary_file(path, encode_pnm(img));
    return;
  }
  throw std::runtime_error("unsupported output extension: " + path);
}

}  // namespace emr
