// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "diffpir/error.hpp"

namespace diffpir::io {
namespace {

std::string describe(const std::filesystem::path& p) { return p.string(); }

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + describe(path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot create " + describe(path));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + describe(path));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  void expect_magic(const char (&magic)[5]) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
      throw Error(ErrorCode::kUnsupportedFormat, "bad magic in " + describe(path_));
    }
    pos_ += 4;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  void expect_end() const {
    if (pos_ != bytes_.size()) {
      throw Error(ErrorCode::kUnsupportedFormat, "trailing bytes in " + describe(path_));
    }
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kUnsupportedFormat, "truncated file " + describe(path_));
    }
  }

  const std::vector<unsigned char>& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

struct RawPng {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<unsigned char> pixels;
};

RawPng read_png_bytes(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kIoError, "no such file " + describe(path));
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat, describe(path) + ": " + msg);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat, describe(path) + ": 16-bit PNG");
  }
  if ((image.format & PNG_FORMAT_FLAG_COLORMAP) && (image.format & PNG_FORMAT_FLAG_ALPHA)) {
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat, describe(path) + ": palette with alpha");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  RawPng out;
  out.channels = color ? 3 : 1;
  out.height = static_cast<int>(image.height);
  out.width = static_cast<int>(image.width);
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat, describe(path) + ": " + msg);
  }
  return out;
}

void write_png_bytes(const std::filesystem::path& path, int channels, int height, int width,
                     const std::vector<unsigned char>& interleaved) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, interleaved.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIoError, describe(path) + ": " + msg);
  }
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Image load_png(const std::filesystem::path& path) {
  const RawPng raw = read_png_bytes(path);
  Image out(Shape{raw.channels, raw.height, raw.width});
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      for (int c = 0; c < raw.channels; ++c) {
        const std::size_t src = (static_cast<std::size_t>(y) * raw.width + x) * raw.channels + c;
        out.at(c, y, x) = raw.pixels[src] / 255.0;
      }
    }
  }
  return out;
}

void save_png(const Image& x, const std::filesystem::path& path) {
  if (x.channels() != 1 && x.channels() != 3) {
    throw Error(ErrorCode::kUnsupportedFormat, "PNG output needs 1 or 3 channels");
  }
  std::vector<unsigned char> bytes(x.size());
  for (int y = 0; y < x.height(); ++y) {
    for (int xx = 0; xx < x.width(); ++xx) {
      for (int c = 0; c < x.channels(); ++c) {
        bytes[(static_cast<std::size_t>(y) * x.width() + xx) * x.channels() + c] =
            to_byte(x.at(c, y, xx));
      }
    }
  }
  write_png_bytes(path, x.channels(), x.height(), x.width(), bytes);
}

Kernel2D load_kernel_k2d(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes, path);
  r.expect_magic("K2D1");
  const std::uint32_t h = r.u32();
  const std::uint32_t w = r.u32();
  if (h == 0 || w == 0 || h > 4096 || w > 4096) {
    throw Error(ErrorCode::kUnsupportedFormat, "implausible kernel size in " + describe(path));
  }
  std::vector<double> weights(static_cast<std::size_t>(h) * w);
  for (double& v : weights) v = r.f64();
  r.expect_end();
  return Kernel2D(static_cast<int>(h), static_cast<int>(w), std::move(weights));
}

void save_kernel_k2d(const Kernel2D& k, const std::filesystem::path& path) {
  std::vector<unsigned char> out{'K', '2', 'D', '1'};
  put_u32(out, static_cast<std::uint32_t>(k.height()));
  put_u32(out, static_cast<std::uint32_t>(k.width()));
  for (double v : k.weights()) put_f64(out, v);
  write_file(path, out);
}

Kernel2D load_kernel_png(const std::filesystem::path& path) {
  const RawPng raw = read_png_bytes(path);
  std::vector<double> w(static_cast<std::size_t>(raw.height) * raw.width, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    double acc = 0.0;
    for (int c = 0; c < raw.channels; ++c) acc += raw.pixels[i * raw.channels + c];
    w[i] = acc / (255.0 * raw.channels);
  }
  return Kernel2D(raw.height, raw.width, std::move(w)).normalized();
}

void save_kernel_png(const Kernel2D& k, const std::filesystem::path& path) {
  double peak = 0.0;
  for (double v : k.weights()) peak = std::max(peak, v);
  Image img(Shape{1, k.height(), k.width()});
  for (int y = 0; y < k.height(); ++y) {
    for (int x = 0; x < k.width(); ++x) img.at(0, y, x) = peak > 0 ? k.at(y, x) / peak : 0.0;
  }
  save_png(img, path);
}

Kernel2D load_kernel(const std::filesystem::path& path) {
  if (path.extension() == ".png") return load_kernel_png(path);
  return load_kernel_k2d(path);
}

Mask load_mask_png(const std::filesystem::path& path) {
  const RawPng raw = read_png_bytes(path);
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(raw.height) * raw.width);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    keep[i] = raw.pixels[i * raw.channels] >= 128 ? 1 : 0;
  }
  return Mask(raw.height, raw.width, std::move(keep));
}

void save_mask_png(const Mask& m, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) bytes[i] = m.flags()[i] ? 255 : 0;
  write_png_bytes(path, 1, m.height(), m.width(), bytes);
}

Image load_raw(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes, path);
  r.expect_magic("I3D1");
  const std::uint32_t c = r.u32();
  const std::uint32_t h = r.u32();
  const std::uint32_t w = r.u32();
  const std::size_t expected = 16 + 8ull * c * h * w;
  if (c == 0 || h == 0 || w == 0 || bytes.size() != expected) {
    throw Error(ErrorCode::kUnsupportedFormat, "inconsistent raw image header in " + describe(path));
  }
  std::vector<double> data(static_cast<std::size_t>(c) * h * w);
  for (double& v : data) v = r.f64();
  r.expect_end();
  return Image(Shape{static_cast<int>(c), static_cast<int>(h), static_cast<int>(w)}, std::move(data));
}

void save_raw(const Image& x, const std::filesystem::path& path) {
  std::vector<unsigned char> out{'I', '3', 'D', '1'};
  put_u32(out, static_cast<std::uint32_t>(x.channels()));
  put_u32(out, static_cast<std::uint32_t>(x.height()));
  put_u32(out, static_cast<std::uint32_t>(x.width()));
  for (double v : x.data()) put_f64(out, v);
  write_file(path, out);
}

Image load_image(const std::filesystem::path& path) {
  if (path.extension() == ".f64") return load_raw(path);
  return load_png(path);
}

}  // namespace diffpir::io
