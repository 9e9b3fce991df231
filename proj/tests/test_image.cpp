// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "checks.hpp"
#include "diffpir/image.hpp"
#include "diffpir/io.hpp"
#include "diffpir/metrics.hpp"
#include "oracles.hpp"

using namespace diffpir;
using namespace diffpir::io;
using diffpir::testing::TempDir;

namespace {

void write_gray8(const std::filesystem::path& p, int w, int h, const std::vector<png_byte>& px,
                 int bit_depth = 8) {
  FILE* f = std::fopen(p.c_str(), "wb");
  REQUIRE(f);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, w, h, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int row_bytes = w * bit_depth / 8;
  for (int y = 0; y < h; ++y) {
    png_write_row(png, const_cast<png_byte*>(px.data()) + static_cast<std::size_t>(y) * row_bytes);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

}  // namespace

TEST_CASE("image indexing is channel-major row-major") {
  Image x(Shape{2, 3, 4});
  x.at(1, 2, 3) = 5.0;
  CHECK(x[x.size() - 1] == 5.0);
  CHECK(&x.at(1, 0, 0) - &x[0] == 12);
  CHECK(x.channel(1).size() == 12);
}

TEST_CASE("image constructor validates its inputs") {
  CHECK_ERROR_CODE(Image(Shape{1, -1, 2}), ErrorCode::kInvalidRange);
  CHECK_ERROR_CODE(Image(Shape{1, 2, 2}, std::vector<double>(3)), ErrorCode::kShapeMismatch);
  CHECK_ERROR_CODE(Kernel2D(2, 2, {1.0, 1.0}), ErrorCode::kShapeMismatch);
  CHECK_ERROR_CODE(Kernel2D(1, 2, {1.0, -1.0}).normalized(), ErrorCode::kInvalidRange);
}

TEST_CASE("linear combinations") {
  Rng rng(3);
  const Shape s{3, 5, 7};
  const Image a = oracle::random_image(s, rng), b = oracle::random_image(s, rng),
              c = oracle::random_image(s, rng);
  const Image r = axpbypcz(0.5, a, -2.0, b, 3.0, c);
  const Image q = axpby(0.5, a, -2.0, b);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(q[i] == 0.5 * a[i] + -2.0 * b[i]);
    CHECK(r[i] == 0.5 * a[i] + -2.0 * b[i] + 3.0 * c[i]);
  }
  CHECK_ERROR_CODE(axpby(1.0, a, 1.0, Image(Shape{1, 5, 7})), ErrorCode::kShapeMismatch);
}

TEST_CASE("error codes have names") {
  CHECK(to_string(ErrorCode::kProtocolViolation) == "ProtocolViolation");
  const Error e(ErrorCode::kIoError, "x");
  CHECK(e.code() == ErrorCode::kIoError);
}

TEST_CASE("psnr") {
  Rng rng(11);
  const Image a = oracle::random_image({1, 16, 16}, rng);
  const Image b = oracle::random_image({1, 16, 16}, rng);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, a) == kInfinitePsnr);

  Image z(Shape{1, 1, 4}, 0.0), t(Shape{1, 1, 4}, 0.1);
  CHECK(psnr(z, t) == doctest::Approx(20.0).epsilon(1e-12));

  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  const double expected = 10.0 * std::log10(1.0 / (acc / a.size()));
  CHECK(std::abs(psnr(a, b) - expected) < 1e-9);
  CHECK_ERROR_CODE(psnr(a, Image(Shape{1, 16, 15})), ErrorCode::kShapeMismatch);
}

TEST_CASE("quantize8 rounds to byte levels") {
  Image x(Shape{1, 1, 4}, std::vector<double>{-0.2, 0.5, 0.999, 1.7});
  const Image q = quantize8(x);
  CHECK(q[0] == 0.0);
  CHECK(q[1] == 128.0 / 255.0);
  CHECK(q[2] == 1.0);
  CHECK(q[3] == 1.0);
}

TEST_CASE("png byte endpoints map to 0 and 1") {
  TempDir dir;
  write_gray8(dir / "g.png", 2, 1, {0, 255});
  const Image x = load_png(dir / "g.png");
  CHECK(x.shape() == Shape{1, 1, 2});
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 1.0);
}

TEST_CASE("png round trip is exact on byte levels") {
  TempDir dir;
  Rng rng(5);
  for (int c : {1, 3}) {
    Image x(Shape{c, 9, 11});
    for (double& v : x.data()) v = std::floor(rng.uniform() * 256.0) / 255.0;
    save_png(x, dir / "x.png");
    const Image y = load_png(dir / "x.png");
    REQUIRE(y.shape() == x.shape());
    CHECK(oracle::max_abs_diff(x, y) == 0.0);
  }
  CHECK_ERROR_CODE(save_png(Image(Shape{2, 2, 2}), dir / "bad.png"), ErrorCode::kUnsupportedFormat);
}

TEST_CASE("png loader rejects bad inputs") {
  TempDir dir;
  CHECK_ERROR_CODE(load_png(dir / "missing.png"), ErrorCode::kIoError);
  std::ofstream(dir / "junk.png") << "not a png";
  CHECK_ERROR_CODE(load_png(dir / "junk.png"), ErrorCode::kUnsupportedFormat);
  write_gray8(dir / "deep.png", 1, 1, {0x12, 0x34}, 16);
  CHECK_ERROR_CODE(load_png(dir / "deep.png"), ErrorCode::kUnsupportedFormat);
}

TEST_CASE("K2D1 kernel round trip and corruption") {
  TempDir dir;
  const Kernel2D k(3, 2, {0.1, 0.2, 0.3, 0.15, 0.05, 0.2});
  save_kernel_k2d(k, dir / "k.k2d");
  const Kernel2D r = load_kernel(dir / "k.k2d");
  REQUIRE(r.height() == 3);
  REQUIRE(r.width() == 2);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) CHECK(r.at(i, j) == k.at(i, j));
  }

  std::ifstream in(dir / "k.k2d", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  std::ofstream(dir / "short.k2d", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_ERROR_CODE(load_kernel(dir / "short.k2d"), ErrorCode::kUnsupportedFormat);
  std::ofstream(dir / "long.k2d", std::ios::binary) << bytes << "xx";
  CHECK_ERROR_CODE(load_kernel(dir / "long.k2d"), ErrorCode::kUnsupportedFormat);
  bytes[0] = 'Q';
  std::ofstream(dir / "magic.k2d", std::ios::binary) << bytes;
  CHECK_ERROR_CODE(load_kernel(dir / "magic.k2d"), ErrorCode::kUnsupportedFormat);
}

TEST_CASE("PNG kernel is renormalized") {
  TempDir dir;
  const Kernel2D k(1, 3, {0.25, 0.5, 0.25});
  save_kernel_png(k, dir / "k.png");
  const Kernel2D r = load_kernel(dir / "k.png");
  CHECK(r.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.at(0, 1) == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("mask png round trip") {
  TempDir dir;
  Mask m(2, 3, {1, 0, 1, 0, 0, 1});
  save_mask_png(m, dir / "m.png");
  const Mask r = load_mask_png(dir / "m.png");
  CHECK(r.flags() == m.flags());
  CHECK(r.dropped_count() == 3);
}

TEST_CASE("raw f64 sidecar is lossless") {
  TempDir dir;
  Rng rng(8);
  const Image x = oracle::random_image({3, 4, 5}, rng, -2.0, 2.0);
  save_raw(x, dir / "x.f64");
  const Image y = load_image(dir / "x.f64");
  CHECK(y.shape() == x.shape());
  CHECK(y.values() == x.values());
  std::ofstream(dir / "bad.f64", std::ios::binary) << "I3D1xxxx";
  CHECK_ERROR_CODE(load_raw(dir / "bad.f64"), ErrorCode::kUnsupportedFormat);
}
