// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace diffpir {

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return plane() * channels; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Multi-channel 2-D image, row-major per channel, nominal range [0,1].
class Image {
 public:
  Image() = default;
  explicit Image(Shape shape, double fill = 0.0);
  Image(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  double at(int c, int y, int x) const { return data_[index(c, y, x)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> channel(int c);
  std::span<const double> channel(int c) const;

  const std::vector<double>& values() const { return data_; }

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x;
  }

  Shape shape_;
  std::vector<double> data_;
};

/// Small 2-D filter; the anchor is (height/2, width/2) in integer division.
class Kernel2D {
 public:
  Kernel2D() = default;
  Kernel2D(int height, int width, std::vector<double> weights);

  static Kernel2D delta();

  int height() const { return height_; }
  int width() const { return width_; }
  double at(int y, int x) const { return weights_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const double> weights() const { return weights_; }
  double sum() const;

  Kernel2D normalized() const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> weights_;
};

/// Per-channel complex spectrum with the spatial dimensions of its source.
struct ComplexField {
  Shape shape;
  std::vector<std::complex<double>> data;

  ComplexField() = default;
  explicit ComplexField(Shape s) : shape(s), data(s.size()) {}

  std::span<std::complex<double>> channel(int c) {
    return {data.data() + c * shape.plane(), shape.plane()};
  }
  std::span<const std::complex<double>> channel(int c) const {
    return {data.data() + c * shape.plane(), shape.plane()};
  }
};

void require_same_shape(const Shape& a, const Shape& b, const char* context);
bool all_finite(const Image& x);
Image clamped01(const Image& x);

// Elementwise helpers routed through the dispatched SIMD kernels.
Image axpby(double a, const Image& x, double b, const Image& y);
Image axpbypcz(double a, const Image& x, double b, const Image& y, double c, const Image& z);
Image scaled(const Image& x, double a);
double squared_norm(const Image& x);
double squared_distance(const Image& a, const Image& b);

}  // namespace diffpir
