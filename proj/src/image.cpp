// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diffpir/error.hpp"
#include "diffpir/simd/kernels.hpp"

namespace diffpir {

std::string to_string(const Shape& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" +
         std::to_string(s.width);
}

namespace {

const Shape& checked(const Shape& shape) {
  if (shape.channels < 0 || shape.height < 0 || shape.width < 0) {
    throw Error(ErrorCode::kInvalidRange, "negative image dimension " + to_string(shape));
  }
  return shape;
}

}  // namespace

Image::Image(Shape shape, double fill) : shape_(checked(shape)), data_(shape.size(), fill) {}

Image::Image(Shape shape, std::vector<double> data) : shape_(checked(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "data length " + std::to_string(data_.size()) + " does not match " +
                    to_string(shape_));
  }
}

std::span<double> Image::channel(int c) {
  return {data_.data() + c * shape_.plane(), shape_.plane()};
}

std::span<const double> Image::channel(int c) const {
  return {data_.data() + c * shape_.plane(), shape_.plane()};
}

Kernel2D::Kernel2D(int height, int width, std::vector<double> weights)
    : height_(height), width_(width), weights_(std::move(weights)) {
  if (height < 1 || width < 1 ||
      weights_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorCode::kShapeMismatch, "kernel dimensions do not match weight count");
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw Error(ErrorCode::kInvalidRange, "non-finite kernel weight");
  }
}

Kernel2D Kernel2D::delta() { return Kernel2D(1, 1, {1.0}); }

double Kernel2D::sum() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

Kernel2D Kernel2D::normalized() const {
  const double s = sum();
  if (!(std::abs(s) > 0.0)) throw Error(ErrorCode::kInvalidRange, "kernel sums to zero");
  std::vector<double> w(weights_);
  for (double& v : w) v /= s;
  return Kernel2D(height_, width_, std::move(w));
}

void require_same_shape(const Shape& a, const Shape& b, const char* context) {
  if (!(a == b)) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(context) + ": " + to_string(a) + " vs " + to_string(b));
  }
}

bool all_finite(const Image& x) {
  return std::all_of(x.data().begin(), x.data().end(), [](double v) { return std::isfinite(v); });
}

Image clamped01(const Image& x) {
  Image out(x);
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

Image axpby(double a, const Image& x, double b, const Image& y) {
  require_same_shape(x.shape(), y.shape(), "axpby");
  Image out(x.shape());
  simd::active().axpby(a, x.data().data(), b, y.data().data(), out.data().data(), x.size());
  return out;
}

Image axpbypcz(double a, const Image& x, double b, const Image& y, double c, const Image& z) {
  require_same_shape(x.shape(), y.shape(), "axpbypcz");
  require_same_shape(x.shape(), z.shape(), "axpbypcz");
  Image out(x.shape());
  simd::active().axpbypcz(a, x.data().data(), b, y.data().data(), c, z.data().data(),
                          out.data().data(), x.size());
  return out;
}

Image scaled(const Image& x, double a) {
  Image out(x);
  for (double& v : out.data()) v *= a;
  return out;
}

double squared_norm(const Image& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v * v;
  return acc;
}

double squared_distance(const Image& a, const Image& b) {
  require_same_shape(a.shape(), b.shape(), "squared_distance");
  return simd::active().squared_distance(a.data().data(), b.data().data(), a.size());
}

}  // namespace diffpir
