// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "diffpir/error.hpp"

namespace diffpir {

double mse(const Image& a, const Image& b) {
  require_same_shape(a.shape(), b.shape(), "mse");
  if (a.size() == 0) throw Error(ErrorCode::kShapeMismatch, "mse of empty images");
  return squared_distance(a, b) / static_cast<double>(a.size());
}

double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m == 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(1.0 / m);
}

Image quantize8(const Image& x) {
  Image out(x);
  for (double& v : out.data()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  return out;
}

}  // namespace diffpir
