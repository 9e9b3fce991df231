// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>

#include "diffpir/image.hpp"

namespace diffpir {

/// Returned by psnr() for identical images.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

double mse(const Image& a, const Image& b);

/// 10*log10(1/MSE) on peak 1.0; kInfinitePsnr when MSE is zero.
double psnr(const Image& a, const Image& b);

/// Rounds to the 8-bit grid (clamp, then nearest of 256 levels) as save_png does.
Image quantize8(const Image& x);

}  // namespace diffpir
