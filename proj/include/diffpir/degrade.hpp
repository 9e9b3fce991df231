// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "diffpir/image.hpp"
#include "diffpir/mask.hpp"
#include "diffpir/rng.hpp"

namespace diffpir {

// ---------------------------------------------------------------------------
// Kernel and mask generators

/// Isotropic Gaussian sampled at integer offsets from the centre, sum 1.
Kernel2D gaussian_kernel(int size, double stddev);

/// Seeded camera-shake kernel: a random-walk trajectory whose heading jitter
/// scales with `intensity`, rasterized with bilinear weights and normalized.
/// intensity == 0 gives a horizontal line through the centre.
Kernel2D motion_kernel(int size, double intensity, Rng& rng);

/// Drops a box x box square; centred unless an offset (top, left) is given.
Mask make_box_mask(int height, int width, int box = 128,
                   std::optional<std::pair<int, int>> offset = std::nullopt);

/// Drops exactly round(drop_ratio * h * w) pixels chosen without replacement.
Mask make_random_mask(int height, int width, double drop_ratio, Rng& rng);

// ---------------------------------------------------------------------------
// Bicubic resampling (a = -0.5 cubic, antialiased when shrinking)

double cubic_weight(double x);

/// One-axis resampling operator stored as sparse rows.
class Resampler1D {
 public:
  /// scale = out_len / in_len. Shrinking widens the kernel by 1/scale.
  Resampler1D(int in_len, int out_len);

  int in_len() const { return in_len_; }
  int out_len() const { return out_len_; }
  const std::vector<std::pair<int, double>>& row(int o) const { return rows_[o]; }

 private:
  int in_len_;
  int out_len_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

enum class ResizeDirection { kDown, kUp };

Image bicubic_resize(const Image& x, int sf, ResizeDirection direction);

/// Transpose of bicubic_resize(·, sf, kDown), mapping low to high resolution.
Image bicubic_resize_down_adjoint(const Image& low, int sf, Shape high);

/// Separable (4*sf+1)-tap approximation of bicubic downsampling, aligned
/// with decimation at multiples of sf.
Kernel2D bicubic_sr_kernel(int sf);

// ---------------------------------------------------------------------------
// Degradation operators

struct IdentityOp {};
struct BlurOp {
  Kernel2D kernel;
};
struct InpaintOp {
  Mask mask;
};
/// Without a kernel, H is bicubic_resize(kDown). With a kernel, H is circular
/// blur followed by keeping every sf-th pixel starting at (0,0).
struct DownsampleOp {
  int sf = 1;
  std::optional<Kernel2D> kernel;
};

using Operator = std::variant<IdentityOp, BlurOp, InpaintOp, DownsampleOp>;

struct DegradationModel {
  Operator op = IdentityOp{};
  double sigma_n = 0.0;
};

/// Throws ShapeMismatch when the model cannot act on an image of this shape.
void check_input_shape(const DegradationModel& m, const Shape& x);
Shape measurement_shape(const DegradationModel& m, const Shape& x);
Shape restored_shape(const DegradationModel& m, const Shape& y);

/// H(x), no noise.
Image forward(const DegradationModel& m, const Image& x);
/// H^T(r).
Image adjoint(const DegradationModel& m, const Image& r);

/// y = H(x) + n, n ~ N(0, sigma_n^2 I); not clamped.
Image apply(const DegradationModel& m, const Image& x, Rng& rng);

// Stride-sf decimation and zero insertion used by the kernel-based SR model.
Image decimate(const Image& x, int sf);
Image zero_insert(const Image& y, int sf);

}  // namespace diffpir
