// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "diffpir/error.hpp"
#include "diffpir/fft.hpp"

namespace diffpir {

// ---------------------------------------------------------------------------
// Mask

Mask::Mask(int height, int width, std::vector<std::uint8_t> keep)
    : height_(height), width_(width), keep_(std::move(keep)) {
  if (height < 1 || width < 1 ||
      keep_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorCode::kShapeMismatch, "mask dimensions do not match flag count");
  }
  for (auto& k : keep_) k = k ? 1 : 0;
  if (kept_count() == 0) throw Error(ErrorCode::kInvalidRange, "mask keeps no pixel");
}

Mask Mask::all_keep(int height, int width) {
  return Mask(height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width, 1));
}

std::size_t Mask::kept_count() const {
  return static_cast<std::size_t>(std::count(keep_.begin(), keep_.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------------------
// Kernels

Kernel2D gaussian_kernel(int size, double stddev) {
  if (size < 1 || size % 2 == 0 || !(stddev > 0.0)) {
    throw Error(ErrorCode::kInvalidRange, "gaussian kernel needs odd size >= 1 and std > 0");
  }
  const int c = size / 2;
  std::vector<double> w(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double r2 = static_cast<double>((y - c) * (y - c) + (x - c) * (x - c));
      w[static_cast<std::size_t>(y) * size + x] = std::exp(-r2 / (2.0 * stddev * stddev));
    }
  }
  return Kernel2D(size, size, std::move(w)).normalized();
}

Kernel2D motion_kernel(int size, double intensity, Rng& rng) {
  if (size < 1 || size % 2 == 0 || !(intensity >= 0.0 && intensity <= 1.0)) {
    throw Error(ErrorCode::kInvalidRange, "motion kernel needs odd size and intensity in [0,1]");
  }
  if (size == 1) return Kernel2D::delta();

  constexpr double kStep = 0.5;       // pixels per trajectory sample
  constexpr double kMaxTurn = 0.35;   // heading jitter (rad) per sample at intensity 1
  const int samples = 2 * (size - 1);

  double heading = intensity * (rng.uniform() * 2.0 - 1.0) * std::numbers::pi;
  std::vector<double> px{0.0}, py{0.0};
  px.reserve(samples + 1);
  py.reserve(samples + 1);
  for (int i = 0; i < samples; ++i) {
    heading += intensity * kMaxTurn * rng.normal();
    px.push_back(px.back() + kStep * std::cos(heading));
    py.push_back(py.back() + kStep * std::sin(heading));
  }

  const auto [xmin, xmax] = std::minmax_element(px.begin(), px.end());
  const auto [ymin, ymax] = std::minmax_element(py.begin(), py.end());
  const double mx = (*xmin + *xmax) / 2.0;
  const double my = (*ymin + *ymax) / 2.0;
  const double half = std::max(*xmax - *xmin, *ymax - *ymin) / 2.0;
  const double centre = (size - 1) / 2.0;
  const double scale = half > centre ? centre / half : 1.0;

  std::vector<double> w(static_cast<std::size_t>(size) * size, 0.0);
  auto splat = [&](int x, int y, double v) {
    if (v > 0.0 && x >= 0 && x < size && y >= 0 && y < size) {
      w[static_cast<std::size_t>(y) * size + x] += v;
    }
  };
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double qx = std::clamp(centre + (px[i] - mx) * scale, 0.0, size - 1.0);
    const double qy = std::clamp(centre + (py[i] - my) * scale, 0.0, size - 1.0);
    const int fx = static_cast<int>(std::floor(qx));
    const int fy = static_cast<int>(std::floor(qy));
    const double ax = qx - fx;
    const double ay = qy - fy;
    splat(fx, fy, (1.0 - ax) * (1.0 - ay));
    splat(fx + 1, fy, ax * (1.0 - ay));
    splat(fx, fy + 1, (1.0 - ax) * ay);
    splat(fx + 1, fy + 1, ax * ay);
  }
  return Kernel2D(size, size, std::move(w)).normalized();
}

Mask make_box_mask(int height, int width, int box, std::optional<std::pair<int, int>> offset) {
  if (box < 1 || box > height || box > width) {
    throw Error(ErrorCode::kInvalidRange, "box does not fit the image");
  }
  const int top = offset ? offset->first : (height - box) / 2;
  const int left = offset ? offset->second : (width - box) / 2;
  if (top < 0 || left < 0 || top + box > height || left + box > width) {
    throw Error(ErrorCode::kInvalidRange, "box offset places the box outside the image");
  }
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(height) * width, 1);
  for (int y = top; y < top + box; ++y) {
    std::fill_n(keep.begin() + static_cast<std::ptrdiff_t>(y) * width + left, box, 0);
  }
  return Mask(height, width, std::move(keep));
}

Mask make_random_mask(int height, int width, double drop_ratio, Rng& rng) {
  if (!(drop_ratio >= 0.0 && drop_ratio < 1.0) || height < 1 || width < 1) {
    throw Error(ErrorCode::kInvalidRange, "drop ratio must lie in [0,1)");
  }
  const std::size_t n = static_cast<std::size_t>(height) * width;
  const auto drop = static_cast<std::size_t>(std::llround(drop_ratio * static_cast<double>(n)));
  if (drop >= n) throw Error(ErrorCode::kInvalidRange, "drop ratio leaves no kept pixel");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::vector<std::uint8_t> keep(n, 1);
  for (std::size_t i = 0; i < drop; ++i) keep[order[i]] = 0;
  return Mask(height, width, std::move(keep));
}

// ---------------------------------------------------------------------------
// Bicubic

double cubic_weight(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
  return 0.0;
}

Resampler1D::Resampler1D(int in_len, int out_len) : in_len_(in_len), out_len_(out_len) {
  if (in_len < 1 || out_len < 1) throw Error(ErrorCode::kShapeMismatch, "empty resample axis");
  const double scale = static_cast<double>(out_len) / in_len;
  const double stretch = scale < 1.0 ? scale : 1.0;  // antialias when shrinking
  const double support = 2.0 / stretch;
  rows_.resize(static_cast<std::size_t>(out_len));
  for (int o = 0; o < out_len; ++o) {
    const double u = (o + 0.5) / scale - 0.5;
    const int lo = static_cast<int>(std::floor(u - support));
    const int hi = static_cast<int>(std::ceil(u + support));
    std::vector<double> acc(static_cast<std::size_t>(in_len), 0.0);
    double total = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double wgt = stretch * cubic_weight(stretch * (u - j));
      if (wgt == 0.0) continue;
      // Half-sample symmetric reflection at the borders.
      const int period = 2 * in_len;
      int m = ((j % period) + period) % period;
      if (m >= in_len) m = period - 1 - m;
      acc[m] += wgt;
      total += wgt;
    }
    auto& row = rows_[o];
    for (int j = 0; j < in_len; ++j) {
      if (acc[j] != 0.0) row.emplace_back(j, acc[j] / total);
    }
  }
}

namespace {

// Applies `rows` along y then `cols` along x, or the transposes.
Image separable_apply(const Image& x, const Resampler1D& rows, const Resampler1D& cols,
                      bool transpose) {
  const int in_h = transpose ? rows.out_len() : rows.in_len();
  const int in_w = transpose ? cols.out_len() : cols.in_len();
  if (x.height() != in_h || x.width() != in_w) {
    throw Error(ErrorCode::kShapeMismatch, "resampler does not match image size");
  }
  const int out_h = transpose ? rows.in_len() : rows.out_len();
  const int out_w = transpose ? cols.in_len() : cols.out_len();
  Image tmp(Shape{x.channels(), in_h, out_w});
  Image out(Shape{x.channels(), out_h, out_w});
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < in_h; ++y) {
      if (!transpose) {
        for (int o = 0; o < out_w; ++o) {
          double acc = 0.0;
          for (const auto& [j, wgt] : cols.row(o)) acc += wgt * x.at(c, y, j);
          tmp.at(c, y, o) = acc;
        }
      } else {
        for (int o = 0; o < in_w; ++o) {
          const double v = x.at(c, y, o);
          for (const auto& [j, wgt] : cols.row(o)) tmp.at(c, y, j) += wgt * v;
        }
      }
    }
    if (!transpose) {
      for (int o = 0; o < out_h; ++o) {
        for (const auto& [j, wgt] : rows.row(o)) {
          for (int xx = 0; xx < out_w; ++xx) out.at(c, o, xx) += wgt * tmp.at(c, j, xx);
        }
      }
    } else {
      for (int o = 0; o < in_h; ++o) {
        for (const auto& [j, wgt] : rows.row(o)) {
          for (int xx = 0; xx < out_w; ++xx) out.at(c, j, xx) += wgt * tmp.at(c, o, xx);
        }
      }
    }
  }
  return out;
}

}  // namespace

Image bicubic_resize(const Image& x, int sf, ResizeDirection direction) {
  if (sf < 1) throw Error(ErrorCode::kInvalidRange, "scale factor must be >= 1");
  if (sf == 1) return x;
  if (direction == ResizeDirection::kDown) {
    if (x.height() % sf != 0 || x.width() % sf != 0) {
      throw Error(ErrorCode::kShapeMismatch, "image size not divisible by scale factor");
    }
    return separable_apply(x, Resampler1D(x.height(), x.height() / sf),
                           Resampler1D(x.width(), x.width() / sf), false);
  }
  return separable_apply(x, Resampler1D(x.height(), x.height() * sf),
                         Resampler1D(x.width(), x.width() * sf), false);
}

Image bicubic_resize_down_adjoint(const Image& low, int sf, Shape high) {
  if (sf == 1) return low;
  if (high.height != low.height() * sf || high.width != low.width() * sf ||
      high.channels != low.channels()) {
    throw Error(ErrorCode::kShapeMismatch, "adjoint target shape mismatch");
  }
  return separable_apply(low, Resampler1D(high.height, low.height()),
                         Resampler1D(high.width, low.width()), true);
}

Kernel2D bicubic_sr_kernel(int sf) {
  if (sf < 1) throw Error(ErrorCode::kInvalidRange, "scale factor must be >= 1");
  if (sf == 1) return Kernel2D::delta();
  const int taps = 4 * sf + 1;
  const int centre = taps / 2;
  // Bicubic downsampling centres output o on input o*sf + (sf-1)/2.
  const double shift = (sf - 1) / 2.0;
  std::vector<double> w1(static_cast<std::size_t>(taps));
  for (int m = 0; m < taps; ++m) w1[m] = cubic_weight((m - centre + shift) / sf);
  std::vector<double> w(static_cast<std::size_t>(taps) * taps);
  for (int y = 0; y < taps; ++y) {
    for (int x = 0; x < taps; ++x) w[static_cast<std::size_t>(y) * taps + x] = w1[y] * w1[x];
  }
  return Kernel2D(taps, taps, std::move(w)).normalized();
}

// ---------------------------------------------------------------------------
// Operators

Image decimate(const Image& x, int sf) {
  if (x.height() % sf != 0 || x.width() % sf != 0) {
    throw Error(ErrorCode::kShapeMismatch, "image size not divisible by scale factor");
  }
  Image out(Shape{x.channels(), x.height() / sf, x.width() / sf});
  for (int c = 0; c < out.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int xx = 0; xx < out.width(); ++xx) out.at(c, y, xx) = x.at(c, y * sf, xx * sf);
    }
  }
  return out;
}

Image zero_insert(const Image& y, int sf) {
  Image out(Shape{y.channels(), y.height() * sf, y.width() * sf});
  for (int c = 0; c < y.channels(); ++c) {
    for (int r = 0; r < y.height(); ++r) {
      for (int xx = 0; xx < y.width(); ++xx) out.at(c, r * sf, xx * sf) = y.at(c, r, xx);
    }
  }
  return out;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void check_input_shape(const DegradationModel& m, const Shape& x) {
  std::visit(Overloaded{
                 [](const IdentityOp&) {},
                 [&](const BlurOp& op) {
                   if (op.kernel.height() > x.height || op.kernel.width() > x.width) {
                     throw Error(ErrorCode::kKernelTooLarge, "blur kernel exceeds image");
                   }
                 },
                 [&](const InpaintOp& op) {
                   if (op.mask.height() != x.height || op.mask.width() != x.width) {
                     throw Error(ErrorCode::kShapeMismatch, "mask does not match image");
                   }
                 },
                 [&](const DownsampleOp& op) {
                   if (op.sf < 1 || x.height % op.sf != 0 || x.width % op.sf != 0) {
                     throw Error(ErrorCode::kShapeMismatch,
                                 "image size not divisible by scale factor");
                   }
                 },
             },
             m.op);
  if (!(m.sigma_n >= 0.0)) throw Error(ErrorCode::kInvalidRange, "sigma_n must be >= 0");
}

Shape measurement_shape(const DegradationModel& m, const Shape& x) {
  check_input_shape(m, x);
  if (const auto* ds = std::get_if<DownsampleOp>(&m.op)) {
    return Shape{x.channels, x.height / ds->sf, x.width / ds->sf};
  }
  return x;
}

Shape restored_shape(const DegradationModel& m, const Shape& y) {
  if (const auto* ds = std::get_if<DownsampleOp>(&m.op)) {
    return Shape{y.channels, y.height * ds->sf, y.width * ds->sf};
  }
  return y;
}

Image forward(const DegradationModel& m, const Image& x) {
  check_input_shape(m, x.shape());
  return std::visit(
      Overloaded{
          [&](const IdentityOp&) { return x; },
          [&](const BlurOp& op) { return circular_convolve(x, op.kernel); },
          [&](const InpaintOp& op) {
            Image out(x);
            for (int c = 0; c < x.channels(); ++c) {
              auto ch = out.channel(c);
              for (std::size_t i = 0; i < ch.size(); ++i) {
                if (!op.mask.flags()[i]) ch[i] = 0.0;
              }
            }
            return out;
          },
          [&](const DownsampleOp& op) {
            if (op.kernel) return decimate(circular_convolve(x, *op.kernel), op.sf);
            return bicubic_resize(x, op.sf, ResizeDirection::kDown);
          },
      },
      m.op);
}

Image adjoint(const DegradationModel& m, const Image& r) {
  return std::visit(
      Overloaded{
          [&](const IdentityOp&) { return r; },
          [&](const BlurOp& op) { return circular_correlate(r, op.kernel); },
          [&](const InpaintOp& op) {
            if (op.mask.height() != r.height() || op.mask.width() != r.width()) {
              throw Error(ErrorCode::kShapeMismatch, "mask does not match image");
            }
            Image out(r);
            for (int c = 0; c < r.channels(); ++c) {
              auto ch = out.channel(c);
              for (std::size_t i = 0; i < ch.size(); ++i) {
                if (!op.mask.flags()[i]) ch[i] = 0.0;
              }
            }
            return out;
          },
          [&](const DownsampleOp& op) {
            const Shape high = restored_shape(m, r.shape());
            if (op.kernel) return circular_correlate(zero_insert(r, op.sf), *op.kernel);
            return bicubic_resize_down_adjoint(r, op.sf, high);
          },
      },
      m.op);
}

Image apply(const DegradationModel& m, const Image& x, Rng& rng) {
  Image y = forward(m, x);
  if (m.sigma_n > 0.0) {
    for (double& v : y.data()) v += m.sigma_n * rng.normal();
  }
  return y;
}

}  // namespace diffpir
