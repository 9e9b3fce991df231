// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/prox.hpp"

#include <cmath>

#include "diffpir/error.hpp"
#include "diffpir/fft.hpp"
#include "diffpir/simd/kernels.hpp"

namespace diffpir::prox {
namespace {

void require_positive_rho(double rho) {
  if (!(rho > 0.0)) throw Error(ErrorCode::kInvalidRange, "rho must be positive");
}

Image real_part_checked(const ComplexField& f) {
  double imag_ratio = 0.0;
  Image out = ifft2_real(f, &imag_ratio);
  if (imag_ratio > 1e-6) {
    throw Error(ErrorCode::kNumericalInstability,
                "imaginary residue " + std::to_string(imag_ratio) + " of output norm");
  }
  return out;
}

}  // namespace

Image inpaint(const Image& y, const Mask& m, const Image& z0, double rho) {
  require_same_shape(y.shape(), z0.shape(), "prox::inpaint");
  if (m.height() != y.height() || m.width() != y.width()) {
    throw Error(ErrorCode::kShapeMismatch, "prox::inpaint: mask does not match image");
  }
  require_positive_rho(rho);
  Image out(y.shape());
  const auto& kernels = simd::active();
  for (int c = 0; c < y.channels(); ++c) {
    kernels.masked_prox(m.data(), y.channel(c).data(), z0.channel(c).data(), rho,
                        out.channel(c).data(), y.shape().plane());
  }
  return out;
}

Image deblur_fft(const Image& y, const Kernel2D& k, const Image& z0, double rho) {
  require_same_shape(y.shape(), z0.shape(), "prox::deblur_fft");
  require_positive_rho(rho);
  const ComplexField otf = kernel_otf(k, y.height(), y.width());
  const ComplexField fy = fft2(y);
  const ComplexField fz = fft2(z0);
  ComplexField fx(y.shape());
  const auto& kernels = simd::active();
  for (int c = 0; c < y.channels(); ++c) {
    kernels.spectral_prox(otf.data.data(), fy.channel(c).data(), fz.channel(c).data(), rho,
                          fx.channel(c).data(), y.shape().plane());
  }
  return real_part_checked(fx);
}

Image sr_closed(const Image& y, const Kernel2D& k, int sf, const Image& z0, double rho) {
  if (sf < 1) throw Error(ErrorCode::kInvalidRange, "scale factor must be >= 1");
  if (z0.channels() != y.channels() || z0.height() != y.height() * sf ||
      z0.width() != y.width() * sf) {
    throw Error(ErrorCode::kShapeMismatch, "prox::sr_closed: z0 must be sf times y");
  }
  require_positive_rho(rho);
  const int H = z0.height(), W = z0.width();
  const int h = y.height(), w = y.width();
  const ComplexField otf = kernel_otf(k, H, W);
  const ComplexField fup = fft2(zero_insert(y, sf));
  const ComplexField fz = fft2(z0);
  const double blocks = static_cast<double>(sf) * sf;

  // |F(k)|^2 averaged over the sf*sf aliases of each low-resolution bin.
  std::vector<double> power_down(static_cast<std::size_t>(h) * w, 0.0);
  for (int Y = 0; Y < H; ++Y) {
    for (int X = 0; X < W; ++X) {
      power_down[static_cast<std::size_t>(Y % h) * w + X % w] +=
          std::norm(otf.data[static_cast<std::size_t>(Y) * W + X]) / blocks;
    }
  }

  ComplexField fx(z0.shape());
  std::vector<std::complex<double>> kd_down(static_cast<std::size_t>(h) * w);
  for (int c = 0; c < y.channels(); ++c) {
    const auto fu = fup.channel(c);
    const auto fzc = fz.channel(c);
    auto out = fx.channel(c);
    // d = conj(Fk) F(y up) + rho F(z0)
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = std::conj(otf.data[i]) * fu[i] + rho * fzc[i];
    }
    std::fill(kd_down.begin(), kd_down.end(), std::complex<double>{});
    for (int Y = 0; Y < H; ++Y) {
      for (int X = 0; X < W; ++X) {
        const std::size_t i = static_cast<std::size_t>(Y) * W + X;
        kd_down[static_cast<std::size_t>(Y % h) * w + X % w] += otf.data[i] * out[i] / blocks;
      }
    }
    for (std::size_t j = 0; j < kd_down.size(); ++j) kd_down[j] /= power_down[j] + rho;
    for (int Y = 0; Y < H; ++Y) {
      for (int X = 0; X < W; ++X) {
        const std::size_t i = static_cast<std::size_t>(Y) * W + X;
        const auto& q = kd_down[static_cast<std::size_t>(Y % h) * w + X % w];
        out[i] = (out[i] - std::conj(otf.data[i]) * q) / rho;
      }
    }
  }
  return real_part_checked(fx);
}

Image sr_ibp(const Image& y, int sf, const Image& z0, double rho, double gamma, int iters) {
  if (iters < 1) throw Error(ErrorCode::kInvalidRange, "IBP needs at least one iteration");
  if (!(gamma >= 0.0)) throw Error(ErrorCode::kInvalidRange, "IBP step must be >= 0");
  require_positive_rho(rho);
  if (z0.channels() != y.channels() || z0.height() != y.height() * sf ||
      z0.width() != y.width() * sf) {
    throw Error(ErrorCode::kShapeMismatch, "prox::sr_ibp: z0 must be sf times y");
  }
  const double step = gamma / (1.0 + rho);
  Image x = z0;
  for (int i = 0; i < iters; ++i) {
    const Image residual = axpby(1.0, y, -1.0, bicubic_resize(x, sf, ResizeDirection::kDown));
    x = axpby(1.0, x, step, bicubic_resize(residual, sf, ResizeDirection::kUp));
  }
  return x;
}

Image data_gradient(const Image& y, const DegradationModel& h, const Image& z) {
  const Image hz = forward(h, z);
  require_same_shape(y.shape(), hz.shape(), "data_gradient");
  return scaled(adjoint(h, axpby(1.0, y, -1.0, hz)), -2.0);
}

Image gradient_step(const Image& y, const DegradationModel& h, const Image& z0, double rho) {
  require_positive_rho(rho);
  return axpby(1.0, z0, -1.0 / (2.0 * rho), data_gradient(y, h, z0));
}

double objective(const Image& y, const DegradationModel& h, const Image& x, const Image& z0,
                 double rho) {
  return squared_distance(y, forward(h, x)) + rho * squared_distance(x, z0);
}

Image solve(const Image& y, const DegradationModel& h, const Image& z0, double rho,
            const SolverOptions& opts) {
  if (opts.force_gradient_step) return gradient_step(y, h, z0, rho);
  if (std::holds_alternative<IdentityOp>(h.op)) {
    return inpaint(y, Mask::all_keep(y.height(), y.width()), z0, rho);
  }
  if (const auto* blur = std::get_if<BlurOp>(&h.op)) return deblur_fft(y, blur->kernel, z0, rho);
  if (const auto* mask = std::get_if<InpaintOp>(&h.op)) return inpaint(y, mask->mask, z0, rho);
  const auto& ds = std::get<DownsampleOp>(h.op);
  if (ds.kernel) return sr_closed(y, *ds.kernel, ds.sf, z0, rho);
  if (opts.sr_solver == SrSolver::kBackProjection) {
    return sr_ibp(y, ds.sf, z0, rho, opts.ibp_gamma, opts.ibp_iters);
  }
  return sr_closed(y, bicubic_sr_kernel(ds.sf), ds.sf, z0, rho);
}

}  // namespace diffpir::prox
