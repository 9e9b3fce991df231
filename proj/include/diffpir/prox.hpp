// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Solvers for the data subproblem
//
//   x = argmin_x ||y - H(x)||^2 + rho * ||x - z0||^2
//
// one per operator family, plus a first-order fallback that works for any
// operator with an adjoint.

#include "diffpir/degrade.hpp"
#include "diffpir/image.hpp"
#include "diffpir/mask.hpp"

namespace diffpir::prox {

/// (M.y + rho z0) / (M + rho), elementwise.
Image inpaint(const Image& y, const Mask& m, const Image& z0, double rho);

/// FFT closed form for circular blur. Throws NumericalInstability when the
/// inverse transform leaves an imaginary part above 1e-6 of the output norm.
Image deblur_fft(const Image& y, const Kernel2D& k, const Image& z0, double rho);

/// Closed form for blur followed by stride-sf decimation; z0 is high resolution.
Image sr_closed(const Image& y, const Kernel2D& k, int sf, const Image& z0, double rho);

/// Iterative back-projection with bicubic resampling, step gamma / (1 + rho).
Image sr_ibp(const Image& y, int sf, const Image& z0, double rho, double gamma = 1.0,
             int iters = 5);

/// Gradient of ||y - H(z)||^2 with respect to z: -2 H^T (y - H z).
Image data_gradient(const Image& y, const DegradationModel& h, const Image& z);

/// One gradient step z0 - (1/(2 rho)) * data_gradient(y, h, z0).
Image gradient_step(const Image& y, const DegradationModel& h, const Image& z0, double rho);

/// ||y - H(x)||^2 + rho ||x - z0||^2
double objective(const Image& y, const DegradationModel& h, const Image& x, const Image& z0,
                 double rho);

enum class SrSolver { kClosedForm, kBackProjection };

struct SolverOptions {
  SrSolver sr_solver = SrSolver::kClosedForm;
  double ibp_gamma = 1.0;
  int ibp_iters = 5;
  /// Use gradient_step for every operator instead of the closed forms.
  bool force_gradient_step = false;
};

/// Picks the solver for the operator kind. Bicubic downsampling uses the
/// approximate kernel from bicubic_sr_kernel for the closed form.
Image solve(const Image& y, const DegradationModel& h, const Image& z0, double rho,
            const SolverOptions& opts = {});

}  // namespace diffpir::prox
