// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/simd/kernels.hpp"
#include "kernels_internal.hpp"

namespace diffpir::simd {
namespace scalar {

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpbypcz(double a, const double* x, double b, const double* y, double c, const double* z,
              double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i] + c * z[i];
}

void masked_prox(const std::uint8_t* mask, const double* y, const double* z, double rho,
                 double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mask[i] ? 1.0 : 0.0;
    out[i] = (m * y[i] + rho * z[i]) / (m + rho);
  }
}

void spectral_prox(const std::complex<double>* k, const std::complex<double>* fy,
                   const std::complex<double>* fz, double rho, std::complex<double>* out,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double kr = k[i].real(), ki = k[i].imag();
    const double yr = fy[i].real(), yi = fy[i].imag();
    // conj(k) * y
    const double nr = kr * yr + ki * yi + rho * fz[i].real();
    const double ni = kr * yi - ki * yr + rho * fz[i].imag();
    const double den = kr * kr + ki * ki + rho;
    out[i] = {nr / den, ni / den};
  }
}

double squared_distance(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace scalar

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::kScalar,          scalar::axpby,
                                 scalar::axpbypcz,      scalar::masked_prox,
                                 scalar::spectral_prox, scalar::squared_distance};
  return table;
}

}  // namespace diffpir::simd
