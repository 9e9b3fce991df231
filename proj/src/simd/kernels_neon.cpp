// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// AArch64 variants. Plain multiply and add only, no vfmaq.

#include "kernels_internal.hpp"

#if defined(DIFFPIR_HAVE_NEON)

#include <arm_neon.h>

namespace diffpir::simd {
namespace neon {
namespace {

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t ax = vmulq_f64(va, vld1q_f64(x + i));
    const float64x2_t by = vmulq_f64(vb, vld1q_f64(y + i));
    vst1q_f64(out + i, vaddq_f64(ax, by));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpbypcz(double a, const double* x, double b, const double* y, double c, const double* z,
              double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  const float64x2_t vc = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t ax = vmulq_f64(va, vld1q_f64(x + i));
    const float64x2_t by = vmulq_f64(vb, vld1q_f64(y + i));
    const float64x2_t cz = vmulq_f64(vc, vld1q_f64(z + i));
    vst1q_f64(out + i, vaddq_f64(vaddq_f64(ax, by), cz));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i] + c * z[i];
}

void masked_prox(const std::uint8_t* mask, const double* y, const double* z, double rho,
                 double* out, std::size_t n) {
  const float64x2_t vrho = vdupq_n_f64(rho);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const double mv[2] = {mask[i] ? 1.0 : 0.0, mask[i + 1] ? 1.0 : 0.0};
    const float64x2_t m = vld1q_f64(mv);
    const float64x2_t num =
        vaddq_f64(vmulq_f64(m, vld1q_f64(y + i)), vmulq_f64(vrho, vld1q_f64(z + i)));
    vst1q_f64(out + i, vdivq_f64(num, vaddq_f64(m, vrho)));
  }
  for (; i < n; ++i) {
    const double m = mask[i] ? 1.0 : 0.0;
    out[i] = (m * y[i] + rho * z[i]) / (m + rho);
  }
}

// One complex value per register.
void spectral_prox(const std::complex<double>* k, const std::complex<double>* fy,
                   const std::complex<double>* fz, double rho, std::complex<double>* out,
                   std::size_t n) {
  const auto* kd = reinterpret_cast<const double*>(k);
  const auto* yd = reinterpret_cast<const double*>(fy);
  const auto* zd = reinterpret_cast<const double*>(fz);
  auto* od = reinterpret_cast<double*>(out);
  const float64x2_t vrho = vdupq_n_f64(rho);
  const float64x2_t flip = {1.0, -1.0};
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t kv = vld1q_f64(kd + 2 * i);
    const float64x2_t yv = vld1q_f64(yd + 2 * i);
    const float64x2_t kr = vdupq_laneq_f64(kv, 0);
    const float64x2_t ki = vdupq_laneq_f64(kv, 1);
    const float64x2_t yswap = vextq_f64(yv, yv, 1);  // yi yr
    // (kr*yr + ki*yi, kr*yi + (-(ki*yr)))
    const float64x2_t cy = vaddq_f64(vmulq_f64(kr, yv), vmulq_f64(vmulq_f64(ki, yswap), flip));
    const float64x2_t num = vaddq_f64(cy, vmulq_f64(vrho, vld1q_f64(zd + 2 * i)));
    const float64x2_t ksq = vmulq_f64(kv, kv);
    const double den = vgetq_lane_f64(ksq, 0) + vgetq_lane_f64(ksq, 1) + rho;
    vst1q_f64(od + 2 * i, vdivq_f64(num, vdupq_n_f64(den)));
  }
}

double squared_distance(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    total += d * d;
  }
  return total;
}

}  // namespace
}  // namespace neon

const KernelTable* neon_table_if_compiled() {
  static const KernelTable table{Isa::kNeon,          neon::axpby,
                                 neon::axpbypcz,      neon::masked_prox,
                                 neon::spectral_prox, neon::squared_distance};
  return &table;
}

}  // namespace diffpir::simd

#else

namespace diffpir::simd {
const KernelTable* neon_table_if_compiled() { return nullptr; }
}  // namespace diffpir::simd

#endif
