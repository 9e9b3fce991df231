// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 only (no -mfma) so results match the scalar reference.

#include "kernels_internal.hpp"

#if defined(DIFFPIR_HAVE_AVX2)

#include <immintrin.h>

namespace diffpir::simd {
namespace avx2 {
namespace {

constexpr std::size_t kLanes = 4;

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ax, by));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpbypcz(double a, const double* x, double b, const double* y, double c, const double* z,
              double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    const __m256d cz = _mm256_mul_pd(vc, _mm256_loadu_pd(z + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_add_pd(ax, by), cz));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i] + c * z[i];
}

void masked_prox(const std::uint8_t* mask, const double* y, const double* z, double rho,
                 double* out, std::size_t n) {
  const __m256d vrho = _mm256_set1_pd(rho);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    // Widen four mask bytes to a 0/1 double vector.
    std::int32_t bytes;
    __builtin_memcpy(&bytes, mask + i, sizeof(bytes));
    const __m128i wide = _mm_cvtepu8_epi32(_mm_cvtsi32_si128(bytes));
    const __m128i nz = _mm_cmpgt_epi32(wide, _mm_setzero_si128());
    const __m256d sel = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(nz));
    const __m256d m = _mm256_blendv_pd(zero, one, sel);
    const __m256d num = _mm256_add_pd(_mm256_mul_pd(m, _mm256_loadu_pd(y + i)),
                                      _mm256_mul_pd(vrho, _mm256_loadu_pd(z + i)));
    _mm256_storeu_pd(out + i, _mm256_div_pd(num, _mm256_add_pd(m, vrho)));
  }
  for (; i < n; ++i) {
    const double m = mask[i] ? 1.0 : 0.0;
    out[i] = (m * y[i] + rho * z[i]) / (m + rho);
  }
}

// Two complex values per 256-bit register, interleaved (re, im, re, im).
void spectral_prox(const std::complex<double>* k, const std::complex<double>* fy,
                   const std::complex<double>* fz, double rho, std::complex<double>* out,
                   std::size_t n) {
  const auto* kd = reinterpret_cast<const double*>(k);
  const auto* yd = reinterpret_cast<const double*>(fy);
  const auto* zd = reinterpret_cast<const double*>(fz);
  auto* od = reinterpret_cast<double*>(out);
  const __m256d vrho = _mm256_set1_pd(rho);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d kv = _mm256_loadu_pd(kd + 2 * i);   // kr0 ki0 kr1 ki1
    const __m256d yv = _mm256_loadu_pd(yd + 2 * i);   // yr0 yi0 yr1 yi1
    const __m256d zv = _mm256_loadu_pd(zd + 2 * i);
    const __m256d kr = _mm256_movedup_pd(kv);          // kr0 kr0 kr1 kr1
    const __m256d ki = _mm256_permute_pd(kv, 0xF);     // ki0 ki0 ki1 ki1
    const __m256d yswap = _mm256_permute_pd(yv, 0x5);  // yi0 yr0 yi1 yr1
    // real: kr*yr + ki*yi ; imag: kr*yi - ki*yr
    const __m256d t1 = _mm256_mul_pd(kr, yv);          // kr*yr, kr*yi
    const __m256d t2 = _mm256_mul_pd(ki, yswap);       // ki*yi, ki*yr
    const __m256d sign = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
    const __m256d cy = _mm256_add_pd(t1, _mm256_xor_pd(t2, sign));
    const __m256d num = _mm256_add_pd(cy, _mm256_mul_pd(vrho, zv));
    const __m256d ksq = _mm256_mul_pd(kv, kv);         // kr^2 ki^2 ...
    const __m256d den = _mm256_add_pd(_mm256_hadd_pd(ksq, ksq), vrho);
    _mm256_storeu_pd(od + 2 * i, _mm256_div_pd(num, den));
  }
  for (; i < n; ++i) {
    const double kr = k[i].real(), ki = k[i].imag();
    const double yr = fy[i].real(), yi = fy[i].imag();
    const double nr = kr * yr + ki * yi + rho * fz[i].real();
    const double ni = kr * yi - ki * yr + rho * fz[i].imag();
    const double den = kr * kr + ki * ki + rho;
    out[i] = {nr / den, ni / den};
  }
}

double squared_distance(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(x + i + kLanes), _mm256_loadu_pd(y + i + kLanes));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace
}  // namespace avx2

const KernelTable* avx2_table_if_compiled() {
  static const KernelTable table{Isa::kAvx2,          avx2::axpby,
                                 avx2::axpbypcz,      avx2::masked_prox,
                                 avx2::spectral_prox, avx2::squared_distance};
  return &table;
}

}  // namespace diffpir::simd

#else

namespace diffpir::simd {
const KernelTable* avx2_table_if_compiled() { return nullptr; }
}  // namespace diffpir::simd

#endif
