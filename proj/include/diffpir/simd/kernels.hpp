// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Data-parallel inner loops of the sampler and the data-prox solvers.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2 on
// x86-64, NEON on AArch64) are compiled in separate translation units and
// selected once at runtime. Elementwise kernels use only IEEE add/mul/div
// (no fused multiply-add), so all variants agree bit for bit with the scalar
// reference; only the reductions may differ in the last bits because they sum
// in a different order.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace diffpir::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  // out[i] = a*x[i] + b*y[i]
  void (*axpby)(double a, const double* x, double b, const double* y, double* out,
                std::size_t n);
  // out[i] = a*x[i] + b*y[i] + c*z[i]
  void (*axpbypcz)(double a, const double* x, double b, const double* y, double c,
                   const double* z, double* out, std::size_t n);
  // out[i] = (m[i]*y[i] + rho*z[i]) / (m[i] + rho), m[i] in {0,1}
  void (*masked_prox)(const std::uint8_t* mask, const double* y, const double* z, double rho,
                      double* out, std::size_t n);
  // out[i] = (conj(k[i])*fy[i] + rho*fz[i]) / (|k[i]|^2 + rho)
  void (*spectral_prox)(const std::complex<double>* k, const std::complex<double>* fy,
                        const std::complex<double>* fz, double rho, std::complex<double>* out,
                        std::size_t n);
  // sum_i (x[i] - y[i])^2
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Vector table for this build and CPU, or nullptr when unavailable.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Table used by the library. Chosen on first use from CPU features; the
/// DIFFPIR_SIMD environment variable ("scalar", "avx2", "neon") overrides.
const KernelTable& active();

/// Test hook: pin the active table. Returns false if the ISA is unavailable.
bool force_isa(Isa isa);

}  // namespace diffpir::simd
