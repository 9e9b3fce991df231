// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "diffpir/simd/kernels.hpp"
#include "kernels_internal.hpp"

namespace diffpir::simd {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

const KernelTable* avx2_kernels() {
#if defined(DIFFPIR_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? avx2_table_if_compiled() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() {
  // Advanced SIMD is mandatory on AArch64.
  return neon_table_if_compiled();
}

namespace {

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return &scalar_kernels();
    case Isa::kAvx2: return avx2_kernels();
    case Isa::kNeon: return neon_kernels();
  }
  return nullptr;
}

const KernelTable* detect() {
  if (const char* env = std::getenv("DIFFPIR_SIMD")) {
    const std::string want(env);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (want == to_string(isa)) {
        if (const KernelTable* t = table_for(isa)) return t;
      }
    }
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  if (const KernelTable* t = neon_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = detect();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

bool force_isa(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) return false;
  g_active.store(t, std::memory_order_release);
  return true;
}

}  // namespace diffpir::simd
