// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diffpir/simd/kernels.hpp"

namespace diffpir::simd {

// Defined in the ISA-specific translation units when compiled in.
const KernelTable* avx2_table_if_compiled();
const KernelTable* neon_table_if_compiled();

}  // namespace diffpir::simd
