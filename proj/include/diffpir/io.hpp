// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "diffpir/image.hpp"
#include "diffpir/mask.hpp"

namespace diffpir::io {

/// Loads an 8-bit grayscale or RGB PNG, mapping byte v to v/255. Alpha is
/// discarded. 16-bit images and palettes with transparency are rejected.
Image load_png(const std::filesystem::path& path);

/// Clamps to [0,1] and rounds to the nearest 8-bit level. 1 or 3 channels.
void save_png(const Image& x, const std::filesystem::path& path);

// K2D1: magic "K2D1", u32 height, u32 width (little-endian), then
// height*width little-endian f64 weights, row-major.
Kernel2D load_kernel_k2d(const std::filesystem::path& path);
void save_kernel_k2d(const Kernel2D& k, const std::filesystem::path& path);

/// Kernel stored as a grayscale PNG; weights are renormalized to sum 1.
Kernel2D load_kernel_png(const std::filesystem::path& path);
/// Writes the kernel scaled so that its peak maps to 255.
void save_kernel_png(const Kernel2D& k, const std::filesystem::path& path);

/// Dispatches on extension: .png goes through load_kernel_png, everything else K2D1.
Kernel2D load_kernel(const std::filesystem::path& path);

/// 8-bit PNG mask: 0 = dropped, 255 = kept (bytes >= 128 count as kept).
Mask load_mask_png(const std::filesystem::path& path);
void save_mask_png(const Mask& m, const std::filesystem::path& path);

// Raw f64 image sidecar: magic "I3D1", u32 channels, u32 height, u32 width,
// then channels*height*width little-endian f64 values.
Image load_raw(const std::filesystem::path& path);
void save_raw(const Image& x, const std::filesystem::path& path);

/// load_raw for ".f64" files, load_png otherwise.
Image load_image(const std::filesystem::path& path);

}  // namespace diffpir::io
