// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diffpir/image.hpp"

namespace diffpir {

/// Unnormalized forward 2-D DFT of each channel.
ComplexField fft2(const Image& x);
ComplexField fft2(const ComplexField& x);

/// Inverse 2-D DFT (scaled by 1/(h*w)) of each channel.
ComplexField ifft2(const ComplexField& spectrum);

/// Inverse transform keeping the real part. When `imag_ratio` is given it
/// receives ||imag|| / ||real|| of the inverse.
Image ifft2_real(const ComplexField& spectrum, double* imag_ratio = nullptr);

/// Optical transfer function of `k` on an h x w grid: the kernel is placed at
/// the top-left corner and circularly shifted so that its anchor lands on
/// (0,0). A 1x1 delta therefore has a spectrum of all ones.
ComplexField kernel_otf(const Kernel2D& k, int height, int width);

/// Periodic-boundary convolution of every channel with k.
/// Throws KernelTooLarge when k exceeds the image extent.
Image circular_convolve(const Image& x, const Kernel2D& k);

/// Adjoint of circular_convolve (periodic correlation with k).
Image circular_correlate(const Image& x, const Kernel2D& k);

}  // namespace diffpir
