// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Small analytic-prior restoration problems with known ground truth, used by
// the benchmark sweeps and the ablation checks.

#include <cstdint>
#include <string>

#include "diffpir/degrade.hpp"
#include "diffpir/denoise.hpp"

namespace diffpir::toy {

struct PriorOptions {
  int size = 8;
  int components = 16;
  double variance = 1e-4;
  std::uint64_t seed = 2024;
};

/// Mixture of equally weighted components over size x size grayscale images.
/// Component means are smooth random patterns in [0.2, 0.8].
GmmPrior make_prior(const PriorOptions& opts = {});

/// One draw x0 ~ prior.
Image sample_prior(const GmmPrior& prior, const Shape& shape, Rng& rng);

enum class Task { kDeblur, kNoisySr };

std::string to_string(Task task);
Task parse_task(const std::string& name);

struct Problem {
  Image truth;
  Image y;
  DegradationModel model;
};

/// Deblur: 5x5 Gaussian blur (std 1.0), sigma_n 0.05.
/// Noisy SR: 3x3 Gaussian blur (std 0.7) then stride-2 decimation, sigma_n 0.05.
/// The truth and the measurement noise are drawn from `seed`.
Problem make_problem(const GmmPrior& prior, int size, Task task, std::uint64_t seed);

double rmse(const Image& a, const Image& b);

}  // namespace diffpir::toy
