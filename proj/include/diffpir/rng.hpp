// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "diffpir/image.hpp"

namespace diffpir {

/// Seeded generator owned by one sampling run or degradation call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  /// Image of i.i.d. N(0,1) draws, filled in storage order.
  Image normal_image(const Shape& shape) {
    Image out(shape);
    for (double& v : out.data()) v = normal();
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace diffpir
