// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace diffpir::cli {

struct Hyperparameters {
  double lambda = 1.0;
  double zeta = 0.3;
};

/// Published lambda / zeta table for one (NFE, dataset, noise) column.
struct Preset {
  std::string name;
  int nfe = 100;
  double sigma_n = 0.05;
  std::map<std::string, Hyperparameters> tasks;
};

/// Names: nfe{20,100}-{ffhq,imagenet}-noisy and nfe{20,100}-ffhq-noiseless.
const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);
std::optional<Hyperparameters> lookup(const Preset& preset, const std::string& task);

/// Preset bound automatically for external denoisers.
std::string default_preset_name(int steps, double sigma_n);

}  // namespace diffpir::cli
