// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "presets.hpp"

namespace diffpir::cli {

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = {
      {"nfe20-ffhq-noisy", 20, 0.05,
       {{"deblur-gauss", {8.0, 0.5}}, {"deblur-motion", {7.0, 0.8}}, {"sr", {8.0, 0.4}}}},
      {"nfe20-imagenet-noisy", 20, 0.05,
       {{"deblur-gauss", {12.0, 0.9}}, {"deblur-motion", {7.0, 1.0}}, {"sr", {10.0, 0.5}}}},
      {"nfe20-ffhq-noiseless", 20, 0.0,
       {{"inpaint-box", {6.0, 1.0}},
        {"inpaint-random", {3.0, 1.0}},
        {"deblur-gauss", {15.0, 0.5}},
        {"deblur-motion", {25.0, 1.0}},
        {"sr", {9.0, 0.2}}}},
      {"nfe100-ffhq-noisy", 100, 0.05,
       {{"deblur-gauss", {7.0, 0.3}}, {"deblur-motion", {7.0, 0.4}}, {"sr", {8.0, 0.2}}}},
      {"nfe100-imagenet-noisy", 100, 0.05,
       {{"deblur-gauss", {8.0, 0.3}}, {"deblur-motion", {8.0, 0.7}}, {"sr", {9.0, 0.5}}}},
      {"nfe100-ffhq-noiseless", 100, 0.0,
       {{"inpaint-box", {6.0, 0.5}},
        {"inpaint-random", {7.0, 1.0}},
        {"deblur-gauss", {12.0, 0.4}},
        {"deblur-motion", {7.0, 0.9}},
        {"sr", {6.0, 0.3}}}},
  };
  return table;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::optional<Hyperparameters> lookup(const Preset& preset, const std::string& task) {
  const auto it = preset.tasks.find(task);
  if (it == preset.tasks.end()) return std::nullopt;
  return it->second;
}

std::string default_preset_name(int steps, double sigma_n) {
  return std::string(steps == 20 ? "nfe20" : "nfe100") + "-ffhq-" +
         (sigma_n > 0.0 ? "noisy" : "noiseless");
}

}  // namespace diffpir::cli
