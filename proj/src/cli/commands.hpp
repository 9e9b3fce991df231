// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "config.hpp"
#include "diffpir/degrade.hpp"
#include "diffpir/denoise.hpp"
#include "diffpir/sample.hpp"
#include "diffpir/schedule.hpp"
#include "json.hpp"

namespace diffpir::cli {

struct ResolvedHyperparameters {
  double lambda = 1.0;
  double zeta = 0.3;
  int steps = 100;
  double sigma_n = 0.05;
  /// "explicit", "preset:<name>" or "default".
  std::string source;
};

/// Applies explicit values, then the requested preset, then the automatic
/// preset for external denoisers, then the built-in defaults.
ResolvedHyperparameters resolve_hyperparameters(const Settings& s);

NoiseSchedule make_schedule(const Settings& s);
SamplerConfig make_sampler_config(const Settings& s, const ResolvedHyperparameters& h);

/// Endpoint for an "extern:<endpoint>" denoiser; DIFFPIR_BRIDGE overrides it.
std::string extern_endpoint(const std::string& denoiser);

/// `truth` is required for the oracle denoiser.
std::unique_ptr<Denoiser> make_denoiser(const Settings& s, const Image* truth);

/// Operator for the task acting on a clean image of shape `clean`. Kernels and
/// masks come from --kernel / --mask when given, otherwise they are generated
/// from `rng`; degrade seeds it with --seed before drawing the noise.
DegradationModel make_model(const Settings& s, const Shape& clean, double sigma_n, Rng& rng);

/// Writes PNG frames of x_t, x0 and the corrected x0 for every step plus a
/// manifest.json listing them with the step residual.
void dump_trajectory(const Trajectory& trajectory, const std::filesystem::path& dir);

/// Human-readable aligned key/value block.
void print_report(const nlohmann::json& report, std::ostream& out);

int cmd_degrade(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_restore(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_bench(const Settings& s, std::ostream& out, std::ostream& err);

}  // namespace diffpir::cli
