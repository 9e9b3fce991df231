// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diffpir/degrade.hpp"
#include "diffpir/denoise.hpp"
#include "diffpir/image.hpp"
#include "diffpir/prox.hpp"
#include "diffpir/rng.hpp"
#include "diffpir/schedule.hpp"

namespace diffpir {

enum class SamplerKind { kDiffPir, kDdpm, kDdim, kDpsY0, kDpsYt };

std::string to_string(SamplerKind kind);
/// Accepts "diffpir", "ddpm", "ddim", "dps-y0", "dps-yt".
SamplerKind parse_sampler_kind(const std::string& name);

/// Starting point forward-diffused to t_start when t_start < N.
enum class Initializer { kPseudoInverse, kZeros };

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kDiffPir;
  double lambda = 1.0;
  double zeta = 0.0;
  double eta = 0.0;
  int steps = 100;
  int t_start = 1000;
  std::uint64_t seed = 0;
  double sigma_floor = kDefaultSigmaFloor;
  Initializer initializer = Initializer::kPseudoInverse;
  prox::SolverOptions solver;
  bool record_trajectory = false;
  /// DPS-y0 falls back to a central difference along H^T(y - H x0) when the
  /// denoiser has no analytic Jacobian. Disabling it makes such runs fail.
  bool finite_difference_vjp = true;
  /// Largest per-pixel perturbation of the finite-difference probe.
  double fd_step = 1e-3;

  /// Throws InvalidConfig on out-of-domain values.
  void validate() const;
};

struct StepRecord {
  int t = 0;
  Image x_t;
  Image x0;
  Image x0_hat;
  double residual = 0.0;
};

struct Trajectory {
  std::vector<StepRecord> records;
};

struct SampleResult {
  Image x;
  Trajectory trajectory;
  std::vector<int> timesteps;
  /// ||y - H(estimate)|| per step; empty for unconditional samplers.
  std::vector<double> residuals;
  std::uint64_t nfe = 0;
};

// ---------------------------------------------------------------------------
// Building blocks

/// x_t = sqrt(ab) x0 + sqrt(1 - ab) eps, eps ~ N(0, I).
Image forward_diffuse(const Image& x0, int t, const NoiseSchedule& s, Rng& rng);
/// Same with caller-supplied eps.
Image forward_diffuse_with(const Image& x0, int t, const NoiseSchedule& s, const Image& eps);

/// Cheap estimate of x from y used to seed partial starts.
Image pseudo_inverse(const Image& y, const DegradationModel& model);

/// One DiffPIR step from t to t_prev. Draws eps only when zeta > 0 and t_prev > 0.
Image diffpir_step(const Image& x_t, int t, int t_prev, Denoiser& denoiser,
                   const DegradationModel& model, const Image& y, const NoiseSchedule& s,
                   const SamplerConfig& cfg, Rng& rng, StepRecord* record = nullptr);

/// (1/sqrt(alpha_t)) (x_t - beta_t / sqrt(1 - ab_t) eps_theta)
Image ddpm_reverse_mean(const Image& x_t, const Image& eps_theta, int t, const NoiseSchedule& s);
/// Mean plus sqrt(beta_t) noise; eps_theta comes from the denoiser.
Image ddpm_reverse_step(const Image& x_t, int t, Denoiser& denoiser, const NoiseSchedule& s,
                        Rng& rng);

/// sigma for DDIM with stochasticity eta between t and t_prev.
double ddim_sigma(const NoiseSchedule& s, int t, int t_prev, double eta);
/// sqrt(ab_prev) x0 + sqrt(1 - ab_prev - sigma^2) eps_theta + sigma eps.
/// Draws eps only when sigma > 0.
Image ddim_step(const Image& x_t, int t, int t_prev, Denoiser& denoiser, const NoiseSchedule& s,
                double eta, Rng& rng);

/// Prior half-step written as a score step: (1/sqrt(alpha_t)) (x + beta_t score) + sqrt(beta_t) noise.
Image hqs_prior_step(const Image& x, const Image& score, int t, const NoiseSchedule& s,
                     const Image& noise);

/// sigma_t^2 / (2 lambda max(sigma_n, floor)^2) with sigma_t^2 = beta_t / (1 - beta_t).
double dps_step_factor(const NoiseSchedule& s, int t, double lambda, double sigma_n,
                       double sigma_floor = kDefaultSigmaFloor);

/// DDPM step followed by a gradient step towards the noised measurement y_{t-1}.
/// Draws the DDPM noise first, then the measurement noise.
Image dps_yt_step(const Image& x_t, int t, Denoiser& denoiser, const DegradationModel& model,
                  const Image& y, const NoiseSchedule& s, const SamplerConfig& cfg, Rng& rng);

/// DDPM step followed by a gradient step on ||y - H(x0(z))||^2 through the denoiser.
Image dps_y0_step(const Image& x_t, int t, Denoiser& denoiser, const DegradationModel& model,
                  const Image& y, const NoiseSchedule& s, const SamplerConfig& cfg, Rng& rng);

/// Gradient of ||y - H(x0(z))||^2 with respect to z, with x0 evaluated at timestep t.
Image dps_y0_gradient(const Image& z, int t, Denoiser& denoiser, const DegradationModel& model,
                      const Image& y, const NoiseSchedule& s, const SamplerConfig& cfg);

// ---------------------------------------------------------------------------
// Loops. Random draws: initial state first, then per-step draws in plan order.

/// Starts from N(0, I) when plan.t_start == N, otherwise from the forward-diffused
/// initializer.
SampleResult run_diffpir(const Image& y, const DegradationModel& model, Denoiser& denoiser,
                         const NoiseSchedule& s, const StepPlan& plan, const SamplerConfig& cfg,
                         Rng& rng);

/// Unconditional sampling over consecutive timesteps t_start..1 from N(0, I).
SampleResult run_ddpm(const Shape& shape, Denoiser& denoiser, const NoiseSchedule& s,
                      int t_start, Rng& rng);

/// Unconditional DDIM over an arbitrary plan, from N(0, I).
SampleResult run_ddim(const Shape& shape, Denoiser& denoiser, const NoiseSchedule& s,
                      const StepPlan& plan, double eta, Rng& rng);

/// DPS-y0 or DPS-yt (per cfg.kind) over consecutive timesteps t_start..1.
SampleResult run_dps(const Image& y, const DegradationModel& model, Denoiser& denoiser,
                     const NoiseSchedule& s, const SamplerConfig& cfg, Rng& rng);

/// Validates cfg, builds the plan and generator from it, and runs the selected
/// sampler. Unconditional kinds ignore y except for its restored shape.
SampleResult restore(const Image& y, const DegradationModel& model, Denoiser& denoiser,
                     const NoiseSchedule& s, const SamplerConfig& cfg);

}  // namespace diffpir
