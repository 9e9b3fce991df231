// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace diffpir {

inline constexpr double kDefaultSigmaFloor = 1e-3;

/// Discrete variance schedule indexed t = 1..N, with alpha_bar(0) == 1.
class NoiseSchedule {
 public:
  /// Betas for t = 1..N. Each must lie in (0,1).
  explicit NoiseSchedule(std::vector<double> betas);

  int n_train() const { return static_cast<int>(beta_.size()); }

  double beta(int t) const;
  double alpha(int t) const;
  /// Cumulative product of alpha up to t; alpha_bar(0) == 1.
  double alpha_bar(int t) const;

  /// Variance-exploding noise level sqrt((1 - alpha_bar) / alpha_bar).
  double sigma_bar(int t) const;

  /// Relative noise level sqrt(beta / (1 - beta)) between consecutive steps.
  double relative_sigma(int t) const;

  /// Data-prox weight lambda * max(sigma_n, floor)^2 / sigma_bar(t)^2.
  double rho(int t, double lambda, double sigma_n, double sigma_floor = kDefaultSigmaFloor) const;

 private:
  void check(int t, int lo) const;

  std::vector<double> beta_;
  std::vector<double> alpha_bar_;  // index 0 holds t = 0
};

/// Linearly spaced betas, endpoints inclusive.
NoiseSchedule build_linear_schedule(int n_train = 1000, double beta_start = 1e-4,
                                    double beta_end = 0.02);

/// Strictly decreasing sampling timesteps, ending at 1.
struct StepPlan {
  std::vector<int> timesteps;
  int t_start = 0;

  std::size_t size() const { return timesteps.size(); }
};

/// Quadratically spaced subsequence of [1, t_start], dense near t = 1.
/// Produces exactly n_steps distinct timesteps.
StepPlan quadratic_subsequence(int n_train, int n_steps, int t_start);

/// Every timestep from t_start down to 1.
StepPlan full_sequence(int n_train, int t_start);

}  // namespace diffpir
