// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "diffpir/error.hpp"

namespace diffpir {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : beta_(std::move(betas)) {
  if (beta_.empty()) throw Error(ErrorCode::kInvalidRange, "schedule needs at least one step");
  alpha_bar_.resize(beta_.size() + 1);
  alpha_bar_[0] = 1.0;
  for (std::size_t i = 0; i < beta_.size(); ++i) {
    if (!(beta_[i] > 0.0 && beta_[i] < 1.0)) {
      throw Error(ErrorCode::kInvalidRange, "beta must lie in (0,1)");
    }
    alpha_bar_[i + 1] = alpha_bar_[i] * (1.0 - beta_[i]);
  }
}

void NoiseSchedule::check(int t, int lo) const {
  if (t < lo || t > n_train()) {
    throw Error(ErrorCode::kOutOfRange, "timestep " + std::to_string(t) + " outside [" +
                                            std::to_string(lo) + ", " +
                                            std::to_string(n_train()) + "]");
  }
}

double NoiseSchedule::beta(int t) const {
  check(t, 1);
  return beta_[t - 1];
}

double NoiseSchedule::alpha(int t) const { return 1.0 - beta(t); }

double NoiseSchedule::alpha_bar(int t) const {
  check(t, 0);
  return alpha_bar_[t];
}

double NoiseSchedule::sigma_bar(int t) const {
  check(t, 1);
  const double ab = alpha_bar_[t];
  return std::sqrt((1.0 - ab) / ab);
}

double NoiseSchedule::relative_sigma(int t) const {
  const double b = beta(t);
  return std::sqrt(b / (1.0 - b));
}

double NoiseSchedule::rho(int t, double lambda, double sigma_n, double sigma_floor) const {
  if (!(lambda > 0.0) || !(sigma_n >= 0.0) || !(sigma_floor > 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "rho needs lambda > 0, sigma_n >= 0 and sigma_floor > 0");
  }
  const double sn = std::max(sigma_n, sigma_floor);
  const double sb = sigma_bar(t);
  return lambda * sn * sn / (sb * sb);
}

NoiseSchedule build_linear_schedule(int n_train, double beta_start, double beta_end) {
  if (n_train < 1 || !(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
    throw Error(ErrorCode::kInvalidRange, "need n_train >= 1 and 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(n_train));
  for (int i = 0; i < n_train; ++i) {
    const double frac = n_train == 1 ? 0.0 : static_cast<double>(i) / (n_train - 1);
    betas[i] = beta_start + (beta_end - beta_start) * frac;
  }
  if (n_train > 1) betas.back() = beta_end;
  return NoiseSchedule(std::move(betas));
}

StepPlan quadratic_subsequence(int n_train, int n_steps, int t_start) {
  if (n_steps < 1 || n_steps > t_start || t_start > n_train) {
    throw Error(ErrorCode::kInvalidRange, "need 1 <= steps <= t_start <= n_train");
  }
  StepPlan plan;
  plan.t_start = t_start;
  if (n_steps == 1) {
    plan.timesteps = {t_start};
    return plan;
  }
  // Ascending t_i = 1 + round((i/(n-1))^2 * (t_start-1)).
  std::vector<int> asc(static_cast<std::size_t>(n_steps));
  for (int i = 0; i < n_steps; ++i) {
    const double frac = static_cast<double>(i) / (n_steps - 1);
    asc[i] = 1 + static_cast<int>(std::lround(frac * frac * (t_start - 1)));
  }
  // Rounding collapses neighbours near t = 1; push them apart so the plan
  // keeps exactly n_steps evaluations and stays inside [1, t_start].
  for (int i = 1; i < n_steps; ++i) asc[i] = std::max(asc[i], asc[i - 1] + 1);
  asc.back() = t_start;
  for (int i = n_steps - 2; i >= 0; --i) asc[i] = std::min(asc[i], asc[i + 1] - 1);
  plan.timesteps.assign(asc.rbegin(), asc.rend());
  return plan;
}

StepPlan full_sequence(int n_train, int t_start) {
  return quadratic_subsequence(n_train, t_start, t_start);
}

}  // namespace diffpir
