// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "checks.hpp"
#include "diffpir/schedule.hpp"
#include "oracles.hpp"

using namespace diffpir;

TEST_CASE("single step schedule") {
  const auto s = build_linear_schedule(1, 0.3, 0.3);
  CHECK(s.n_train() == 1);
  CHECK(s.beta(1) == 0.3);
  CHECK(s.alpha_bar(1) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(s.alpha_bar(0) == 1.0);
}

TEST_CASE("two step schedule by hand") {
  const auto s = build_linear_schedule(2, 0.1, 0.3);
  CHECK(s.beta(1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.beta(2) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(s.alpha_bar(1) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(s.alpha_bar(2) == doctest::Approx(0.63).epsilon(1e-15));
}

TEST_CASE("standard schedule against extended precision") {
  const auto s = build_linear_schedule();
  CHECK(s.alpha_bar(1000) == doctest::Approx(4.0e-5).epsilon(0.02));
  for (int t : {1, 2, 10, 100, 500, 999, 1000}) {
    const double ref = oracle::extended_alpha_bar(1000, 1e-4, 0.02, t);
    CHECK(std::abs(s.alpha_bar(t) - ref) / ref < 1e-12);
  }
}

TEST_CASE("invalid schedules") {
  CHECK_ERROR_CODE(build_linear_schedule(0), ErrorCode::kInvalidRange);
  CHECK_ERROR_CODE(build_linear_schedule(10, 0.02, 0.01), ErrorCode::kInvalidRange);
  CHECK_ERROR_CODE(build_linear_schedule(10, 0.0, 0.01), ErrorCode::kInvalidRange);
  CHECK_ERROR_CODE(build_linear_schedule(10, 0.1, 1.0), ErrorCode::kInvalidRange);
  CHECK_ERROR_CODE(NoiseSchedule({0.5, 1.5}), ErrorCode::kInvalidRange);
}

TEST_CASE("sigma_bar") {
  const NoiseSchedule half({0.5});
  CHECK(half.sigma_bar(1) == doctest::Approx(1.0).epsilon(1e-15));
  const NoiseSchedule tenth({0.1});
  CHECK(tenth.sigma_bar(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const auto s = build_linear_schedule();
  for (int t = 1; t < 1000; ++t) CHECK(s.sigma_bar(t + 1) > s.sigma_bar(t));
  for (int t = 1; t <= 1000; t += 37) {
    const double sb = s.sigma_bar(t);
    CHECK(std::abs(s.alpha_bar(t) * (1.0 + sb * sb) - 1.0) < 1e-12);
  }
  CHECK_ERROR_CODE(s.sigma_bar(0), ErrorCode::kOutOfRange);
  CHECK_ERROR_CODE(s.sigma_bar(1001), ErrorCode::kOutOfRange);
}

TEST_CASE("rho") {
  const NoiseSchedule half({0.5});
  CHECK(half.rho(1, 8.0, 0.05) == doctest::Approx(0.02).epsilon(1e-14));
  const double r0 = half.rho(1, 2.0, 0.0);
  CHECK(r0 > 0.0);
  CHECK(r0 == doctest::Approx(2.0 * 1e-6).epsilon(1e-14));

  const auto s = build_linear_schedule();
  for (int t = 1; t < 1000; ++t) CHECK(s.rho(t + 1, 7.0, 0.05) < s.rho(t, 7.0, 0.05));
  CHECK_ERROR_CODE(s.rho(1, 0.0, 0.05), ErrorCode::kOutOfRange);
  CHECK_ERROR_CODE(s.rho(1, 1.0, -0.1), ErrorCode::kOutOfRange);
}

TEST_CASE("quadratic plan examples") {
  CHECK(quadratic_subsequence(100, 5, 100).timesteps == std::vector<int>{100, 57, 26, 7, 1});
  CHECK(quadratic_subsequence(1000, 1, 400).timesteps == std::vector<int>{400});
  const auto full = quadratic_subsequence(50, 20, 20);
  for (int i = 0; i < 20; ++i) CHECK(full.timesteps[i] == 20 - i);
  CHECK(full_sequence(50, 20).timesteps == full.timesteps);
}

TEST_CASE("quadratic plan invariants") {
  for (int t_start : {10, 57, 400, 1000}) {
    for (int n : {1, 2, 3, 7, 10, 20, 100}) {
      if (n > t_start) continue;
      CAPTURE(t_start);
      CAPTURE(n);
      const auto plan = quadratic_subsequence(1000, n, t_start);
      REQUIRE(plan.size() == static_cast<std::size_t>(n));
      CHECK(plan.t_start == t_start);
      CHECK(plan.timesteps.front() == t_start);
      CHECK(plan.timesteps.back() == (n == 1 ? t_start : 1));
      for (std::size_t i = 1; i < plan.size(); ++i) {
        CHECK(plan.timesteps[i] < plan.timesteps[i - 1]);
      }
      // Gaps shrink towards t = 1, up to one unit of rounding.
      for (std::size_t i = 2; i < plan.size(); ++i) {
        const int g0 = plan.timesteps[i - 2] - plan.timesteps[i - 1];
        const int g1 = plan.timesteps[i - 1] - plan.timesteps[i];
        CHECK(g1 <= g0 + 1);
      }
    }
  }
}

TEST_CASE("invalid plans") {
  CHECK_ERROR_CODE(quadratic_subsequence(100, 0, 100), ErrorCode::kInvalidRange);
  CHECK_ERROR_CODE(quadratic_subsequence(100, 11, 10), ErrorCode::kInvalidRange);
  CHECK_ERROR_CODE(quadratic_subsequence(100, 5, 101), ErrorCode::kInvalidRange);
}
