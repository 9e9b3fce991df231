// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "diffpir/metrics.hpp"
#include "diffpir/prox.hpp"
#include "diffpir/sample.hpp"
#include "diffpir/toy.hpp"
#include "oracles.hpp"

using namespace diffpir;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

const NoiseSchedule& schedule() {
  static const NoiseSchedule s = build_linear_schedule();
  return s;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Image dense_prox(const Eigen::MatrixXd& a, const Image& y, const Image& z0, double rho) {
  Image out(z0.shape());
  for (int c = 0; c < z0.channels(); ++c) {
    oracle::set_channel(out, c,
                        oracle::solve_prox(a, oracle::channel_vector(y, c),
                                           oracle::channel_vector(z0, c), rho));
  }
  return out;
}

Outcome prox_oracle() {
  Rng rng(101);
  double deblur = 0.0, sr = 0.0;
  bool inpaint_exact = true;
  for (int i = 0; i < 20; ++i) {
    const double rho = 0.05 + 2.0 * rng.uniform();
    const int ks = rng.uniform() < 0.5 ? 3 : 5;
    const Kernel2D k = oracle::random_kernel(ks, ks, rng);
    const Image z = oracle::random_image({3, 8, 8}, rng);

    const Image y8 = oracle::random_image({3, 8, 8}, rng);
    deblur = std::max(deblur, oracle::max_relative_error(
                                  prox::deblur_fft(y8, k, z, rho),
                                  dense_prox(oracle::blur_matrix(k, 8, 8), y8, z, rho), 1e-3));

    const Image y4 = oracle::random_image({3, 4, 4}, rng);
    const Eigen::MatrixXd s = oracle::decimation_matrix(8, 8, 2) * oracle::blur_matrix(k, 8, 8);
    sr = std::max(sr, oracle::max_relative_error(prox::sr_closed(y4, k, 2, z, rho),
                                                 dense_prox(s, y4, z, rho), 1e-3));

    const Mask m = make_random_mask(8, 8, 0.5, rng);
    const Image x = prox::inpaint(y8, m, z, rho);
    for (int c = 0; c < 3; ++c) {
      for (int r = 0; r < 8; ++r) {
        for (int q = 0; q < 8; ++q) {
          const double mv = m.kept(r, q) ? 1.0 : 0.0;
          const double ref = (mv * y8.at(c, r, q) + rho * z.at(c, r, q)) / (mv + rho);
          inpaint_exact = inpaint_exact && x.at(c, r, q) == ref;
        }
      }
    }
  }
  return {deblur < 1e-8 && sr < 1e-8 && inpaint_exact,
          fmt("deblur %.2e, sr %.2e, inpaint ", deblur, sr) + (inpaint_exact ? "exact" : "inexact")};
}

template <typename F>
Image numeric_gradient(F f, Image x, double h) {
  Image g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    x[i] = v + h;
    const double fp = f(x);
    x[i] = v - h;
    const double fm = f(x);
    x[i] = v;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double worst_relative(const Image& a, const Image& b, double floor) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    w = std::max(w, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
  }
  return w;
}

Outcome gradients() {
  Rng rng(202);
  const std::vector<DegradationModel> models = {
      {IdentityOp{}, 0.0},
      {BlurOp{oracle::random_kernel(3, 3, rng)}, 0.0},
      {InpaintOp{make_random_mask(8, 8, 0.5, rng)}, 0.0},
      {DownsampleOp{2, oracle::random_kernel(3, 3, rng)}, 0.0},
      {DownsampleOp{2, std::nullopt}, 0.0},
  };
  double data = 0.0;
  for (const auto& h : models) {
    const Image z = oracle::random_image({3, 8, 8}, rng);
    const Image y = oracle::random_image(measurement_shape(h, z.shape()), rng);
    const Image num = numeric_gradient([&](const Image& x) { return squared_distance(y, forward(h, x)); },
                                       z, 1e-5);
    data = std::max(data, worst_relative(prox::data_gradient(y, h, z), num, 1e-3));
  }

  const auto& s = schedule();
  double gauss = 0.0, gmm = 0.0;
  GaussianPrior g(PriorMean(oracle::random_image({3, 4, 4}, rng)), 0.05);
  const GmmPrior mix({{0.3, PriorMean(oracle::random_image({1, 3, 3}, rng)), 0.02},
                      {0.7, PriorMean(oracle::random_image({1, 3, 3}, rng)), 0.05}});
  for (int t : {1, 50, 250, 400, 800, 999}) {
    const double ab = s.alpha_bar(t);
    const Image x = oracle::random_image({3, 4, 4}, rng, -1.0, 1.5);
    const Image ng = numeric_gradient([&](const Image& z) { return g.log_density(z, ab); }, x, 1e-5);
    gauss = std::max(gauss, worst_relative(*g.score(x, t, s), ng, 1e-2));
    const Image xm = oracle::random_image({1, 3, 3}, rng);
    const Image nm = numeric_gradient([&](const Image& z) { return mix.log_density(z, ab); }, xm, 1e-5);
    gmm = std::max(gmm, worst_relative(*mix.score(xm, t, s), nm, 1e-2));
  }
  return {data < 1e-5 && gauss < 1e-6 && gmm < 1e-5,
          fmt("data %.2e, gaussian score %.2e, gmm score %.2e", data, gauss, gmm)};
}

Outcome hqs_equivalence() {
  const auto& s = schedule();
  Rng rng(303);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int t = 1 + static_cast<int>(rng.uniform() * 1000);
    const double ab = s.alpha_bar(t);
    const Image x(Shape{1, 1, 1}, rng.normal());
    const Image eps(Shape{1, 1, 1}, rng.normal());
    const Image noise(Shape{1, 1, 1}, rng.normal());
    const Image score = scaled(eps, -1.0 / std::sqrt(1.0 - ab));
    const Image ddpm = axpby(1.0, ddpm_reverse_mean(x, eps, t, s), std::sqrt(s.beta(t)), noise);
    worst = std::max(worst, std::abs(hqs_prior_step(x, score, t, s, noise)[0] - ddpm[0]));
  }
  return {worst <= 1e-12, fmt("max abs diff %.2e over 1000 scalars", worst)};
}

Outcome ddpm_moments() {
  const double mu = 0.3, var = 0.25;
  GaussianPrior prior(mu, var);
  Rng rng(404);
  const SampleResult r = run_ddpm({1, 100, 100}, prior, schedule(), 1000, rng);
  const double n = static_cast<double>(r.x.size());
  double mean = 0.0;
  for (double v : r.x.data()) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : r.x.data()) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double sigma = std::sqrt(var);
  const double z_mean = std::abs(mean - mu) / (sigma / std::sqrt(n));
  const double z_sd = std::abs(sd - sigma) / (sigma / std::sqrt(2.0 * (n - 1.0)));
  return {z_mean <= 3.0 && z_sd <= 3.0 && r.nfe == 1000,
          fmt("mean %.4f (%.2f SE), ", mean, z_mean) + fmt("std %.4f (%.2f SE)", sd, z_sd)};
}

Outcome exact_recovery() {
  Rng rng(505);
  const Image truth = quantize8(oracle::random_image({3, 64, 64}, rng));
  const DegradationModel h{InpaintOp{make_box_mask(64, 64, 32)}, 0.0};
  const Image y = forward(h, truth);
  OracleDenoiser o(truth);
  SamplerConfig cfg;
  cfg.zeta = 0.0;
  cfg.steps = 20;
  const SampleResult r = restore(y, h, o, schedule(), cfg);
  const double diff = oracle::max_abs_diff(r.x, truth);
  const double p = psnr(quantize8(r.x), truth);
  return {diff <= 1e-9 && std::isinf(p),
          fmt("max pixel diff %.2e, psnr ", diff) + (std::isinf(p) ? "Infinite" : fmt("%.2f dB", p))};
}

Outcome nfe_budget() {
  Rng rng(606);
  const Image truth = oracle::random_image({1, 16, 16}, rng);
  const DegradationModel h{BlurOp{gaussian_kernel(5, 1.0)}, 0.05};
  const Image y = apply(h, truth, rng);
  GaussianPrior prior(0.5, 0.05);
  SamplerConfig cfg;
  cfg.zeta = 0.3;
  cfg.steps = 100;
  const std::uint64_t before = prior.evaluations();
  const SampleResult r = restore(y, h, prior, schedule(), cfg);
  const std::uint64_t counted = prior.evaluations() - before;
  return {r.nfe == 100 && counted == 100,
          fmt("reported %.0f, counted %.0f", static_cast<double>(r.nfe), static_cast<double>(counted))};
}

std::vector<double> toy_errors(GmmPrior& prior, toy::Task task, int steps, int t_start) {
  std::vector<double> out;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto prob = toy::make_problem(prior, 8, task, seed);
    SamplerConfig cfg;
    cfg.lambda = 1.0;
    cfg.zeta = 0.3;
    cfg.steps = steps;
    cfg.t_start = t_start;
    cfg.seed = seed;
    out.push_back(toy::rmse(restore(prob.y, prob.model, prior, schedule(), cfg).x, prob.truth));
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

// Standard error of the mean paired difference a - b.
double paired_se(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double d = mean(a) - mean(b);
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i] - d) * (a[i] - b[i] - d);
  return std::sqrt(ss / (n - 1.0) / n);
}

Outcome ablation() {
  GmmPrior prior = toy::make_prior();
  const auto sr10 = toy_errors(prior, toy::Task::kNoisySr, 10, 1000);
  const auto sr100 = toy_errors(prior, toy::Task::kNoisySr, 100, 1000);
  const auto full = toy_errors(prior, toy::Task::kDeblur, 100, 1000);
  const auto partial = toy_errors(prior, toy::Task::kDeblur, 100, 400);
  return {mean(sr100) <= mean(sr10) && mean(partial) <= 1.1 * mean(full),
          fmt("sr rmse 10 steps %.4f, 100 steps %.4f ", mean(sr10), mean(sr100)) +
              fmt("(paired diff %.4f, se %.4f); ", mean(sr100) - mean(sr10), paired_se(sr100, sr10)) +
              fmt("deblur rmse t_start 1000 %.4f, 400 %.4f", mean(full), mean(partial))};
}

Outcome schedule_constants() {
  const double got = schedule().alpha_bar(1000);
  const double ref = oracle::extended_alpha_bar(1000, 1e-4, 0.02, 1000);
  const double rel = std::abs(got - ref) / ref;
  return {rel <= 1e-8, fmt("alpha_bar_N %.12e, relative error %.2e", got, rel)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"prox-oracle-equivalence", 10.0, prox_oracle},
      {"gradient-checks", 10.0, gradients},
      {"hqs-prior-step-equals-ddpm-step", 1.0, hqs_equivalence},
      {"ddpm-distributional-fidelity", 60.0, ddpm_moments},
      {"oracle-exact-recovery", 5.0, exact_recovery},
      {"nfe-budget", 0.0, nfe_budget},
      {"ablation-trends", 120.0, ablation},
      {"schedule-constants", 0.0, schedule_constants},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.3f s", secs);
    if (c.budget_s > 0.0) {
      timing += fmt(" of %.0f s", c.budget_s);
      if (secs >= c.budget_s) {
        o.pass = false;
        timing += ", over budget";
      }
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
