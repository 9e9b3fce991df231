// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/sample.hpp"

#include <algorithm>
#include <cmath>

#include "diffpir/error.hpp"

namespace diffpir {
namespace {

[[noreturn]] void bad_config(const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, what);
}

double residual_norm(const Image& y, const DegradationModel& model, const Image& x) {
  return std::sqrt(squared_distance(y, forward(model, x)));
}

double max_abs(const Image& x) {
  double m = 0.0;
  for (double v : x.data()) m = std::max(m, std::abs(v));
  return m;
}

Image predict_eps(Denoiser& denoiser, const Image& x_t, int t, const NoiseSchedule& s) {
  return eps_from_x0(x_t, denoiser.predict_x0(x_t, t, s), s.alpha_bar(t));
}

}  // namespace

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kDiffPir: return "diffpir";
    case SamplerKind::kDdpm: return "ddpm";
    case SamplerKind::kDdim: return "ddim";
    case SamplerKind::kDpsY0: return "dps-y0";
    case SamplerKind::kDpsYt: return "dps-yt";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  for (auto k : {SamplerKind::kDiffPir, SamplerKind::kDdpm, SamplerKind::kDdim,
                 SamplerKind::kDpsY0, SamplerKind::kDpsYt}) {
    if (to_string(k) == name) return k;
  }
  bad_config("unknown sampler '" + name + "'");
}

void SamplerConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) bad_config("lambda must be positive and finite");
  if (!(zeta >= 0.0 && zeta <= 1.0)) bad_config("zeta must lie in [0, 1]");
  if (!(eta >= 0.0 && eta <= 1.0)) bad_config("eta must lie in [0, 1]");
  if (steps < 1) bad_config("steps must be >= 1");
  if (t_start < 1) bad_config("t_start must be >= 1");
  if (!(sigma_floor > 0.0)) bad_config("sigma floor must be positive");
  if (!(fd_step > 0.0)) bad_config("finite-difference step must be positive");
  if (solver.ibp_iters < 1) bad_config("IBP iterations must be >= 1");
}

// ---------------------------------------------------------------------------

Image forward_diffuse_with(const Image& x0, int t, const NoiseSchedule& s, const Image& eps) {
  require_same_shape(x0.shape(), eps.shape(), "forward_diffuse");
  const double ab = s.alpha_bar(t);
  return axpby(std::sqrt(ab), x0, std::sqrt(1.0 - ab), eps);
}

Image forward_diffuse(const Image& x0, int t, const NoiseSchedule& s, Rng& rng) {
  s.alpha_bar(t);
  return forward_diffuse_with(x0, t, s, rng.normal_image(x0.shape()));
}

Image pseudo_inverse(const Image& y, const DegradationModel& model) {
  if (const auto* inp = std::get_if<InpaintOp>(&model.op)) {
    Image out = y;
    const Mask& m = inp->mask;
    for (int c = 0; c < y.channels(); ++c) {
      double sum = 0.0;
      for (int i = 0; i < y.height(); ++i) {
        for (int j = 0; j < y.width(); ++j) {
          if (m.kept(i, j)) sum += y.at(c, i, j);
        }
      }
      const double mean = sum / static_cast<double>(m.kept_count());
      for (int i = 0; i < y.height(); ++i) {
        for (int j = 0; j < y.width(); ++j) {
          if (!m.kept(i, j)) out.at(c, i, j) = mean;
        }
      }
    }
    return out;
  }
  if (const auto* ds = std::get_if<DownsampleOp>(&model.op)) {
    return bicubic_resize(y, ds->sf, ResizeDirection::kUp);
  }
  return y;
}

Image diffpir_step(const Image& x_t, int t, int t_prev, Denoiser& denoiser,
                   const DegradationModel& model, const Image& y, const NoiseSchedule& s,
                   const SamplerConfig& cfg, Rng& rng, StepRecord* record) {
  if (!(t > t_prev && t_prev >= 0)) {
    throw Error(ErrorCode::kOutOfRange, "diffpir_step needs t > t_prev >= 0");
  }
  const double ab = s.alpha_bar(t);
  const double ab_prev = s.alpha_bar(t_prev);
  const double rho = s.rho(t, cfg.lambda, model.sigma_n, cfg.sigma_floor);

  Image x0 = denoiser.predict_x0(x_t, t, s);
  Image x0_hat = prox::solve(y, model, x0, rho, cfg.solver);
  if (record != nullptr) {
    record->t = t;
    record->x_t = x_t;
    record->x0 = std::move(x0);
    record->x0_hat = x0_hat;
    record->residual = residual_norm(y, model, x0_hat);
  }
  if (t_prev == 0) return x0_hat;

  const double inv = 1.0 / std::sqrt(1.0 - ab);
  const Image eps_hat = axpby(inv, x_t, -std::sqrt(ab) * inv, x0_hat);
  const double a = std::sqrt(ab_prev);
  const double b = std::sqrt(1.0 - ab_prev);
  if (cfg.zeta == 0.0) return axpby(a, x0_hat, b, eps_hat);
  const Image eps = rng.normal_image(x_t.shape());
  return axpbypcz(a, x0_hat, b * std::sqrt(1.0 - cfg.zeta), eps_hat, b * std::sqrt(cfg.zeta),
                  eps);
}

Image ddpm_reverse_mean(const Image& x_t, const Image& eps_theta, int t, const NoiseSchedule& s) {
  const double inv = 1.0 / std::sqrt(s.alpha(t));
  return axpby(inv, x_t, -inv * s.beta(t) / std::sqrt(1.0 - s.alpha_bar(t)), eps_theta);
}

Image ddpm_reverse_step(const Image& x_t, int t, Denoiser& denoiser, const NoiseSchedule& s,
                        Rng& rng) {
  if (t < 1) throw Error(ErrorCode::kOutOfRange, "ddpm_reverse_step needs t >= 1");
  const Image mean = ddpm_reverse_mean(x_t, predict_eps(denoiser, x_t, t, s), t, s);
  return axpby(1.0, mean, std::sqrt(s.beta(t)), rng.normal_image(x_t.shape()));
}

double ddim_sigma(const NoiseSchedule& s, int t, int t_prev, double eta) {
  if (!(t > t_prev && t_prev >= 0)) throw Error(ErrorCode::kOutOfRange, "ddim needs t > t_prev >= 0");
  const double ab = s.alpha_bar(t);
  const double ab_prev = s.alpha_bar(t_prev);
  return eta * std::sqrt((1.0 - ab_prev) / (1.0 - ab)) * std::sqrt(1.0 - ab / ab_prev);
}

Image ddim_step(const Image& x_t, int t, int t_prev, Denoiser& denoiser, const NoiseSchedule& s,
                double eta, Rng& rng) {
  const double sigma = ddim_sigma(s, t, t_prev, eta);
  const double ab_prev = s.alpha_bar(t_prev);
  const Image x0 = denoiser.predict_x0(x_t, t, s);
  const Image eps = eps_from_x0(x_t, x0, s.alpha_bar(t));
  const double dir = std::sqrt(std::max(0.0, 1.0 - ab_prev - sigma * sigma));
  if (sigma == 0.0) return axpby(std::sqrt(ab_prev), x0, dir, eps);
  return axpbypcz(std::sqrt(ab_prev), x0, dir, eps, sigma, rng.normal_image(x_t.shape()));
}

Image hqs_prior_step(const Image& x, const Image& score, int t, const NoiseSchedule& s,
                     const Image& noise) {
  const double inv = 1.0 / std::sqrt(s.alpha(t));
  return axpbypcz(inv, x, inv * s.beta(t), score, std::sqrt(s.beta(t)), noise);
}

double dps_step_factor(const NoiseSchedule& s, int t, double lambda, double sigma_n,
                       double sigma_floor) {
  const double sig = s.relative_sigma(t);
  const double sn = std::max(sigma_n, sigma_floor);
  return sig * sig / (2.0 * lambda * sn * sn);
}

Image dps_yt_step(const Image& x_t, int t, Denoiser& denoiser, const DegradationModel& model,
                  const Image& y, const NoiseSchedule& s, const SamplerConfig& cfg, Rng& rng) {
  const Image z = ddpm_reverse_step(x_t, t, denoiser, s, rng);
  const Image y_prev = forward_diffuse(y, t - 1, s, rng);
  const double factor = dps_step_factor(s, t, cfg.lambda, model.sigma_n, cfg.sigma_floor);
  return axpby(1.0, z, -factor, prox::data_gradient(y_prev, model, z));
}

Image dps_y0_gradient(const Image& z, int t, Denoiser& denoiser, const DegradationModel& model,
                      const Image& y, const NoiseSchedule& s, const SamplerConfig& cfg) {
  if (t == 0) return prox::data_gradient(y, model, z);
  const Image x0 = denoiser.predict_x0(z, t, s);
  const Image u = adjoint(model, axpby(1.0, y, -1.0, forward(model, x0)));
  if (auto jtu = denoiser.vjp_x0(z, t, s, u)) return scaled(*jtu, -2.0);
  if (!cfg.finite_difference_vjp) {
    throw Error(ErrorCode::kNonDifferentiableDenoiser,
                denoiser.name() + " denoiser has no Jacobian and finite differences are off");
  }
  const double peak = max_abs(u);
  if (peak == 0.0) return Image(z.shape(), 0.0);
  const double h = cfg.fd_step / peak;
  const Image plus = denoiser.predict_x0(axpby(1.0, z, h, u), t, s);
  const Image minus = denoiser.predict_x0(axpby(1.0, z, -h, u), t, s);
  return axpby(-1.0 / h, plus, 1.0 / h, minus);
}

Image dps_y0_step(const Image& x_t, int t, Denoiser& denoiser, const DegradationModel& model,
                  const Image& y, const NoiseSchedule& s, const SamplerConfig& cfg, Rng& rng) {
  const Image z = ddpm_reverse_step(x_t, t, denoiser, s, rng);
  const double factor = dps_step_factor(s, t, cfg.lambda, model.sigma_n, cfg.sigma_floor);
  return axpby(1.0, z, -factor, dps_y0_gradient(z, t - 1, denoiser, model, y, s, cfg));
}

// ---------------------------------------------------------------------------

namespace {

Image initial_state(const Image& y, const DegradationModel& model, const Shape& shape,
                    const NoiseSchedule& s, int t_start, const SamplerConfig& cfg, Rng& rng) {
  if (t_start == s.n_train()) return rng.normal_image(shape);
  const Image init = cfg.initializer == Initializer::kZeros ? Image(shape, 0.0)
                                                             : pseudo_inverse(y, model);
  require_same_shape(init.shape(), shape, "initializer");
  return forward_diffuse(init, t_start, s, rng);
}

void check_plan(const StepPlan& plan, const NoiseSchedule& s) {
  if (plan.timesteps.empty()) throw Error(ErrorCode::kInvalidRange, "empty step plan");
  if (plan.t_start > s.n_train() || plan.timesteps.front() > plan.t_start) {
    throw Error(ErrorCode::kInvalidRange, "step plan exceeds the schedule");
  }
  for (std::size_t i = 1; i < plan.timesteps.size(); ++i) {
    if (plan.timesteps[i] >= plan.timesteps[i - 1] || plan.timesteps[i] < 1) {
      throw Error(ErrorCode::kInvalidRange, "step plan must be strictly decreasing and >= 1");
    }
  }
}

}  // namespace

SampleResult run_diffpir(const Image& y, const DegradationModel& model, Denoiser& denoiser,
                         const NoiseSchedule& s, const StepPlan& plan, const SamplerConfig& cfg,
                         Rng& rng) {
  check_plan(plan, s);
  const Shape shape = restored_shape(model, y.shape());
  const std::uint64_t nfe0 = denoiser.evaluations();
  SampleResult result;
  result.timesteps = plan.timesteps;
  Image x = initial_state(y, model, shape, s, plan.t_start, cfg, rng);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const int t = plan.timesteps[i];
    const int t_prev = i + 1 < plan.size() ? plan.timesteps[i + 1] : 0;
    StepRecord record;
    x = diffpir_step(x, t, t_prev, denoiser, model, y, s, cfg, rng, &record);
    result.residuals.push_back(record.residual);
    if (cfg.record_trajectory) result.trajectory.records.push_back(std::move(record));
  }
  result.x = std::move(x);
  result.nfe = denoiser.evaluations() - nfe0;
  return result;
}

SampleResult run_ddpm(const Shape& shape, Denoiser& denoiser, const NoiseSchedule& s,
                      int t_start, Rng& rng) {
  const StepPlan plan = full_sequence(s.n_train(), t_start);
  const std::uint64_t nfe0 = denoiser.evaluations();
  SampleResult result;
  result.timesteps = plan.timesteps;
  Image x = rng.normal_image(shape);
  for (int t : plan.timesteps) x = ddpm_reverse_step(x, t, denoiser, s, rng);
  result.x = std::move(x);
  result.nfe = denoiser.evaluations() - nfe0;
  return result;
}

SampleResult run_ddim(const Shape& shape, Denoiser& denoiser, const NoiseSchedule& s,
                      const StepPlan& plan, double eta, Rng& rng) {
  check_plan(plan, s);
  const std::uint64_t nfe0 = denoiser.evaluations();
  SampleResult result;
  result.timesteps = plan.timesteps;
  Image x = rng.normal_image(shape);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const int t_prev = i + 1 < plan.size() ? plan.timesteps[i + 1] : 0;
    x = ddim_step(x, plan.timesteps[i], t_prev, denoiser, s, eta, rng);
  }
  result.x = std::move(x);
  result.nfe = denoiser.evaluations() - nfe0;
  return result;
}

SampleResult run_dps(const Image& y, const DegradationModel& model, Denoiser& denoiser,
                     const NoiseSchedule& s, const SamplerConfig& cfg, Rng& rng) {
  if (cfg.kind != SamplerKind::kDpsY0 && cfg.kind != SamplerKind::kDpsYt) {
    bad_config("run_dps needs a DPS sampler kind");
  }
  const StepPlan plan = full_sequence(s.n_train(), cfg.t_start);
  const Shape shape = restored_shape(model, y.shape());
  const std::uint64_t nfe0 = denoiser.evaluations();
  SampleResult result;
  result.timesteps = plan.timesteps;
  Image x = initial_state(y, model, shape, s, plan.t_start, cfg, rng);
  for (int t : plan.timesteps) {
    x = cfg.kind == SamplerKind::kDpsY0 ? dps_y0_step(x, t, denoiser, model, y, s, cfg, rng)
                                        : dps_yt_step(x, t, denoiser, model, y, s, cfg, rng);
    result.residuals.push_back(residual_norm(y, model, x));
  }
  result.x = std::move(x);
  result.nfe = denoiser.evaluations() - nfe0;
  return result;
}

SampleResult restore(const Image& y, const DegradationModel& model, Denoiser& denoiser,
                     const NoiseSchedule& s, const SamplerConfig& cfg) {
  cfg.validate();
  if (cfg.t_start > s.n_train()) bad_config("t_start exceeds the schedule length");
  Rng rng(cfg.seed);
  const Shape shape = restored_shape(model, y.shape());
  switch (cfg.kind) {
    case SamplerKind::kDiffPir:
      return run_diffpir(y, model, denoiser, s,
                         quadratic_subsequence(s.n_train(), cfg.steps, cfg.t_start), cfg, rng);
    case SamplerKind::kDdim:
      return run_ddim(shape, denoiser, s,
                      quadratic_subsequence(s.n_train(), cfg.steps, cfg.t_start), cfg.eta, rng);
    case SamplerKind::kDdpm:
    case SamplerKind::kDpsY0:
    case SamplerKind::kDpsYt:
      if (cfg.steps != cfg.t_start) {
        bad_config(to_string(cfg.kind) + " visits every timestep; set steps equal to t_start");
      }
      return cfg.kind == SamplerKind::kDdpm ? run_ddpm(shape, denoiser, s, cfg.t_start, rng)
                                            : run_dps(y, model, denoiser, s, cfg, rng);
  }
  bad_config("unknown sampler");
}

}  // namespace diffpir
