// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "diffpir/error.hpp"

namespace diffpir {
namespace {

void check_alpha_bar(double alpha_bar) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "alpha_bar must lie in (0, 1]");
  }
}

double dot(const Image& a, const Image& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

Image predict_x0_from_score(const Image& x_t, const Image& score, double alpha_bar) {
  require_same_shape(x_t.shape(), score.shape(), "predict_x0_from_score");
  check_alpha_bar(alpha_bar);
  const double inv = 1.0 / std::sqrt(alpha_bar);
  return axpby(inv, x_t, (1.0 - alpha_bar) * inv, score);
}

Image predict_x0_from_eps(const Image& x_t, const Image& eps, double alpha_bar) {
  require_same_shape(x_t.shape(), eps.shape(), "predict_x0_from_eps");
  check_alpha_bar(alpha_bar);
  const double inv = 1.0 / std::sqrt(alpha_bar);
  return axpby(inv, x_t, -std::sqrt(1.0 - alpha_bar) * inv, eps);
}

Image eps_from_x0(const Image& x_t, const Image& x0, double alpha_bar) {
  require_same_shape(x_t.shape(), x0.shape(), "eps_from_x0");
  check_alpha_bar(alpha_bar);
  if (alpha_bar >= 1.0) throw Error(ErrorCode::kOutOfRange, "eps undefined at alpha_bar == 1");
  const double inv = 1.0 / std::sqrt(1.0 - alpha_bar);
  return axpby(inv, x_t, -std::sqrt(alpha_bar) * inv, x0);
}

// ---------------------------------------------------------------------------

Image Denoiser::predict_x0(const Image& x_t, int t, const NoiseSchedule& s) {
  ++evaluations_;
  Image out = do_predict_x0(x_t, t, s);
  require_same_shape(x_t.shape(), out.shape(), "denoiser output");
  if (!all_finite(out)) {
    throw Error(ErrorCode::kNumericalInstability, name() + " denoiser produced non-finite values");
  }
  return out;
}

std::optional<Image> Denoiser::score(const Image&, int, const NoiseSchedule&) const {
  return std::nullopt;
}

std::optional<Image> Denoiser::vjp_x0(const Image&, int, const NoiseSchedule&,
                                      const Image&) const {
  return std::nullopt;
}

void PriorMean::check(const Shape& s) const {
  if (image_ && image_->shape() != s) {
    throw Error(ErrorCode::kShapeMismatch,
                "prior mean " + to_string(image_->shape()) + " vs state " + to_string(s));
  }
}

// ---------------------------------------------------------------------------
// Gaussian

GaussianPrior::GaussianPrior(PriorMean mean, double variance)
    : mean_(std::move(mean)), variance_(variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw Error(ErrorCode::kInvalidRange, "Gaussian prior variance must be positive");
  }
}

std::optional<Image> GaussianPrior::score(const Image& x_t, int t, const NoiseSchedule& s) const {
  mean_.check(x_t.shape());
  const double ab = s.alpha_bar(t);
  const double sab = std::sqrt(ab);
  const double var = ab * variance_ + (1.0 - ab);
  Image out(x_t.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -(x_t[i] - sab * mean_.at(i)) / var;
  return out;
}

std::optional<Image> GaussianPrior::vjp_x0(const Image& x_t, int t, const NoiseSchedule& s,
                                           const Image& v) const {
  require_same_shape(x_t.shape(), v.shape(), "GaussianPrior::vjp_x0");
  const double ab = s.alpha_bar(t);
  const double var = ab * variance_ + (1.0 - ab);
  return scaled(v, std::sqrt(ab) * variance_ / var);
}

double GaussianPrior::log_density(const Image& x_t, double alpha_bar) const {
  mean_.check(x_t.shape());
  const double sab = std::sqrt(alpha_bar);
  const double var = alpha_bar * variance_ + (1.0 - alpha_bar);
  double q = 0.0;
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    const double d = x_t[i] - sab * mean_.at(i);
    q += d * d;
  }
  const double n = static_cast<double>(x_t.size());
  return -0.5 * q / var - 0.5 * n * std::log(2.0 * std::numbers::pi * var);
}

Image GaussianPrior::do_predict_x0(const Image& x_t, int t, const NoiseSchedule& s) {
  return predict_x0_from_score(x_t, *score(x_t, t, s), s.alpha_bar(t));
}

// ---------------------------------------------------------------------------
// Mixture

GmmPrior::GmmPrior(std::vector<GmmComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorCode::kInvalidRange, "GMM needs a component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0)) throw Error(ErrorCode::kInvalidRange, "GMM weights must be positive");
    if (!(c.variance > 0.0)) {
      throw Error(ErrorCode::kInvalidRange, "GMM variances must be positive");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidRange, "GMM weights must sum to 1");
  }
}

std::vector<double> GmmPrior::log_terms(const Image& x_t, double alpha_bar) const {
  const double sab = std::sqrt(alpha_bar);
  const double n = static_cast<double>(x_t.size());
  std::vector<double> out;
  out.reserve(components_.size());
  for (const auto& c : components_) {
    c.mean.check(x_t.shape());
    const double var = alpha_bar * c.variance + (1.0 - alpha_bar);
    double q = 0.0;
    for (std::size_t i = 0; i < x_t.size(); ++i) {
      const double d = x_t[i] - sab * c.mean.at(i);
      q += d * d;
    }
    out.push_back(std::log(c.weight) - 0.5 * q / var -
                  0.5 * n * std::log(2.0 * std::numbers::pi * var));
  }
  return out;
}

std::vector<double> GmmPrior::responsibilities(const Image& x_t, double alpha_bar) const {
  std::vector<double> l = log_terms(x_t, alpha_bar);
  const double m = *std::max_element(l.begin(), l.end());
  double z = 0.0;
  for (double& v : l) z += (v = std::exp(v - m));
  for (double& v : l) v /= z;
  return l;
}

double GmmPrior::log_density(const Image& x_t, double alpha_bar) const {
  const std::vector<double> l = log_terms(x_t, alpha_bar);
  const double m = *std::max_element(l.begin(), l.end());
  double z = 0.0;
  for (double v : l) z += std::exp(v - m);
  return m + std::log(z);
}

Image GmmPrior::score_at(const Image& x_t, double alpha_bar) const {
  const std::vector<double> r = responsibilities(x_t, alpha_bar);
  const double sab = std::sqrt(alpha_bar);
  Image out(x_t.shape());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    const double var = alpha_bar * c.variance + (1.0 - alpha_bar);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double sk = -(x_t[i] - sab * c.mean.at(i)) / var;
      out[i] = k == 0 ? r[k] * sk : out[i] + r[k] * sk;
    }
  }
  return out;
}

std::optional<Image> GmmPrior::score(const Image& x_t, int t, const NoiseSchedule& s) const {
  return score_at(x_t, s.alpha_bar(t));
}

std::optional<Image> GmmPrior::vjp_x0(const Image& x_t, int t, const NoiseSchedule& s,
                                      const Image& v) const {
  require_same_shape(x_t.shape(), v.shape(), "GmmPrior::vjp_x0");
  const double ab = s.alpha_bar(t);
  const double sab = std::sqrt(ab);
  const std::vector<double> r = responsibilities(x_t, ab);
  const Image sbar = score_at(x_t, ab);
  // Hessian of log p: sum r_k (-I / var_k + s_k s_k^T) - sbar sbar^T, symmetric.
  Image hv = scaled(sbar, -dot(sbar, v));
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    const double var = ab * c.variance + (1.0 - ab);
    Image sk(x_t.shape());
    for (std::size_t i = 0; i < sk.size(); ++i) sk[i] = -(x_t[i] - sab * c.mean.at(i)) / var;
    const double skv = dot(sk, v);
    for (std::size_t i = 0; i < hv.size(); ++i) hv[i] += r[k] * (sk[i] * skv - v[i] / var);
  }
  const double inv = 1.0 / sab;
  return axpby(inv, v, (1.0 - ab) * inv, hv);
}

Image GmmPrior::do_predict_x0(const Image& x_t, int t, const NoiseSchedule& s) {
  const double ab = s.alpha_bar(t);
  return predict_x0_from_score(x_t, score_at(x_t, ab), ab);
}

// ---------------------------------------------------------------------------

std::optional<Image> OracleDenoiser::vjp_x0(const Image& x_t, int, const NoiseSchedule&,
                                            const Image& v) const {
  require_same_shape(x_t.shape(), v.shape(), "OracleDenoiser::vjp_x0");
  return Image(v.shape(), 0.0);
}

Image OracleDenoiser::do_predict_x0(const Image& x_t, int, const NoiseSchedule&) {
  require_same_shape(x_t.shape(), truth_.shape(), "oracle denoiser");
  return truth_;
}

}  // namespace diffpir
