// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "diffpir/image.hpp"
#include "diffpir/schedule.hpp"

namespace diffpir {

/// x0 = (x_t + (1 - alpha_bar) * score) / sqrt(alpha_bar)
Image predict_x0_from_score(const Image& x_t, const Image& score, double alpha_bar);

/// x0 = (x_t - sqrt(1 - alpha_bar) * eps) / sqrt(alpha_bar)
Image predict_x0_from_eps(const Image& x_t, const Image& eps, double alpha_bar);

/// eps = (x_t - sqrt(alpha_bar) * x0) / sqrt(1 - alpha_bar); requires alpha_bar < 1.
Image eps_from_x0(const Image& x_t, const Image& x0, double alpha_bar);

/// Clean-image predictor used by every sampler. Each predict_x0 call counts
/// as one function evaluation.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  Image predict_x0(const Image& x_t, int t, const NoiseSchedule& s);

  /// Marginal score of x_t, when the prior has a closed form.
  virtual std::optional<Image> score(const Image& x_t, int t, const NoiseSchedule& s) const;

  /// J^T v with J the Jacobian of x0(x_t), when available analytically.
  virtual std::optional<Image> vjp_x0(const Image& x_t, int t, const NoiseSchedule& s,
                                      const Image& v) const;

  virtual std::string name() const = 0;

  std::uint64_t evaluations() const { return evaluations_; }
  void reset_evaluations() { evaluations_ = 0; }

 protected:
  virtual Image do_predict_x0(const Image& x_t, int t, const NoiseSchedule& s) = 0;

 private:
  std::uint64_t evaluations_ = 0;
};

/// Per-pixel mean (same shape as the state) or a scalar broadcast to all pixels.
class PriorMean {
 public:
  PriorMean(double scalar = 0.0) : scalar_(scalar) {}  // NOLINT(google-explicit-constructor)
  PriorMean(Image image) : image_(std::move(image)) {}  // NOLINT(google-explicit-constructor)
  bool is_scalar() const { return !image_.has_value(); }
  double at(std::size_t i) const { return image_ ? (*image_)[i] : scalar_; }
  /// Throws ShapeMismatch when a per-pixel mean does not match `s`.
  void check(const Shape& s) const;

 private:
  double scalar_ = 0.0;
  std::optional<Image> image_;
};

/// Isotropic N(mean, variance I) prior on x0.
class GaussianPrior final : public Denoiser {
 public:
  GaussianPrior(PriorMean mean, double variance);

  const PriorMean& mean() const { return mean_; }
  double variance() const { return variance_; }

  std::optional<Image> score(const Image& x_t, int t, const NoiseSchedule& s) const override;
  std::optional<Image> vjp_x0(const Image& x_t, int t, const NoiseSchedule& s,
                              const Image& v) const override;
  std::string name() const override { return "gaussian"; }

  /// log N(x_t; sqrt(ab) mean, (ab var + 1 - ab) I)
  double log_density(const Image& x_t, double alpha_bar) const;

 protected:
  Image do_predict_x0(const Image& x_t, int t, const NoiseSchedule& s) override;

 private:
  PriorMean mean_;
  double variance_;
};

struct GmmComponent {
  double weight = 1.0;
  PriorMean mean;
  double variance = 1.0;
};

/// Mixture of isotropic Gaussians over the whole image vector.
class GmmPrior final : public Denoiser {
 public:
  explicit GmmPrior(std::vector<GmmComponent> components);

  const std::vector<GmmComponent>& components() const { return components_; }

  std::optional<Image> score(const Image& x_t, int t, const NoiseSchedule& s) const override;
  std::optional<Image> vjp_x0(const Image& x_t, int t, const NoiseSchedule& s,
                              const Image& v) const override;
  std::string name() const override { return "gmm"; }

  double log_density(const Image& x_t, double alpha_bar) const;
  /// Posterior component probabilities given x_t, via log-sum-exp.
  std::vector<double> responsibilities(const Image& x_t, double alpha_bar) const;

 protected:
  Image do_predict_x0(const Image& x_t, int t, const NoiseSchedule& s) override;

 private:
  std::vector<double> log_terms(const Image& x_t, double alpha_bar) const;
  Image score_at(const Image& x_t, double alpha_bar) const;

  std::vector<GmmComponent> components_;
};

/// Returns the stored ground truth for every query.
class OracleDenoiser final : public Denoiser {
 public:
  explicit OracleDenoiser(Image truth) : truth_(std::move(truth)) {}
  std::optional<Image> vjp_x0(const Image& x_t, int t, const NoiseSchedule& s,
                              const Image& v) const override;
  std::string name() const override { return "oracle"; }

 protected:
  Image do_predict_x0(const Image& x_t, int t, const NoiseSchedule& s) override;

 private:
  Image truth_;
};

}  // namespace diffpir
