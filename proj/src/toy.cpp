// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/toy.hpp"

#include <cmath>
#include <numbers>

#include "diffpir/error.hpp"
#include "diffpir/fft.hpp"

namespace diffpir::toy {

GmmPrior make_prior(const PriorOptions& opts) {
  if (opts.size < 2 || opts.components < 1 || !(opts.variance > 0.0)) {
    throw Error(ErrorCode::kInvalidRange, "invalid toy prior options");
  }
  Rng rng(opts.seed);
  const Shape shape{1, opts.size, opts.size};
  const Kernel2D smooth = gaussian_kernel(5, 1.2);
  std::vector<GmmComponent> comps;
  for (int k = 0; k < opts.components; ++k) {
    Image pattern = circular_convolve(rng.normal_image(shape), smooth);
    double lo = pattern[0], hi = pattern[0];
    for (double v : pattern.data()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (double& v : pattern.data()) v = 0.2 + 0.6 * (v - lo) / (hi - lo);
    comps.push_back({1.0 / opts.components, PriorMean(std::move(pattern)), opts.variance});
  }
  return GmmPrior(std::move(comps));
}

Image sample_prior(const GmmPrior& prior, const Shape& shape, Rng& rng) {
  const double u = rng.uniform();
  const auto& comps = prior.components();
  std::size_t pick = comps.size() - 1;
  double acc = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    acc += comps[k].weight;
    if (u < acc) {
      pick = k;
      break;
    }
  }
  const auto& c = comps[pick];
  c.mean.check(shape);
  Image x(shape);
  const double sd = std::sqrt(c.variance);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = c.mean.at(i) + sd * rng.normal();
  return x;
}

std::string to_string(Task task) { return task == Task::kDeblur ? "deblur" : "noisy-sr"; }

Task parse_task(const std::string& name) {
  if (name == "deblur") return Task::kDeblur;
  if (name == "noisy-sr" || name == "sr") return Task::kNoisySr;
  throw Error(ErrorCode::kInvalidConfig, "unknown toy task '" + name + "'");
}

Problem make_problem(const GmmPrior& prior, int size, Task task, std::uint64_t seed) {
  Rng rng(seed);
  Problem p;
  p.truth = sample_prior(prior, Shape{1, size, size}, rng);
  if (task == Task::kDeblur) {
    p.model = DegradationModel{BlurOp{gaussian_kernel(5, 1.0)}, 0.05};
  } else {
    p.model = DegradationModel{DownsampleOp{2, gaussian_kernel(3, 0.7)}, 0.05};
  }
  p.y = apply(p.model, p.truth, rng);
  return p;
}

double rmse(const Image& a, const Image& b) {
  require_same_shape(a.shape(), b.shape(), "rmse");
  return std::sqrt(squared_distance(a, b) / static_cast<double>(a.size()));
}

}  // namespace diffpir::toy
