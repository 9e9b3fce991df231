// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffpir/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "diffpir/error.hpp"

namespace diffpir {
namespace {

// FFTW planning is not thread-safe but executing an existing plan on new
// arrays is, so plans are created once per (h, w, sign) under a lock and kept
// for the life of the process.
class PlanCache {
 public:
  fftw_plan get(int h, int w, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_tuple(h, w, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    fftw_complex* scratch = fftw_alloc_complex(static_cast<std::size_t>(h) * w);
    fftw_plan p = fftw_plan_dft_2d(h, w, scratch, scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (p == nullptr) throw Error(ErrorCode::kNumericalInstability, "FFTW planning failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plans() {
  static PlanCache* cache = new PlanCache();  // leaked on purpose: plans outlive statics
  return *cache;
}

void transform_inplace(ComplexField& f, int sign) {
  const Shape& s = f.shape;
  if (s.height < 1 || s.width < 1) {
    throw Error(ErrorCode::kInvalidRange, "FFT needs height, width >= 1");
  }
  fftw_plan p = plans().get(s.height, s.width, sign);
  for (int c = 0; c < s.channels; ++c) {
    auto* buf = reinterpret_cast<fftw_complex*>(f.channel(c).data());
    fftw_execute_dft(p, buf, buf);
  }
}

}  // namespace

ComplexField fft2(const Image& x) {
  ComplexField f(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) f.data[i] = {x[i], 0.0};
  transform_inplace(f, FFTW_FORWARD);
  return f;
}

ComplexField fft2(const ComplexField& x) {
  ComplexField f(x);
  transform_inplace(f, FFTW_FORWARD);
  return f;
}

ComplexField ifft2(const ComplexField& spectrum) {
  ComplexField f(spectrum);
  transform_inplace(f, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(f.shape.plane());
  for (auto& v : f.data) v *= scale;
  return f;
}

Image ifft2_real(const ComplexField& spectrum, double* imag_ratio) {
  ComplexField f = ifft2(spectrum);
  Image out(f.shape);
  double re2 = 0.0, im2 = 0.0;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    out[i] = f.data[i].real();
    re2 += f.data[i].real() * f.data[i].real();
    im2 += f.data[i].imag() * f.data[i].imag();
  }
  if (imag_ratio != nullptr) {
    *imag_ratio = re2 > 0.0 ? std::sqrt(im2 / re2) : (im2 > 0.0 ? INFINITY : 0.0);
  }
  return out;
}

ComplexField kernel_otf(const Kernel2D& k, int height, int width) {
  if (k.height() > height || k.width() > width) {
    throw Error(ErrorCode::kKernelTooLarge, "kernel " + std::to_string(k.height()) + "x" +
                                                std::to_string(k.width()) + " exceeds image " +
                                                std::to_string(height) + "x" +
                                                std::to_string(width));
  }
  ComplexField f(Shape{1, height, width});
  const int cy = k.height() / 2;
  const int cx = k.width() / 2;
  for (int y = 0; y < k.height(); ++y) {
    const int ty = ((y - cy) % height + height) % height;
    for (int x = 0; x < k.width(); ++x) {
      const int tx = ((x - cx) % width + width) % width;
      f.data[static_cast<std::size_t>(ty) * width + tx] += k.at(y, x);
    }
  }
  return fft2(f);
}

namespace {

Image filter_with_otf(const Image& x, const Kernel2D& k, bool conjugate) {
  const ComplexField otf = kernel_otf(k, x.height(), x.width());
  ComplexField fx = fft2(x);
  for (int c = 0; c < x.channels(); ++c) {
    auto ch = fx.channel(c);
    for (std::size_t i = 0; i < ch.size(); ++i) {
      ch[i] *= conjugate ? std::conj(otf.data[i]) : otf.data[i];
    }
  }
  return ifft2_real(fx);
}

}  // namespace

Image circular_convolve(const Image& x, const Kernel2D& k) { return filter_with_otf(x, k, false); }

Image circular_correlate(const Image& x, const Kernel2D& k) { return filter_with_otf(x, k, true); }

}  // namespace diffpir
