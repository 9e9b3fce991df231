// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include "diffpir/rng.hpp"
#include "diffpir/simd/kernels.hpp"

using namespace diffpir;

namespace {

std::vector<const simd::KernelTable*> vector_tables() {
  std::vector<const simd::KernelTable*> out;
  if (const auto* t = simd::avx2_kernels()) out.push_back(t);
  if (const auto* t = simd::neon_kernels()) out.push_back(t);
  return out;
}

std::vector<double> randoms(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Lengths around every vector width and remainder.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 1001};

}  // namespace

TEST_CASE("scalar table is the reference definition") {
  const auto& k = simd::scalar_kernels();
  CHECK(k.isa == simd::Isa::kScalar);
  const double x[] = {1.0, 2.0}, y[] = {3.0, -1.0}, z[] = {0.5, 0.25};
  double out[2];
  k.axpby(2.0, x, 3.0, y, out, 2);
  CHECK(out[0] == 11.0);
  CHECK(out[1] == 1.0);
  k.axpbypcz(1.0, x, 1.0, y, 4.0, z, out, 2);
  CHECK(out[0] == 6.0);
  CHECK(out[1] == 2.0);
  const std::uint8_t m[] = {1, 0};
  k.masked_prox(m, x, y, 1.0, out, 2);
  CHECK(out[0] == 2.0);
  CHECK(out[1] == -1.0);
  CHECK(k.squared_distance(x, y, 2) == 13.0);
}

TEST_CASE("vector variants are bitwise equal on elementwise kernels") {
  Rng rng(31);
  const auto& ref = simd::scalar_kernels();
  for (const auto* t : vector_tables()) {
    CAPTURE(simd::to_string(t->isa));
    for (std::size_t n : kLengths) {
      const auto x = randoms(n, rng), y = randoms(n, rng), z = randoms(n, rng);
      std::vector<double> a(n), b(n);
      ref.axpby(0.3, x.data(), -1.7, y.data(), a.data(), n);
      t->axpby(0.3, x.data(), -1.7, y.data(), b.data(), n);
      CHECK(same_bits(a, b));
      ref.axpbypcz(0.3, x.data(), -1.7, y.data(), 2.9, z.data(), a.data(), n);
      t->axpbypcz(0.3, x.data(), -1.7, y.data(), 2.9, z.data(), b.data(), n);
      CHECK(same_bits(a, b));

      std::vector<std::uint8_t> m(n);
      for (auto& v : m) v = rng.uniform() < 0.5 ? 1 : 0;
      ref.masked_prox(m.data(), x.data(), y.data(), 0.37, a.data(), n);
      t->masked_prox(m.data(), x.data(), y.data(), 0.37, b.data(), n);
      CHECK(same_bits(a, b));

      std::vector<std::complex<double>> k(n), fy(n), fz(n), ca(n), cb(n);
      for (std::size_t i = 0; i < n; ++i) {
        k[i] = {x[i], y[i]};
        fy[i] = {y[i], z[i]};
        fz[i] = {z[i], x[i]};
      }
      ref.spectral_prox(k.data(), fy.data(), fz.data(), 0.21, ca.data(), n);
      t->spectral_prox(k.data(), fy.data(), fz.data(), 0.21, cb.data(), n);
      CHECK(std::memcmp(ca.data(), cb.data(), n * sizeof(std::complex<double>)) == 0);
    }
  }
}

TEST_CASE("vector reductions agree within rounding") {
  Rng rng(32);
  const auto& ref = simd::scalar_kernels();
  for (const auto* t : vector_tables()) {
    for (std::size_t n : kLengths) {
      const auto x = randoms(n, rng), y = randoms(n, rng);
      const double a = ref.squared_distance(x.data(), y.data(), n);
      const double b = t->squared_distance(x.data(), y.data(), n);
      CHECK(std::abs(a - b) <= 1e-13 * std::max(1.0, a));
    }
  }
}

TEST_CASE("force_isa pins the active table") {
  CHECK(simd::force_isa(simd::Isa::kScalar));
  CHECK(simd::active().isa == simd::Isa::kScalar);
  for (const auto* t : vector_tables()) {
    CHECK(simd::force_isa(t->isa));
    CHECK(simd::active().isa == t->isa);
  }
  if (simd::avx2_kernels() == nullptr) CHECK_FALSE(simd::force_isa(simd::Isa::kAvx2));
  if (simd::neon_kernels() == nullptr) CHECK_FALSE(simd::force_isa(simd::Isa::kNeon));
}
