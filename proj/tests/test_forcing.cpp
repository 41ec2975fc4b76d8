#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "sqglab/forcing.hpp"
#include "sqglab/spectral_field.hpp"

using namespace sqg;
using std::numbers::pi;

TEST_CASE("Philox-4x32-10 known answers") {
  // Reference vectors from the Random123 distribution (kat_vectors).
  auto r = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(r == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  r = philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  CHECK(r == std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  r = philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  CHECK(r == std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("basis enumeration: first shells") {
  const EigenBasis b1 = enumerate_basis(1.0);
  REQUIRE(b1.size() == 4);
  for (const auto& m : b1) CHECK(m.lambda == 1.0);
  const EigenBasis b2 = enumerate_basis(2.0);
  REQUIRE(b2.size() == 8);
  CHECK(std::count_if(b2.begin(), b2.end(), [](const BasisMode& m) { return m.lambda == 2.0; }) == 4);
  for (std::size_t i = 1; i < b2.size(); ++i) CHECK(b2[i - 1].lambda <= b2[i].lambda);
  // Re-enumeration is identical.
  const EigenBasis again = enumerate_basis(2.0);
  for (std::size_t i = 0; i < b2.size(); ++i) {
    CHECK(again[i].k == b2[i].k);
    CHECK(again[i].parity == b2[i].parity);
  }
}

TEST_CASE("basis functions have unit norm and zero mean by quadrature") {
  const GridSpec g(6);
  for (const auto& m : enumerate_basis(9.0)) {
    CHECK(m.normalization == doctest::Approx(1.0 / (pi * std::numbers::sqrt2)));
    SpectralField f(6);
    add_basis_mode(f, m, 1.0);
    const RealField r = to_physical(f, g);
    double q = 0.0;
    for (double v : r.samples) q += v * v;
    q *= kTorusArea / static_cast<double>(r.samples.size());
    CHECK(q == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(r.mean()) < 1e-15);
    CHECK(project_onto(f, m) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("spectral sums") {
  const NoiseSpec shell1 = explicit_noise(enumerate_basis(1.0), {1, 1, 1, 1});
  CHECK(spectral_sum(shell1, 0.0) == 4.0);
  CHECK(spectral_sum(shell1, -0.5) == 4.0);
  const NoiseSpec two = explicit_noise(enumerate_basis(2.0), std::vector<double>(8, 1.0));
  CHECK(spectral_sum(two, -0.5) == doctest::Approx(4.0 + 4.0 / std::sqrt(2.0)));
  const NoiseSpec zero = explicit_noise(enumerate_basis(2.0), std::vector<double>(8, 0.0));
  CHECK(spectral_sum(zero, 0.0) == 0.0);
  CHECK(spectral_sum(zero, -3.0) == 0.0);
  CHECK(zero.is_zero());
}

TEST_CASE("default experiment noise at N = 64") {
  const NoiseSpec spec = power_law_noise(-1.0, 32.0 * 32.0);
  CHECK(spec.size() == 3208);
  CHECK(spectral_sum(spec, 0.0) == doctest::Approx(6.023736).epsilon(1e-6));
  CHECK(spectral_sum(spec, -0.5) == doctest::Approx(5.090194).epsilon(1e-6));
  CHECK(spec.max_wavenumber() == 32);
  CHECK(spec.min_forced_lambda() == 1.0);
}

TEST_CASE("increments: degenerate step and determinism") {
  const NoiseSpec spec = power_law_noise(-1.0, 16.0);
  RngStream a(5, 3), b(5, 3);
  const SpectralField z = sample_increment(spec, 0.0, a, 8);
  CHECK(l2_sq(z) == 0.0);
  const SpectralField x = sample_increment(spec, 0.1, a, 8);
  b = RngStream(5, 3, a.counter() - (spec.size() + 1) / 2);
  const SpectralField y = sample_increment(spec, 0.1, b, 8);
  CHECK(std::memcmp(x.coefficients().data(), y.coefficients().data(), x.size() * sizeof(cplx)) == 0);
  CHECK(x.is_hermitian());
}

TEST_CASE("increments: mean square norm, zero mean, stream independence") {
  const NoiseSpec spec = power_law_noise(-1.0, 8.0);
  const double dt = 0.01;
  const int draws = 10000;
  RngStream r1(9, 0), r2(9, 1);
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> mean(spec.size(), 0.0);
  double cross = 0.0, cross_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const SpectralField f = sample_increment(spec, dt, r1, 4);
    const SpectralField g = sample_increment(spec, dt, r2, 4);
    const double q = l2_sq(f);
    sum += q;
    sum_sq += q * q;
    for (std::size_t j = 0; j < spec.size(); ++j) mean[j] += project_onto(f, spec.basis[j]);
    const double c = project_onto(f, spec.basis[0]) * project_onto(g, spec.basis[0]);
    cross += c;
    cross_sq += c * c;
  }
  const double m = sum / draws;
  const double se = std::sqrt((sum_sq / draws - m * m) / draws);
  CHECK(std::abs(m - dt * spectral_sum(spec, 0.0)) <= 3.0 * se);
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double sd = spec.amplitudes[j] * std::sqrt(dt);
    CHECK(std::abs(mean[j] / draws) <= 3.0 * sd / std::sqrt(double(draws)));
  }
  const double cm = cross / draws;
  CHECK(std::abs(cm) <= 3.0 * std::sqrt((cross_sq / draws - cm * cm) / draws));
}
