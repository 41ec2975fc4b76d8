#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sqglab/errors.hpp"
#include "sqglab/forcing.hpp"
#include "sqglab/integrator.hpp"
#include "sqglab/spectral_field.hpp"
#include "test_util.hpp"

using namespace sqg;
using std::numbers::pi;

TEST_CASE("grid sizes are padded, transform friendly, and dealias the cubic term") {
  for (int n : {1, 4, 8, 16, 32, 64, 128}) {
    const GridSpec g(n);
    CHECK(g.size() >= 2 * (2 * n + 1));
    CHECK(g.dealiases_cubic());
    int m = g.size();
    for (int p : {2, 3, 5}) {
      while (m % p == 0) m /= p;
    }
    CHECK(m == 1);
  }
  CHECK(GridSpec(64).size() == 288);
  CHECK(GridSpec(128).size() == 576);
}

TEST_CASE("zero field round trip") {
  const GridSpec g(4);
  const SpectralField z(4);
  const RealField r = to_physical(z, g);
  for (double v : r.samples) CHECK(v == 0.0);
  CHECK(l2_sq(to_spectral(r, g)) == 0.0);
}

TEST_CASE("cos x synthesizes to samples of cos and round trips") {
  const GridSpec g(6);
  const SpectralField f = testutil::cos_mode(6, {1, 0});
  const RealField r = to_physical(f, g);
  for (int iy = 0; iy < g.size(); iy += 3) {
    for (int ix = 0; ix < g.size(); ++ix) {
      CHECK(r.at(ix, iy) == doctest::Approx(std::cos(2 * pi * ix / g.size())).epsilon(1e-14));
    }
  }
  CHECK(testutil::max_diff(to_spectral(r, g), f) < 1e-15);
  CHECK(std::abs(r.mean()) < 1e-15);
}

TEST_CASE("Parseval: quadrature of theta^2 matches the spectral sum") {
  const GridSpec g(8);
  const SpectralField f = testutil::random_field(8, 1);
  const RealField r = to_physical(f, g);
  double quad = 0.0;
  for (double v : r.samples) quad += v * v;
  quad *= kTorusArea / static_cast<double>(r.samples.size());
  CHECK(quad == doctest::Approx(l2_sq(f)).epsilon(1e-12));
  CHECK(testutil::max_diff(to_spectral(r, g), f) < 1e-14);
}

TEST_CASE("grid mismatch raises a dimension error") {
  const SpectralField f(8);
  CHECK_THROWS_AS(to_physical(f, GridSpec(4)), DimensionError);
  RealField r{3, std::vector<double>(9)};
  CHECK_THROWS_AS(to_spectral(r, GridSpec(4)), DimensionError);
  CHECK_THROWS_AS(advection_term(f, GridSpec(8, 1)), ConfigError);
}

TEST_CASE("fractional laplacian multipliers") {
  const SpectralField c1 = testutil::cos_mode(4, {1, 0});
  const SpectralField c2 = testutil::cos_mode(4, {2, 0});
  CHECK(testutil::max_diff(fractional_laplacian(c1, 0.5), c1) == 0.0);
  CHECK(testutil::max_diff(fractional_laplacian(c2, 0.5), 2.0 * c2) < 1e-15);
  const SpectralField r = testutil::random_field(8, 2);
  CHECK(testutil::max_diff(fractional_laplacian(fractional_laplacian(r, 0.7), -0.7), r) < 1e-14);
}

TEST_CASE("riesz velocity of single modes") {
  // cos x -> (0, -sin x); sin y -> (-cos y, 0)
  auto [u1, u2] = riesz_velocity(testutil::cos_mode(4, {1, 0}));
  CHECK(l2_sq(u1) == 0.0);
  CHECK(testutil::max_diff(u2, -1.0 * testutil::sin_mode(4, {1, 0})) < 1e-15);
  auto [v1, v2] = riesz_velocity(testutil::sin_mode(4, {0, 1}));
  CHECK(testutil::max_diff(v1, -1.0 * testutil::cos_mode(4, {0, 1})) < 1e-15);
  CHECK(l2_sq(v2) == 0.0);
}

TEST_CASE("riesz velocity is divergence free mode by mode") {
  const SpectralField t = testutil::random_field(16, 3);
  auto [u1, u2] = riesz_velocity(t);
  double worst = 0.0;
  for (int ky = -16; ky <= 16; ++ky) {
    for (int kx = 0; kx <= 16; ++kx) {
      const double mag = std::hypot(kx, ky) * std::abs(t.at(kx, ky));
      if (mag == 0.0) continue;
      worst = std::max(worst, std::abs(double(kx) * u1.at(kx, ky) + double(ky) * u2.at(kx, ky)) / mag);
    }
  }
  CHECK(worst <= 4.0 * std::numeric_limits<double>::epsilon());
  CHECK(u1.is_hermitian());
  CHECK(u2.is_hermitian());
}

TEST_CASE("advection of steady states vanishes") {
  const GridSpec g(8);
  const SpectralField c = testutil::cos_mode(8, {1, 0});
  CHECK(l2_sq(advection_term(c, g)) < 1e-28);
  const SpectralField shell = c + testutil::sin_mode(8, {0, 1});
  CHECK(l2_sq(advection_term(shell, g)) < 1e-28);
}

TEST_CASE("advection of cos x + cos 2y matches the closed form and a 4x oracle") {
  // u = (sin 2y, -sin x), so u.grad theta = sin x sin 2y
  const int n = 8;
  const GridSpec g(n);
  const SpectralField t = testutil::cos_mode(n, {1, 0}) + testutil::cos_mode(n, {0, 2});
  const SpectralField a = advection_term(t, g);
  // sin x sin 2y = (cos(x - 2y) - cos(x + 2y)) / 2
  const SpectralField expect =
      0.5 * testutil::cos_mode(n, {1, -2}) - 0.5 * testutil::cos_mode(n, {1, 2});
  CHECK(testutil::max_diff(a, expect) < 1e-15);

  const SpectralField r = testutil::random_field(n, 4);
  const SpectralField fine = advection_term(project(r, 4 * n), GridSpec(4 * n));
  CHECK(testutil::max_diff(project(fine, n), advection_term(r, g)) < 1e-10 * testutil::max_abs(fine));
}

TEST_CASE("p-laplacian of cos x expands in cosines") {
  const int n = 8;
  const GridSpec g(n);
  CHECK(l2_sq(p_laplacian_term(SpectralField(n), g)) == 0.0);
  const SpectralField c = testutil::cos_mode(n, {1, 0});
  const SpectralField p = p_laplacian_term(c, g);
  const SpectralField expect = -0.75 * c + 0.75 * testutil::cos_mode(n, {3, 0});
  CHECK(testutil::max_diff(p, expect) < 1e-15);
  CHECK(inner(p, c) == doctest::Approx(-1.5 * pi * pi).epsilon(1e-14));
  CHECK(grad_l4_4(c, g) == doctest::Approx(1.5 * pi * pi).epsilon(1e-14));
}

TEST_CASE("norm examples") {
  CHECK(l2_sq(testutil::cos_mode(4, {1, 0})) == doctest::Approx(2 * pi * pi).epsilon(1e-15));
  CHECK(sobolev_sq(testutil::cos_mode(4, {2, 0}), 1.5) == doctest::Approx(16 * pi * pi).epsilon(1e-15));
}

TEST_CASE("operators preserve Hermitian symmetry and the structural identities") {
  const int n = 12;
  const GridSpec g(n);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SpectralField t = testutil::random_field(n, 100 + s);
    const SpectralField a = advection_term(t, g);
    const SpectralField p = p_laplacian_term(t, g);
    CHECK(a.is_hermitian());
    CHECK(p.is_hermitian());
    CHECK(fractional_laplacian(t, 0.3).is_hermitian());
    CHECK(a.at(0, 0) == cplx(0.0));
    CHECK(std::abs(inner(t, a)) <= 1e-12 * l2_sq(t));
    CHECK(std::abs(inner(fractional_laplacian(t, -0.5), a)) <= 1e-12 * l2_sq(t));
    const double w = grad_l4_4(t, g);
    CHECK(std::abs(inner(p, t) + w) <= 1e-10 * w);
  }
}

TEST_CASE("Riesz transform is bounded in L4 on random fields") {
  const int n = 16;
  const GridSpec g(n);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SpectralField t = testutil::random_field(n, 200 + s);
    auto [u1, u2] = riesz_velocity(t);
    const RealField a = to_physical(u1, g), b = to_physical(u2, g), th = to_physical(t, g);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < th.samples.size(); ++i) {
      const double q = a.samples[i] * a.samples[i] + b.samples[i] * b.samples[i];
      num += q * q;
      den += std::pow(th.samples[i], 4);
    }
    worst = std::max(worst, num / den);
  }
  MESSAGE("empirical L4 constant for |u|^4 / theta^4: " << worst);
  CHECK(worst < 10.0);
}
