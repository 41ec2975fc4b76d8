#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sqglab/balance.hpp"
#include "sqglab/functionals.hpp"
#include "sqglab/integrator.hpp"
#include "test_util.hpp"

using namespace sqg;
using std::numbers::pi;

TEST_CASE("quadratic functionals of single modes") {
  const int n = 8;
  const GridSpec g(n);
  const SpectralField c1 = testutil::cos_mode(n, {1, 0});
  CHECK(mass_m(c1) == doctest::Approx(pi * pi).epsilon(1e-15));
  CHECK(energy_minus_half(c1) == doctest::Approx(pi * pi).epsilon(1e-15));
  const SpectralField c2 = testutil::cos_mode(n, {2, 0});
  CHECK(energy_minus_half(c2) == doctest::Approx(pi * pi / 2).epsilon(1e-15));
  CHECK(h2_dissipation(c2) == doctest::Approx(32 * pi * pi).epsilon(1e-15));
  CHECK(w14_dissipation(c1, g) == doctest::Approx(1.5 * pi * pi).epsilon(1e-14));
  CHECK(mass_m(SpectralField(n)) == 0.0);
}

TEST_CASE("dissipation I for cos x under both cubic signs") {
  const int n = 8;
  const GridSpec g(n);
  const SpectralField c = testutil::cos_mode(n, {1, 0});
  // int |(-Delta)^{3/4} cos x|^2 = 2 pi^2, cubic pairing = int sin^4 x = 3 pi^2 / 2
  CHECK(dissipation_I(c, g) == doctest::Approx(3.5 * pi * pi).epsilon(1e-14));
  CHECK(dissipation_I(c, g, CubicSign::kPrinted) == doctest::Approx(0.5 * pi * pi).epsilon(1e-14));
}

TEST_CASE("casimir family values and support") {
  const auto fam = casimir_family(3);
  REQUIRE(fam.size() == 3);
  CHECK(fam[1](0.5) == doctest::Approx(0.125));
  for (const auto& f : fam) {
    CHECK(f(3.0) == 0.0);
    CHECK(f(-3.0) == 0.0);
    CHECK(f.derivative(3.0, 2) == 0.0);
  }
  CHECK(bump(0.9) == 1.0);
  CHECK(bump(2.0) == 0.0);
  CHECK(bump(1.5) > 0.0);
  CHECK(bump(1.5) < 1.0);
  CHECK_THROWS(casimir_family(0));
}

TEST_CASE("jet derivatives agree with finite differences") {
  const auto f = casimir_family(2)[1];
  for (double z : {0.3, 1.2, -1.7}) {
    const double h = 1e-5;
    const double fd = (f(z + h) - f(z - h)) / (2 * h);
    CHECK(f.derivative(z, 1) == doctest::Approx(fd).epsilon(1e-7));
    const double fd2 = (f.derivative(z + h, 1) - f.derivative(z - h, 1)) / (2 * h);
    CHECK(f.derivative(z, 2) == doctest::Approx(fd2).epsilon(1e-6));
  }
}

TEST_CASE("casimir quadrature of z^2 is the mean square") {
  const int n = 6;
  const GridSpec g(n);
  const SpectralField c = 0.5 * testutil::cos_mode(n, {1, 0});
  // mean of (cos x / 2)^2 * B = 1/8 since |theta| <= 1
  CHECK(casimir(c, g, casimir_family(1)[0]) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("homogeneity: M and W14 scale with degree 2 and 4") {
  const int n = 8;
  const GridSpec g(n);
  const SpectralField t = testutil::random_field(n, 21);
  for (double s : {0.5, 2.0, 3.0}) {
    const SpectralField u = s * t;
    CHECK(mass_m(u) == doctest::Approx(s * s * mass_m(t)).epsilon(1e-13));
    CHECK(energy_minus_half(u) == doctest::Approx(s * s * energy_minus_half(t)).epsilon(1e-13));
    CHECK(w14_dissipation(u, g) == doctest::Approx(std::pow(s, 4) * w14_dissipation(t, g)).epsilon(1e-12));
  }
}

TEST_CASE("observable set names and validation") {
  CHECK(ObservableSet::is_known("M"));
  CHECK(ObservableSet::is_known("casimir_2"));
  CHECK(ObservableSet::is_known("Hs_-0.5"));
  CHECK(ObservableSet::is_known("Mq_diss_2"));
  CHECK_FALSE(ObservableSet::is_known("casimir_0"));
  CHECK_FALSE(ObservableSet::is_known("energy"));
  const int n = 8;
  const NoiseSpec noise = power_law_noise(-1.0, 16.0);
  const ObservableSet set({"M", "L2_sq", "Mpow_2", "Hs_-0.5"}, GridSpec(n), noise);
  const SpectralField c = testutil::cos_mode(n, {1, 0});
  const auto v = set.evaluate(c);
  CHECK(v[0] == doctest::Approx(pi * pi));
  CHECK(v[1] == doctest::Approx(2 * pi * pi));
  CHECK(v[2] == doctest::Approx(pi * pi * pi * pi));
  CHECK(v[3] == doctest::Approx(energy_minus_half(c) * 2));
  CHECK(set.index_of("L2_sq") == 1);
  CHECK(set.index_of("nope") == -1);
}

TEST_CASE("cumulative trapezoid") {
  const auto out = cumulative_trapezoid({0, 1, 2, 3}, {0, 1, 2, 3});
  REQUIRE(out.size() == 4);
  CHECK(out[0] == 0.0);
  CHECK(out[3] == doctest::Approx(4.5));
}

TEST_CASE("without forcing or dissipation the balance identities reduce to conservation") {
  SimConfig cfg;
  cfg.alpha = 0.0;
  cfg.dt = 1e-3;
  cfg.horizon = 0.05;
  cfg.cutoff = 16;
  cfg.enable_noise = false;
  cfg.ensemble_size = 2;
  cfg.initial.kind = InitialCondition::Kind::kRandom;
  const NoiseSpec none;
  std::vector<std::string> names = balance_observables(BalanceIdentity::kAlp);
  for (const auto& s : balance_observables(BalanceIdentity::kHmj)) names.push_back(s);
  const ObservableSet obs(names, cfg.grid(), none);
  const EnsembleStats st = run_ensemble(cfg, none, obs, 1);
  const BalanceReport alp = ito_residual(BalanceIdentity::kAlp, st, none, 0.0);
  const BalanceReport hmj = ito_residual(BalanceIdentity::kHmj, st, none, 0.0);
  CHECK(std::abs(alp.residual) <= 1e-9 * std::abs(alp.rhs));
  CHECK(std::abs(hmj.residual) <= 1e-9 * std::abs(hmj.rhs));
}

TEST_CASE("forced system satisfies the L2 balance to Monte Carlo accuracy") {
  SimConfig cfg;
  cfg.alpha = 0.3;
  cfg.dt = 5e-3;
  cfg.horizon = 0.5;
  cfg.cutoff = 8;
  cfg.ensemble_size = 200;
  cfg.initial.kind = InitialCondition::Kind::kZero;
  const NoiseSpec noise = power_law_noise(-1.0, 16.0);
  const ObservableSet obs(balance_observables(BalanceIdentity::kAlp), cfg.grid(), noise);
  const EnsembleStats st = run_ensemble(cfg, noise, obs, 1);
  const BalanceReport r = ito_residual(BalanceIdentity::kAlp, st, noise, cfg.alpha);
  CHECK(r.identity == "alp");
  CHECK(std::abs(r.residual) <= 3.0 * r.monte_carlo_se + 0.02 * std::abs(r.rhs));
}
