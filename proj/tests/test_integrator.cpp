#include <cmath>
#include <cstring>

#include "doctest.h"
#include "sqglab/errors.hpp"
#include "sqglab/integrator.hpp"
#include "test_util.hpp"

using namespace sqg;

namespace {

SimConfig linear_config(int n, double alpha, double dt, double horizon) {
  SimConfig cfg;
  cfg.alpha = alpha;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.cutoff = n;
  cfg.enable_advection = false;
  cfg.enable_p_laplacian = false;
  return cfg;
}

bool same_bits(const SpectralField& a, const SpectralField& b) {
  return a.size() == b.size() &&
         std::memcmp(a.coefficients().data(), b.coefficients().data(), a.size() * sizeof(cplx)) == 0;
}

}  // namespace

TEST_CASE("config validation names the offending key") {
  SimConfig cfg;
  cfg.dt = 0.0;
  try {
    validate(cfg);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "sim.dt");
  }
  cfg.dt = 0.1;
  cfg.horizon = 0.25;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.horizon = 0.3;
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("single shell is a fixed point of the deterministic stepper") {
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.horizon = 1.0;
  cfg.cutoff = 8;
  cfg.enable_noise = false;
  cfg.initial.kind = InitialCondition::Kind::kModes;
  cfg.initial.modes = {{{1, 0}, 1.0, 0.0}, {{0, 1}, 0.0, 1.0}};
  StepperState s = initial_state(cfg, 0);
  const SpectralField s0 = s.field;
  Stepper stepper(cfg, NoiseSpec{});
  for (int i = 0; i < 100; ++i) stepper.step(s);
  CHECK(testutil::max_diff(s.field, s0) < 1e-14);
  CHECK(s.field.at(0, 0) == cplx(0.0));
}

TEST_CASE("integrating factor is exact for the bi-Laplacian") {
  const double alpha = 0.3;
  SimConfig cfg = linear_config(8, alpha, 0.01, 1.0);
  cfg.enable_noise = false;
  cfg.initial.kind = InitialCondition::Kind::kModes;
  cfg.initial.modes = {{{2, 0}, 1.0, 0.0}};
  StepperState s = step(initial_state(cfg, 0), cfg, NoiseSpec{});
  Stepper stepper(cfg, NoiseSpec{});
  while (s.step < cfg.steps()) stepper.step(s);
  const SpectralField exact = std::exp(-16.0 * alpha * s.time) * testutil::cos_mode(8, {2, 0});
  CHECK(testutil::max_diff(s.field, exact) <= 1e-10 * testutil::max_abs(exact));
}

TEST_CASE("T = 0 returns only the initial observation") {
  SimConfig cfg = linear_config(8, 0.1, 0.01, 0.0);
  const NoiseSpec noise = power_law_noise(-1.0, 16.0);
  const ObservableSet obs({"M"}, cfg.grid(), noise);
  const TrajectoryRecord rec = run_trajectory(cfg, noise, obs);
  CHECK(rec.times.size() == 1);
  CHECK(rec.times[0] == 0.0);
}

TEST_CASE("stochastic runs are bit-reproducible for a fixed seed") {
  SimConfig cfg;
  cfg.alpha = 0.1;
  cfg.dt = 0.01;
  cfg.horizon = 0.1;
  cfg.cutoff = 12;
  cfg.seed = 42;
  cfg.initial.kind = InitialCondition::Kind::kRandom;
  const NoiseSpec noise = power_law_noise(-1.0, 36.0);
  const ObservableSet obs({"M", "W14_diss"}, cfg.grid(), noise);
  const auto a = run_trajectory(cfg, noise, obs);
  const auto b = run_trajectory(cfg, noise, obs);
  CHECK(same_bits(a.final_state.field, b.final_state.field));
  CHECK(a.values == b.values);
  CHECK(a.final_state.rng == b.final_state.rng);
}

TEST_CASE("noise substeps reproduce the fine Brownian path on the linear subsystem") {
  // Without drift nonlinearity, combined sub-increments must match stepping at dt/k.
  const NoiseSpec noise = power_law_noise(-1.0, 16.0);
  auto final_field = [&](const SimConfig& cfg) {
    StepperState s = initial_state(cfg, 0);
    Stepper st(cfg, noise);
    while (s.step < cfg.steps()) st.step(s);
    return s.field;
  };
  for (int k : {2, 4}) {
    SimConfig coarse = linear_config(8, 0.2, 0.02, 0.2);
    coarse.noise_substeps = k;
    const SimConfig fine = linear_config(8, 0.2, 0.02 / k, 0.2);
    CHECK(testutil::max_diff(final_field(coarse), final_field(fine)) < 1e-13);
  }
}

TEST_CASE("identical seeds give a zero-variance ensemble") {
  SimConfig cfg = linear_config(8, 0.1, 0.01, 0.05);
  cfg.ensemble_size = 4;
  cfg.identical_seeds = true;
  const NoiseSpec noise = power_law_noise(-1.0, 16.0);
  const ObservableSet obs({"L2_sq"}, cfg.grid(), noise);
  const EnsembleStats st = run_ensemble(cfg, noise, obs, 2);
  for (const auto& row : st.se) CHECK(row[0] == 0.0);
}

TEST_CASE("linear subsystem: ensemble mean of int theta^2 follows the OU law") {
  const double alpha = 0.5;
  SimConfig cfg = linear_config(8, alpha, 0.05, 1.0);
  cfg.ensemble_size = 400;
  cfg.observe_every = 20;
  const NoiseSpec noise = power_law_noise(-1.0, 16.0);
  const ObservableSet obs({"L2_sq"}, cfg.grid(), noise);
  const EnsembleStats st = run_ensemble(cfg, noise, obs, 1);
  for (std::size_t i = 1; i < st.times.size(); ++i) {
    const double t = st.times[i];
    double expect = 0.0;
    for (std::size_t j = 0; j < noise.size(); ++j) {
      const double a = noise.amplitudes[j], l = noise.basis[j].lambda;
      expect += a * a / (l * l) * (1.0 - std::exp(-2.0 * alpha * l * l * t)) / 2.0;
    }
    CHECK(std::abs(st.mean[i][0] - expect) <= 3.0 * st.se[i][0]);
  }
}

TEST_CASE("divergence is reported with the last finite snapshot") {
  SimConfig cfg;
  cfg.alpha = 0.0;
  cfg.dt = 5.0;
  cfg.horizon = 500.0;
  cfg.cutoff = 16;
  cfg.enable_noise = false;
  cfg.initial.kind = InitialCondition::Kind::kRandom;
  cfg.initial.rms = 20.0;
  const ObservableSet obs({"M"}, cfg.grid(), NoiseSpec{});
  try {
    run_trajectory(cfg, NoiseSpec{}, obs);
    FAIL("expected divergence");
  } catch (const TrajectoryDivergence& e) {
    CHECK(e.last_finite().field.all_finite());
    CHECK(e.time() > 0.0);
  }
}
