#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "sqglab/errors.hpp"
#include "sqglab/hamiltonian_sandbox.hpp"

using namespace sqg;
using namespace sqg::sandbox;

TEST_CASE("gradients match central differences") {
  for (const char* name : {"quadratic", "quartic", "plateau"}) {
    const HamiltonianSystem sys = make_system(name, 2);
    const Vec x{0.7, -1.1}, y{0.4, 0.9};
    Vec dx, dy;
    sys.grad_H(x, y, dx, dy);
    const double h = 1e-6;
    for (std::size_t i = 0; i < 2; ++i) {
      Vec xp = x, xm = x, yp = y, ym = y;
      xp[i] += h;
      xm[i] -= h;
      yp[i] += h;
      ym[i] -= h;
      CHECK(dx[i] == doctest::Approx((sys.H(xp, y) - sys.H(xm, y)) / (2 * h)).epsilon(1e-7));
      CHECK(dy[i] == doctest::Approx((sys.H(x, yp) - sys.H(x, ym)) / (2 * h)).epsilon(1e-7));
    }
  }
  CHECK_THROWS_AS(make_system("cubic"), ConfigError);
}

TEST_CASE("without dissipation the flow is a rotation") {
  const HamiltonianSystem sys = quadratic(1);
  SandboxConfig cfg;
  cfg.alpha = 0.0;
  cfg.dt = 0.01;
  SandboxState s{0.0, {1.0}, {0.0}, RngStream(0, 0)};
  fd_step(s, sys, cfg);
  CHECK(s.x[0] == 1.0);
  CHECK(s.y[0] == doctest::Approx(0.01));

  cfg.stepper = sandbox::Stepper::kSymplectic;
  s = {0.0, {1.0}, {0.0}, RngStream(0, 0)};
  const int steps = static_cast<int>(std::round(2 * std::numbers::pi / cfg.dt));
  double worst = 0.0;
  for (int i = 0; i < steps; ++i) {
    fd_step(s, sys, cfg);
    worst = std::max(worst, std::abs(sys.H(s.x, s.y) - 0.5));
  }
  CHECK(worst < 1e-4);
  CHECK(std::hypot(s.x[0] - 1.0, s.y[0]) < 1e-2);
}

TEST_CASE("symplectic stepper rejects non-separable systems") {
  SandboxConfig cfg;
  cfg.stepper = sandbox::Stepper::kSymplectic;
  SandboxState s{0.0, {0.5}, {0.5}, RngStream(0, 0)};
  CHECK_THROWS_AS(fd_step(s, plateau(1), cfg), ConfigError);
}

TEST_CASE("Gibbs oracle on the Gaussian") {
  const HamiltonianSystem sys = quadratic(1);
  CHECK(gibbs_oracle(sys, make_observable("one", sys)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gibbs_oracle(sys, make_observable("x1^2", sys)) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(gibbs_oracle(sys, make_observable("y1^2", sys)) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(gibbs_oracle(sys, make_observable("x1y1", sys))) < 1e-10);
  CHECK(gibbs_oracle(sys, make_observable("x1^4", sys)) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("Gibbs oracle on the quartic against adaptive Gauss-Kronrod") {
  using boost::math::quadrature::gauss_kronrod;
  const auto w = [](double x) { return std::exp(-0.25 * x * x * x * x - 0.5 * x * x); };
  const double inf = std::numeric_limits<double>::infinity();
  const double z = gauss_kronrod<double, 31>::integrate(w, -inf, inf, 15, 1e-13);
  const double m2 = gauss_kronrod<double, 31>::integrate(
      [&](double x) { return x * x * w(x); }, -inf, inf, 15, 1e-13);
  const double m4 = gauss_kronrod<double, 31>::integrate(
      [&](double x) { return x * x * x * x * w(x); }, -inf, inf, 15, 1e-13);
  const HamiltonianSystem sys = quartic(1);
  CHECK(gibbs_oracle(sys, make_observable("x1^2", sys)) == doctest::Approx(m2 / z).epsilon(1e-7));
  CHECK(gibbs_oracle(sys, make_observable("y1^4", sys)) == doctest::Approx(m4 / z).epsilon(1e-7));
}

TEST_CASE("plateau measure charges the flat ball") {
  const HamiltonianSystem sys = plateau(1);
  const double in_ball = gibbs_oracle(sys, make_observable("in_ball", sys));
  CHECK(in_ball > 0.0);
  CHECK(in_ball < 1.0);
  CHECK_THROWS_AS(gibbs_oracle(quadratic(4), make_observable("one", quadratic(4))), QuadratureError);
}

TEST_CASE("observable parsing") {
  const HamiltonianSystem sys = quadratic(2);
  CHECK(make_observable("x2y1", sys).f({1, 2}, {3, 4}) == 6.0);
  CHECK(make_observable("y2", sys).f({1, 2}, {3, 4}) == 4.0);
  CHECK_THROWS_AS(make_observable("x3", sys), ConfigError);
  CHECK_THROWS_AS(make_observable("z1", sys), ConfigError);
}

TEST_CASE("stationary comparison is seed deterministic and near the oracle") {
  const HamiltonianSystem sys = quadratic(1);
  SandboxConfig cfg;
  cfg.alpha = 0.5;
  cfg.dt = 0.01;
  cfg.horizon = 400.0;
  cfg.burn_in = 10.0;
  cfg.ensemble_size = 2;
  cfg.seed = 17;
  const auto a = stationary_compare(sys, cfg, {"x1^2", "x1y1"}, 1);
  const auto b = stationary_compare(sys, cfg, {"x1^2", "x1y1"}, 2);
  REQUIRE(a.rows.size() == 2);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].estimate == b.rows[i].estimate);
    CHECK(a.rows[i].se == b.rows[i].se);
    // Euler-Maruyama bias at this dt is O(alpha dt), far below the tolerance.
    CHECK(std::abs(a.rows[i].residual) <= 4.0 * a.rows[i].se + 0.02);
  }
  cfg.burn_in = cfg.horizon;
  CHECK_THROWS_AS(stationary_compare(sys, cfg, {"x1^2"}), ConfigError);
}
