#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sqglab/errors.hpp"
#include "sqglab/measure_lab.hpp"
#include "test_util.hpp"

using namespace sqg;
using std::numbers::pi;

namespace {

std::vector<std::vector<double>> column(const std::vector<double>& v) {
  std::vector<std::vector<double>> rows;
  for (double x : v) rows.push_back({x});
  return rows;
}

std::vector<double> ar1(std::size_t n, double rho, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  double x = 0.0;
  for (auto& y : v) y = x = rho * x + d(gen);
  return v;
}

}  // namespace

TEST_CASE("constant trajectory has zero standard error") {
  std::vector<double> times(200);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = double(i);
  const MomentLedger led = time_average({"c"}, times, column(std::vector<double>(200, 3.5)), 0.0);
  CHECK(led.mean("c") == 3.5);
  CHECK(led.se("c") == 0.0);
  CHECK(led.count() == 200);
}

TEST_CASE("burn-in and too-short windows") {
  std::vector<double> times(100);
  std::vector<double> v(100);
  for (std::size_t i = 0; i < 100; ++i) times[i] = v[i] = double(i);
  const MomentLedger led = time_average({"x"}, times, column(v), 50.0, 1, 5);
  CHECK(led.count() == 50);
  CHECK(led.mean("x") == doctest::Approx(74.5));
  CHECK_THROWS_AS(time_average({"x"}, times, column(v), 95.0, 1, 5), EstimationError);
}

TEST_CASE("merging batches is order-sensitive only through rounding") {
  const auto a = ar1(4000, 0.5, 1), b = ar1(4000, 0.5, 2);
  MomentLedger la({"x"}), lb({"x"});
  la.add_batch(column(a));
  lb.add_batch(column(b));
  MomentLedger ab = la, ba = lb;
  ab.merge(lb);
  ba.merge(la);
  CHECK(ab.count() == 8000);
  CHECK(ab.mean("x") == doctest::Approx(ba.mean("x")).epsilon(1e-14));
}

TEST_CASE("batch-means standard error scales like 1/sqrt(T) and sees correlation") {
  std::vector<double> times(64000);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = double(i);
  const auto v = ar1(times.size(), 0.9, 3);
  const MomentLedger full = time_average({"x"}, times, column(v), 0.0);
  const std::vector<double> quarter(v.begin(), v.begin() + 16000);
  const std::vector<double> tq(times.begin(), times.begin() + 16000);
  const MomentLedger part = time_average({"x"}, tq, column(quarter), 0.0);
  CHECK(part.se("x") / full.se("x") == doctest::Approx(2.0).epsilon(0.35));
  // The AR(1) integrated autocorrelation inflates the variance by (1 + rho)/(1 - rho) = 19.
  const double naive = std::sqrt(full.variance("x") / double(full.count()));
  CHECK(full.se("x") / naive > 3.0);
}

TEST_CASE("linear combinations") {
  MomentLedger led({"a", "b"});
  led.add_batch({{1, 2}, {3, 4}});
  led.add_batch({{5, 6}, {7, 8}});
  const auto est = led.combination({{"a", 2.0}, {"b", -1.0}});
  CHECK(est.mean == doctest::Approx(2.0 * 4.0 - 5.0));
}

TEST_CASE("histogram masses sum to one and uniform samples show no atom") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(20000);
  for (auto& x : s) x = u(gen);
  const AtomReport rep = histogram_atom_check(s, {"u"});
  double total = 0.0;
  for (double m : rep.masses) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(rep.atom);
  CHECK(rep.ratio < 0.5);
  CHECK(rep.edges.size() == rep.masses.size() + 1);
}

TEST_CASE("point masses are flagged as atoms") {
  const AtomReport c = histogram_atom_check(std::vector<double>(2000, 1.0), {"c"});
  CHECK(c.degenerate);
  CHECK(c.atom);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(20000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i % 3 == 0 ? 0.25 : u(gen);
  CHECK(histogram_atom_check(s, {"mix"}).atom);
  CHECK_THROWS_AS(histogram_atom_check(std::vector<double>(10, 1.0), {"few"}), EstimationError);
}

TEST_CASE("explicit histogram edges") {
  const AtomReport rep = histogram_atom_check(std::vector<double>{0.1, 0.2, 0.7, 0.9, 0.95}, {"e", {0.0, 0.5, 1.0}, 1});
  REQUIRE(rep.masses.size() == 2);
  CHECK(rep.masses[0] == doctest::Approx(0.4));
  CHECK(rep.masses[1] == doctest::Approx(0.6));
}

TEST_CASE("casimir gram matrix") {
  const int n = 8;
  const GridSpec g(n);
  const ScalarFunction half_square{"z^2/2", [](const Jet& z) { return 0.5 * (z * z); }};
  const EigenBasis basis = enumerate_basis(4.0);
  std::vector<double> amps(basis.size(), 0.0);
  const auto it = std::find_if(basis.begin(), basis.end(), [](const BasisMode& m) {
    return m.k == WaveVector{1, 0} && m.parity == Parity::kCosine;
  });
  REQUIRE(it != basis.end());
  amps[std::size_t(it - basis.begin())] = 1.0;
  const NoiseSpec spec = explicit_noise(basis, amps);

  const GramResult zero = casimir_gram(SpectralField(n), {half_square}, spec, g);
  CHECK(zero.matrix(0, 0) == 0.0);

  // f'(cos x) = cos x, whose projection on cos x / (pi sqrt 2) is pi sqrt 2
  const GramResult one = casimir_gram(testutil::cos_mode(n, {1, 0}), {half_square}, spec, g);
  CHECK(one.matrix(0, 0) == doctest::Approx(2 * pi * pi).epsilon(1e-13));

  const NoiseSpec full = power_law_noise(-1.0, 16.0);
  const GramResult r = casimir_gram(testutil::random_field(n, 31), casimir_family(3), full, g);
  CHECK((r.matrix - r.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * r.matrix.cwiseAbs().maxCoeff());
  CHECK(r.min_eigenvalue >= -1e-12 * r.matrix.cwiseAbs().maxCoeff());
}

TEST_CASE("diffusive time and monotone growth") {
  const NoiseSpec spec = power_law_noise(-1.0, 16.0);
  CHECK(diffusive_time(0.5, spec) == doctest::Approx(2.0));
  CHECK(monotone_growth({1.0, 2.0, 3.0}, {0.1, 0.1, 0.1}));
  CHECK_FALSE(monotone_growth({1.0, 2.0, 1.5}, {0.1, 0.1, 0.1}));
  CHECK_FALSE(monotone_growth({1.0, 1.1, 1.2}, {0.1, 0.1, 0.1}));
}

TEST_CASE("single-alpha sweep on a small grid") {
  SimConfig cfg;
  cfg.dt = 0.05;
  cfg.cutoff = 8;
  cfg.ensemble_size = 2;
  cfg.seed = 3;
  cfg.initial.kind = InitialCondition::Kind::kZero;
  const NoiseSpec noise = power_law_noise(-1.0, 16.0);
  StationaryOptions opt;
  opt.burn_in_diffusive = 1.0;
  opt.sample_diffusive = 4.0;
  opt.sample_every = 1;
  opt.keep_samples = {};
  const SweepResult res = inviscid_sweep(cfg, noise, {0.5}, opt);
  REQUIRE(res.rows.size() == 1);
  const StationaryResult& row = res.rows[0];
  CHECK(row.failures.empty());
  CHECK(row.sample_time == doctest::Approx(8.0));
  CHECK(std::any_of(row.residuals.begin(), row.residuals.end(),
                    [](const ResidualReport& r) { return r.name == "H1"; }));
  CHECK_THROWS_AS(inviscid_sweep(cfg, noise, {0.1, 0.2}, opt), ConfigError);
}
