#include "sqglab/functionals.hpp"

#include <charconv>
#include <cmath>
#include <optional>

#include "sqglab/errors.hpp"
#include "sqglab/spectral_engine.hpp"

namespace sqg {

double mass_m(const SpectralField& theta) { return 0.5 * l2_sq(theta); }

double energy_minus_half(const SpectralField& theta) { return 0.5 * sobolev_sq(theta, -0.5); }

double h2_dissipation(const SpectralField& theta) { return sobolev_sq(theta, 2.0); }

double w14_dissipation(const SpectralField& theta, const GridSpec& grid) {
  return grad_l4_4(theta, grid);
}

double dissipation_I(const SpectralField& theta, const GridSpec& grid, CubicSign sign) {
  if (theta.cutoff() != grid.cutoff()) throw DimensionError("field/grid cutoff mismatch");
  const double quad = sobolev_sq(theta, 1.5);
  const double cubic = SpectralEngine::for_grid(grid).cubic_pairing(theta);
  return sign == CubicSign::kDerived ? quad + cubic : quad - cubic;
}

double Jet::derivative(int order) const {
  static constexpr double kFact[5] = {1, 1, 2, 6, 24};
  return c[order] * kFact[order];
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  for (int i = 0; i < 5; ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  for (int i = 0; i < 5; ++i) r.c[i] = a.c[i] - b.c[i];
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; i + j < 5; ++j) r.c[i + j] += a.c[i] * b.c[j];
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  // Solve b * r = a term by term.
  Jet r;
  for (int i = 0; i < 5; ++i) {
    double s = a.c[i];
    for (int j = 1; j <= i; ++j) s -= b.c[j] * r.c[i - j];
    r.c[i] = s / b.c[0];
  }
  return r;
}

Jet operator*(double s, const Jet& a) {
  Jet r = a;
  for (double& v : r.c) v *= s;
  return r;
}

Jet exp(const Jet& a) {
  // r' = a' r  =>  n r_n = sum_{k=1}^n k a_k r_{n-k}
  Jet r;
  r.c[0] = std::exp(a.c[0]);
  for (int n = 1; n < 5; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += k * a.c[k] * r.c[n - k];
    r.c[n] = s / n;
  }
  return r;
}

namespace {

// e^{-1/t} for t > 0, 0 otherwise
Jet flat_exp(const Jet& t) {
  if (t.value() <= 0.0) return Jet{};
  return exp(-1.0 * (Jet::constant(1.0) / t));
}

// 0 for t <= 0, 1 for t >= 1
Jet smooth_step(const Jet& t) {
  if (t.value() <= 0.0) return Jet{};
  if (t.value() >= 1.0) return Jet::constant(1.0);
  const Jet a = flat_exp(t);
  const Jet b = flat_exp(Jet::constant(1.0) - t);
  return a / (a + b);
}

}  // namespace

Jet bump(const Jet& z) {
  const double az = std::abs(z.value());
  if (az <= 1.0) return Jet::constant(1.0);
  if (az >= 2.0) return Jet{};
  const Jet abs_z = z.value() < 0.0 ? -1.0 * z : z;
  return smooth_step(Jet::constant(2.0) - abs_z);
}

double bump(double z) { return bump(Jet::constant(z)).value(); }

ScalarFunction monomial(int power) {
  return {"z^" + std::to_string(power), [power](const Jet& z) {
            Jet r = Jet::constant(1.0);
            for (int i = 0; i < power; ++i) r = r * z;
            return r;
          }};
}

std::vector<ScalarFunction> casimir_family(int n) {
  if (n < 1) throw ConfigError("casimir.n", "family size must be >= 1");
  std::vector<ScalarFunction> out;
  for (int k = 1; k <= n; ++k) {
    const ScalarFunction power = monomial(k + 1);
    out.push_back({"casimir_" + std::to_string(k),
                   [power](const Jet& z) { return power.eval(z) * bump(z); }});
  }
  return out;
}

double casimir(const SpectralField& theta, const GridSpec& grid, const ScalarFunction& f) {
  const RealField real = to_physical(theta, grid);
  double acc = 0.0;
  for (double v : real.samples) acc += f(v);
  return acc / static_cast<double>(real.samples.size());
}

// Per-sample cache so composite observables do not recompute transforms.
struct Diagnostics {
  std::optional<double> m, h2, w14, cubic, qv;
  std::optional<RealField> physical;
};

namespace {

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::string_view> suffix_after(std::string_view name, std::string_view prefix) {
  if (name.size() > prefix.size() && name.substr(0, prefix.size()) == prefix) {
    return name.substr(prefix.size());
  }
  return std::nullopt;
}

}  // namespace

bool ObservableSet::is_known(const std::string& name) {
  static const char* kPlain[] = {"M",      "E_mhalf",        "L2_sq",   "H2_diss",
                                 "W14_diss", "I_diss", "I_diss_printed", "noise_qv"};
  for (const char* p : kPlain) {
    if (name == p) return true;
  }
  if (auto s = suffix_after(name, "casimir_")) return parse_int(*s).value_or(0) >= 1;
  if (auto s = suffix_after(name, "Hs_")) return parse_number(*s).has_value();
  if (auto s = suffix_after(name, "Mpow_")) return parse_int(*s).value_or(-1) >= 0;
  if (auto s = suffix_after(name, "Mq_diss_")) return parse_int(*s).value_or(0) >= 1;
  if (auto s = suffix_after(name, "Mq_qv_")) return parse_int(*s).value_or(0) >= 2;
  return false;
}

ObservableSet::ObservableSet(std::vector<std::string> names, const GridSpec& grid,
                             NoiseSpec noise)
    : names_(std::move(names)),
      grid_(grid),
      noise_(std::make_shared<const NoiseSpec>(std::move(noise))) {
  const GridSpec g = grid_;
  std::shared_ptr<const NoiseSpec> spec = noise_;
  auto m = [](const SpectralField& t, Diagnostics& d) {
    if (!d.m) d.m = mass_m(t);
    return *d.m;
  };
  auto h2 = [](const SpectralField& t, Diagnostics& d) {
    if (!d.h2) d.h2 = h2_dissipation(t);
    return *d.h2;
  };
  auto w14 = [g](const SpectralField& t, Diagnostics& d) {
    if (!d.w14) d.w14 = SpectralEngine::for_grid(g).grad_quartic(t);
    return *d.w14;
  };
  auto cubic = [g](const SpectralField& t, Diagnostics& d) {
    if (!d.cubic) d.cubic = SpectralEngine::for_grid(g).cubic_pairing(t);
    return *d.cubic;
  };
  auto qv = [spec](const SpectralField& t, Diagnostics& d) {
    if (!d.qv) d.qv = noise_quadratic_variation(t, *spec);
    return *d.qv;
  };

  for (const std::string& name : names_) {
    if (!is_known(name)) throw ConfigError("observables", "unknown observable '" + name + "'");
    if (name == "M") {
      evaluators_.emplace_back(m);
    } else if (name == "E_mhalf") {
      evaluators_.emplace_back(
          [](const SpectralField& t, Diagnostics&) { return energy_minus_half(t); });
    } else if (name == "L2_sq") {
      evaluators_.emplace_back([m](const SpectralField& t, Diagnostics& d) { return 2.0 * m(t, d); });
    } else if (name == "H2_diss") {
      evaluators_.emplace_back(h2);
    } else if (name == "W14_diss") {
      evaluators_.emplace_back(w14);
    } else if (name == "I_diss" || name == "I_diss_printed") {
      const double sign = name == "I_diss" ? 1.0 : -1.0;
      evaluators_.emplace_back([cubic, sign](const SpectralField& t, Diagnostics& d) {
        return sobolev_sq(t, 1.5) + sign * cubic(t, d);
      });
    } else if (name == "noise_qv") {
      evaluators_.emplace_back(qv);
    } else if (auto s = suffix_after(name, "casimir_")) {
      const ScalarFunction f = casimir_family(*parse_int(*s)).back();
      evaluators_.emplace_back([g, f](const SpectralField& t, Diagnostics& d) {
        if (!d.physical) d.physical = to_physical(t, g);
        double acc = 0.0;
        for (double v : d.physical->samples) acc += f(v);
        return acc / static_cast<double>(d.physical->samples.size());
      });
    } else if (auto s = suffix_after(name, "Hs_")) {
      const double order = *parse_number(*s);
      evaluators_.emplace_back(
          [order](const SpectralField& t, Diagnostics&) { return sobolev_sq(t, order); });
    } else if (auto s = suffix_after(name, "Mpow_")) {
      const int p = *parse_int(*s);
      evaluators_.emplace_back(
          [m, p](const SpectralField& t, Diagnostics& d) { return std::pow(m(t, d), p); });
    } else if (auto s = suffix_after(name, "Mq_diss_")) {
      const int q = *parse_int(*s);
      evaluators_.emplace_back([m, h2, w14, q](const SpectralField& t, Diagnostics& d) {
        return std::pow(m(t, d), q - 1) * (h2(t, d) + w14(t, d));
      });
    } else if (auto s = suffix_after(name, "Mq_qv_")) {
      const int q = *parse_int(*s);
      evaluators_.emplace_back([m, qv, q](const SpectralField& t, Diagnostics& d) {
        return std::pow(m(t, d), q - 2) * qv(t, d);
      });
    }
  }
}

std::vector<double> ObservableSet::evaluate(const SpectralField& theta) const {
  if (theta.cutoff() != grid_.cutoff()) throw DimensionError("observable grid mismatch");
  Diagnostics diag;
  std::vector<double> out;
  out.reserve(evaluators_.size());
  for (const auto& e : evaluators_) out.push_back(e(theta, diag));
  return out;
}

std::ptrdiff_t ObservableSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

}  // namespace sqg
