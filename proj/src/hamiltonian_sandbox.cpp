#include "sqglab/hamiltonian_sandbox.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "sqglab/errors.hpp"
#include "sqglab/integrator.hpp"

namespace sqg::sandbox {

namespace {

double norm_sq(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (double v : x) s += v * v;
  for (double v : y) s += v * v;
  return s;
}

}  // namespace

HamiltonianSystem quadratic(int n) {
  HamiltonianSystem s;
  s.name = "quadratic";
  s.n = n;
  s.H = [](const Vec& x, const Vec& y) { return 0.5 * norm_sq(x, y); };
  s.grad_H = [](const Vec& x, const Vec& y, Vec& dx, Vec& dy) {
    dx = x;
    dy = y;
  };
  s.radial_lower_bound = [](double r) { return 0.5 * r * r; };
  s.separable = true;
  return s;
}

HamiltonianSystem quartic(int n) {
  HamiltonianSystem s;
  s.name = "quartic";
  s.n = n;
  s.H = [](const Vec& x, const Vec& y) {
    double h = 0.0;
    for (const Vec* v : {&x, &y}) {
      for (double c : *v) h += 0.25 * c * c * c * c + 0.5 * c * c;
    }
    return h;
  };
  s.grad_H = [](const Vec& x, const Vec& y, Vec& dx, Vec& dy) {
    dx.resize(x.size());
    dy.resize(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] * x[i] * x[i] + x[i];
    for (std::size_t i = 0; i < y.size(); ++i) dy[i] = y[i] * y[i] * y[i] + y[i];
  };
  // sum z_i^4 >= |z|^4 / (2n)
  s.radial_lower_bound = [n](double r) { return r * r * r * r / (8.0 * n) + 0.5 * r * r; };
  s.separable = true;
  return s;
}

HamiltonianSystem plateau(int n) {
  HamiltonianSystem s;
  s.name = "plateau";
  s.n = n;
  s.H = [](const Vec& x, const Vec& y) {
    const double e = std::max(0.0, norm_sq(x, y) - 1.0);
    return e * e;
  };
  s.grad_H = [](const Vec& x, const Vec& y, Vec& dx, Vec& dy) {
    const double c = 4.0 * std::max(0.0, norm_sq(x, y) - 1.0);
    dx.resize(x.size());
    dy.resize(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = c * x[i];
    for (std::size_t i = 0; i < y.size(); ++i) dy[i] = c * y[i];
  };
  s.radial_lower_bound = [](double r) {
    const double e = std::max(0.0, r * r - 1.0);
    return e * e;
  };
  s.separable = false;
  return s;
}

HamiltonianSystem make_system(const std::string& name, int n) {
  if (n < 1) throw ConfigError("sandbox.n", "n must be >= 1");
  if (name == "quadratic") return quadratic(n);
  if (name == "quartic") return quartic(n);
  if (name == "plateau") return plateau(n);
  throw ConfigError("sandbox.system", "unknown system '" + name + "'");
}

void validate(const SandboxConfig& cfg) {
  if (!(cfg.alpha >= 0.0)) throw ConfigError("sandbox.alpha", "must be >= 0");
  if (!(cfg.dt > 0.0)) throw ConfigError("sandbox.dt", "must be > 0");
  if (!(cfg.horizon > 0.0)) throw ConfigError("sandbox.horizon", "must be > 0");
  if (!(cfg.burn_in >= 0.0) || cfg.burn_in >= cfg.horizon) {
    throw ConfigError("sandbox.burn_in", "must be in [0, horizon)");
  }
  if (cfg.ensemble_size < 1) throw ConfigError("sandbox.ensemble_size", "must be >= 1");
  if (cfg.sample_every < 1) throw ConfigError("sandbox.sample_every", "must be >= 1");
}

void fd_step(SandboxState& s, const HamiltonianSystem& sys, const SandboxConfig& cfg) {
  const double h = cfg.dt;
  const auto n = static_cast<std::size_t>(sys.n);
  Vec dx, dy;
  if (cfg.stepper == Stepper::kSymplectic) {
    if (!sys.separable) {
      throw ConfigError("sandbox.stepper", "symplectic stepper needs a separable Hamiltonian");
    }
    // x' = -dH/dy(y), y' = dH/dx(x)
    sys.grad_H(s.x, s.y, dx, dy);
    for (std::size_t i = 0; i < n; ++i) s.y[i] += 0.5 * h * dx[i];
    sys.grad_H(s.x, s.y, dx, dy);
    for (std::size_t i = 0; i < n; ++i) s.x[i] -= h * dy[i];
    sys.grad_H(s.x, s.y, dx, dy);
    for (std::size_t i = 0; i < n; ++i) s.y[i] += 0.5 * h * dx[i];
    if (cfg.alpha > 0.0) {
      sys.grad_H(s.x, s.y, dx, dy);
      for (std::size_t i = 0; i < n; ++i) {
        s.x[i] -= cfg.alpha * h * dx[i];
        s.y[i] -= cfg.alpha * h * dy[i];
      }
    }
  } else {
    sys.grad_H(s.x, s.y, dx, dy);
    for (std::size_t i = 0; i < n; ++i) {
      s.x[i] += h * (-dy[i] - cfg.alpha * dx[i]);
      s.y[i] += h * (dx[i] - cfg.alpha * dy[i]);
    }
  }
  if (cfg.alpha > 0.0) {
    std::vector<double> xi(2 * n);
    s.rng.normals(xi);
    const double amp = std::sqrt(2.0 * cfg.alpha * h);
    for (std::size_t i = 0; i < n; ++i) {
      s.x[i] += amp * xi[i];
      s.y[i] += amp * xi[n + i];
    }
  }
  s.time += h;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
      throw DivergenceError(s.time, "sandbox state became non-finite at t = " + std::to_string(s.time));
    }
  }
}

Observable make_observable(const std::string& name, const HamiltonianSystem& sys) {
  if (name == "H") return {name, sys.H};
  if (name == "one") return {name, [](const Vec&, const Vec&) { return 1.0; }};
  if (name == "in_ball") {
    return {name, [](const Vec& x, const Vec& y) { return norm_sq(x, y) <= 1.0 ? 1.0 : 0.0; }};
  }
  // <axis><index>[...]
  auto parse_index = [&](std::string_view s, std::size_t& pos) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
    if (ec != std::errc() || v < 1 || v > sys.n) {
      throw ConfigError("sandbox.observables", "bad coordinate in '" + name + "'");
    }
    pos = static_cast<std::size_t>(ptr - s.data());
    return static_cast<std::size_t>(v - 1);
  };
  const std::string_view s = name;
  if (!s.empty() && (s[0] == 'x' || s[0] == 'y')) {
    const bool first_x = s[0] == 'x';
    std::size_t pos = 1;
    const std::size_t i = parse_index(s, pos);
    auto pick = [](bool is_x, std::size_t k) {
      return [is_x, k](const Vec& x, const Vec& y) { return is_x ? x[k] : y[k]; };
    };
    const auto a = pick(first_x, i);
    const std::string_view rest = s.substr(pos);
    if (rest.empty()) return {name, a};
    if (rest == "^2") return {name, [a](const Vec& x, const Vec& y) { return a(x, y) * a(x, y); }};
    if (rest == "^4") {
      return {name, [a](const Vec& x, const Vec& y) {
                const double v = a(x, y) * a(x, y);
                return v * v;
              }};
    }
    if (rest[0] == 'x' || rest[0] == 'y') {
      std::size_t p2 = pos + 1;
      const std::size_t j = parse_index(s, p2);
      if (p2 == s.size()) {
        const auto b = pick(rest[0] == 'x', j);
        return {name, [a, b](const Vec& x, const Vec& y) { return a(x, y) * b(x, y); }};
      }
    }
  }
  throw ConfigError("sandbox.observables", "unknown observable '" + name + "'");
}

namespace {

// Upper bound on the mass of e^{-H} outside the ball of radius r.
double tail_bound(const HamiltonianSystem& sys, double r) {
  const int d = 2 * sys.n;
  const double surface = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  const double dr = 1e-3 * std::max(1.0, r);
  double acc = 0.0;
  double peak = 0.0;
  for (double s = r; s < r + 1e4; s += dr) {
    const double v = surface * std::pow(s, d - 1) * std::exp(-sys.radial_lower_bound(s));
    acc += v * dr;
    peak = std::max(peak, v);
    if (s > r + 1.0 && v < 1e-30 * peak) break;
  }
  return acc;
}

struct TensorSum {
  double weight = 0.0;
  double moment = 0.0;
};

TensorSum tensor_quadrature(const HamiltonianSystem& sys, const Observable& obs, double half,
                            int m) {
  const int d = 2 * sys.n;
  const double h = 2.0 * half / (m - 1);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Vec x(static_cast<std::size_t>(sys.n)), y(static_cast<std::size_t>(sys.n));
  TensorSum sum;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      const double c = -half + h * idx[static_cast<std::size_t>(k)];
      (k < sys.n ? x[static_cast<std::size_t>(k)] : y[static_cast<std::size_t>(k - sys.n)]) = c;
      if (idx[static_cast<std::size_t>(k)] == 0 || idx[static_cast<std::size_t>(k)] == m - 1) w *= 0.5;
    }
    const double e = w * std::exp(-sys.H(x, y));
    sum.weight += e;
    sum.moment += e * obs.f(x, y);
    int k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == m) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == d) break;
  }
  return sum;
}

}  // namespace

double quadrature_box(const HamiltonianSystem& sys, double tail_mass) {
  // Scale by the radial bound's total mass; gibbs_oracle re-checks against the
  // mass actually found on the box.
  const double total = tail_bound(sys, 0.0);
  for (double r = 1.0; r <= 1e3; r *= 1.05) {
    if (tail_bound(sys, r) <= tail_mass * total) return r;
  }
  throw QuadratureError("e^{-H} tail does not fall below the requested mass for |z| <= 1e3");
}

double gibbs_oracle(const HamiltonianSystem& sys, const Observable& obs,
                    const QuadratureOptions& options) {
  const int d = 2 * sys.n;
  if (d > 6) throw QuadratureError("tensor quadrature limited to 2n <= 6");
  int m = options.points_per_dim;
  if (m <= 0) m = d == 2 ? 801 : (d == 4 ? 81 : 25);
  if (m < 3) throw QuadratureError("need >= 3 points per dimension");
  double half = quadrature_box(sys, options.tail_mass);
  for (int attempt = 0; attempt < 40; ++attempt) {
    const TensorSum s = tensor_quadrature(sys, obs, half, m);
    const double cell = std::pow(2.0 * half / (m - 1), d);
    const double mass = s.weight * cell;
    if (!(mass > 0.0) || !std::isfinite(mass)) throw QuadratureError("e^{-H} has no mass on the box");
    // The box contains the ball of radius `half`.
    if (tail_bound(sys, half) <= options.tail_mass * mass) return s.moment / s.weight;
    half *= 1.1;
  }
  throw QuadratureError("quadrature box does not cover 1 - tail_mass of e^{-H}");
}

CompareReport stationary_compare(const HamiltonianSystem& sys, const SandboxConfig& cfg,
                                 const std::vector<std::string>& observables, int threads) {
  validate(cfg);
  std::vector<Observable> obs;
  std::vector<std::string> names;
  for (const auto& name : observables) {
    obs.push_back(make_observable(name, sys));
    names.push_back(name);
  }
  const auto steps = static_cast<std::uint64_t>(std::llround(cfg.horizon / cfg.dt));
  const auto count = static_cast<std::size_t>(cfg.ensemble_size);
  std::vector<MomentLedger> ledgers(count);
  parallel_for(count, threads > 0 ? threads : default_thread_count(), [&](std::size_t m) {
    SandboxState s;
    s.x.assign(static_cast<std::size_t>(sys.n), 0.0);
    s.y.assign(static_cast<std::size_t>(sys.n), 0.0);
    s.rng = RngStream(cfg.seed, m);
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    for (std::uint64_t k = 1; k <= steps; ++k) {
      fd_step(s, sys, cfg);
      s.time = static_cast<double>(k) * cfg.dt;
      if (k % static_cast<std::uint64_t>(cfg.sample_every) != 0 || s.time < cfg.burn_in) continue;
      times.push_back(s.time);
      std::vector<double> row;
      row.reserve(obs.size());
      for (const auto& o : obs) row.push_back(o.f(s.x, s.y));
      rows.push_back(std::move(row));
    }
    ledgers[m] = time_average(names, times, rows, cfg.burn_in);
  });

  CompareReport rep;
  rep.system = sys.name;
  rep.alpha = cfg.alpha;
  rep.ledger = MomentLedger(names);
  for (const auto& l : ledgers) rep.ledger.merge(l);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    CompareRow row;
    row.observable = names[i];
    row.estimate = rep.ledger.mean(names[i]);
    row.se = rep.ledger.se(names[i]);
    row.oracle = gibbs_oracle(sys, obs[i]);
    row.residual = row.estimate - row.oracle;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace sqg::sandbox
