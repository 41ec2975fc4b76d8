#include "sqglab/integrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include "sqglab/kernels.hpp"

namespace sqg {

SpectralField make_initial(const InitialCondition& ic, int cutoff, RngStream rng) {
  SpectralField f(cutoff);
  switch (ic.kind) {
    case InitialCondition::Kind::kZero:
      break;
    case InitialCondition::Kind::kModes:
      for (const auto& m : ic.modes) {
        f.set_mode(m.k, f.coeff(m.k) + cplx(0.5 * m.cos_amp, -0.5 * m.sin_amp));
      }
      break;
    case InitialCondition::Kind::kRandom: {
      const int band = std::min(ic.band, cutoff);
      for (int ky = -band; ky <= band; ++ky) {
        for (int kx = 0; kx <= band; ++kx) {
          const int k2 = kx * kx + ky * ky;
          if (k2 == 0 || k2 > ic.band * ic.band || (kx == 0 && ky < 0)) continue;
          double xi[2];
          rng.normals(xi);
          const double w = std::pow(double(k2), -0.5 * ic.slope) / std::numbers::sqrt2;
          f.set_mode({kx, ky}, cplx(w * xi[0], w * xi[1]));
        }
      }
      const double rms = std::sqrt(l2_sq(f) / kTorusArea);
      if (rms > 0.0) f *= ic.rms / rms;
      break;
    }
  }
  return f;
}

std::uint64_t SimConfig::steps() const {
  return static_cast<std::uint64_t>(std::llround(horizon / dt));
}

void validate(const SimConfig& cfg) {
  if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) throw ConfigError("sim.alpha", "must be >= 0");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("sim.dt", "must be > 0");
  if (!(cfg.horizon >= 0.0) || !std::isfinite(cfg.horizon)) {
    throw ConfigError("sim.horizon", "must be >= 0");
  }
  const double n = cfg.horizon / cfg.dt;
  if (std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n)) {
    throw ConfigError("sim.horizon", "must be an integer multiple of dt");
  }
  if (cfg.cutoff < 1) throw ConfigError("sim.cutoff", "must be >= 1");
  if (cfg.padding < 1) throw ConfigError("sim.padding", "must be >= 1");
  if ((cfg.enable_advection || cfg.enable_p_laplacian) && cfg.padding < 2) {
    throw ConfigError("sim.padding", "nonlinear terms need padding >= 2 (aliasing)");
  }
  if (cfg.ensemble_size < 1) throw ConfigError("sim.ensemble_size", "must be >= 1");
  if (cfg.observe_every < 1) throw ConfigError("sim.observe_every", "must be >= 1");
  if (cfg.noise_substeps < 1) throw ConfigError("sim.noise_substeps", "must be >= 1");
  if (cfg.initial.kind == InitialCondition::Kind::kRandom) {
    if (cfg.initial.band < 1) throw ConfigError("initial.band", "must be >= 1");
    if (cfg.initial.band > cfg.cutoff) throw ConfigError("initial.band", "exceeds the cutoff");
  }
  for (const auto& m : cfg.initial.modes) {
    if (std::max(std::abs(m.k.kx), std::abs(m.k.ky)) > cfg.cutoff || m.k.norm_sq() == 0) {
      throw ConfigError("initial.modes", "mode outside 1 <= |k|_inf <= cutoff");
    }
  }
}

std::uint64_t noise_stream(const SimConfig& cfg, std::uint64_t member) {
  return cfg.identical_seeds ? 0 : member;
}

std::uint64_t initial_stream(const SimConfig& cfg, std::uint64_t member) {
  return (std::uint64_t{1} << 62) | (cfg.identical_seeds ? 0 : member);
}

StepperState initial_state(const SimConfig& cfg, std::uint64_t member) {
  StepperState s;
  s.field = make_initial(cfg.initial, cfg.cutoff, RngStream(cfg.seed, initial_stream(cfg, member)));
  s.rng = RngStream(cfg.seed, noise_stream(cfg, member));
  return s;
}

Stepper::Stepper(const SimConfig& cfg, NoiseSpec noise)
    : cfg_(cfg), noise_(std::move(noise)), grid_(cfg.grid()) {
  validate(cfg_);
  engine_ = &SpectralEngine::for_grid(grid_);
  const int n = cfg_.cutoff;
  SpectralField shape(n);
  decay_full_.resize(shape.size());
  decay_half_.resize(shape.size());
  for (int ky = -n; ky <= n; ++ky) {
    for (int kx = 0; kx <= n; ++kx) {
      const double k2 = double(kx * kx + ky * ky);
      const double rate = cfg_.alpha * k2 * k2;
      decay_full_[shape.index(kx, ky)] = std::exp(-rate * cfg_.dt);
      decay_half_[shape.index(kx, ky)] = std::exp(-0.5 * rate * cfg_.dt);
    }
  }
  if (noise_.max_wavenumber() > n) {
    throw ConfigError("noise", "forced modes exceed the Galerkin cutoff");
  }
  const double h = cfg_.dt / cfg_.noise_substeps;
  for (std::size_t j = 0; j < noise_.size(); ++j) {
    if (noise_.amplitudes[j] == 0.0) continue;
    noise_modes_.push_back(j);
    const double lam = noise_.basis[j].lambda;
    const double c = cfg_.alpha * lam * lam;
    if (cfg_.stochastic_scheme == StochasticScheme::kImexExponential && c > 0.0) {
      noise_sigma_.push_back(std::sqrt(-std::expm1(-2.0 * c * h) / (2.0 * c)));
      noise_decay_.push_back(std::exp(-c * h));
    } else {
      noise_sigma_.push_back(std::sqrt(h));
      noise_decay_.push_back(1.0);
    }
  }
  xi_.resize(noise_.size());
  for (SpectralField* f : {&k1_, &k2_, &k3_, &k4_, &tmp_, &acc_}) *f = SpectralField(n);
}

void Stepper::rhs(const SpectralField& theta, SpectralField& out) {
  engine_->nonlinear(theta, cfg_.enable_advection, cfg_.enable_p_laplacian, cfg_.alpha, out);
}

void Stepper::apply_factor(SpectralField& f, const std::vector<double>& factor) const {
  kernels::active().scale_complex(f.size(), f.coefficients().data(), factor.data());
}

void Stepper::step_rk4(StepperState& s) {
  // Integrating-factor (Lawson) RK4; with alpha = 0 the factors are 1 and this
  // is the classical scheme.
  const double h = cfg_.dt;
  const bool linear = cfg_.alpha != 0.0;
  const auto& k = kernels::active();
  const std::size_t n = s.field.size();
  auto axpy = [&](double a, const SpectralField& x, SpectralField& y) {
    k.axpy_complex(n, a, x.coefficients().data(), y.coefficients().data());
  };

  rhs(s.field, k1_);
  tmp_ = s.field;
  axpy(0.5 * h, k1_, tmp_);
  if (linear) apply_factor(tmp_, decay_half_);
  rhs(tmp_, k2_);

  tmp_ = s.field;
  if (linear) apply_factor(tmp_, decay_half_);
  axpy(0.5 * h, k2_, tmp_);
  rhs(tmp_, k3_);

  // acc accumulates E^{1/2} (u + h/6 k1) + h/3 (k2 + k3), later multiplied by E^{1/2}.
  acc_ = s.field;
  axpy(h / 6.0, k1_, acc_);
  if (linear) apply_factor(acc_, decay_half_);
  axpy(h / 3.0, k2_, acc_);
  axpy(h / 3.0, k3_, acc_);

  tmp_ = s.field;
  if (linear) apply_factor(tmp_, decay_half_);
  axpy(h, k3_, tmp_);
  if (linear) apply_factor(tmp_, decay_half_);
  rhs(tmp_, k4_);

  if (linear) apply_factor(acc_, decay_half_);
  axpy(h / 6.0, k4_, acc_);
  std::swap(s.field, acc_);
}

void Stepper::step_heun(StepperState& s) {
  const double h = cfg_.dt;
  const auto& k = kernels::active();
  const std::size_t n = s.field.size();
  const bool nonlinear = cfg_.enable_advection || cfg_.enable_p_laplacian;
  if (!nonlinear) {
    apply_factor(s.field, decay_full_);
    return;
  }
  rhs(s.field, k1_);
  tmp_ = s.field;
  k.axpy_complex(n, h, k1_.coefficients().data(), tmp_.coefficients().data());
  apply_factor(tmp_, decay_full_);
  rhs(tmp_, k2_);
  k.axpy_complex(n, 0.5 * h, k1_.coefficients().data(), s.field.coefficients().data());
  apply_factor(s.field, decay_full_);
  k.axpy_complex(n, 0.5 * h, k2_.coefficients().data(), s.field.coefficients().data());
}

void Stepper::add_noise(StepperState& s) {
  if (!cfg_.enable_noise || cfg_.alpha == 0.0 || noise_modes_.empty()) return;
  const double amp = std::sqrt(cfg_.alpha);
  const int subs = cfg_.noise_substeps;
  std::vector<double> combined(noise_modes_.size(), 0.0);
  for (int sub = 0; sub < subs; ++sub) {
    s.rng.normals(xi_);
    for (std::size_t i = 0; i < noise_modes_.size(); ++i) {
      // Earlier sub-increments have decayed over the remaining sub-intervals.
      combined[i] = combined[i] * noise_decay_[i] + noise_sigma_[i] * xi_[noise_modes_[i]];
    }
  }
  for (std::size_t i = 0; i < noise_modes_.size(); ++i) {
    const std::size_t j = noise_modes_[i];
    add_basis_mode(s.field, noise_.basis[j], amp * noise_.amplitudes[j] * combined[i]);
  }
}

void Stepper::step(StepperState& state) {
  if (state.field.cutoff() != cfg_.cutoff) throw DimensionError("state cutoff mismatch");
  if (cfg_.deterministic()) {
    step_rk4(state);
  } else {
    step_heun(state);
    add_noise(state);
  }
  state.field.at(0, 0) = {};
  ++state.step;
  state.time = static_cast<double>(state.step) * cfg_.dt;
  if (!state.field.all_finite()) {
    throw DivergenceError(state.time, "non-finite state at t = " + std::to_string(state.time));
  }
}

std::pair<double, double> Stepper::stability_monitors(const SpectralField& theta) {
  const auto [umax, gmax] = engine_->max_speed_and_gradient(theta);
  const double n = cfg_.cutoff;
  return {cfg_.dt * n * umax, cfg_.alpha * cfg_.dt * gmax * gmax * n * n};
}

StepperState step(StepperState state, const SimConfig& cfg, const NoiseSpec& noise) {
  Stepper stepper(cfg, noise);
  stepper.step(state);
  return state;
}

std::vector<double> TrajectoryRecord::series(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("observables", "series '" + name + "' not recorded");
  const auto col = static_cast<std::size_t>(it - names.begin());
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) out.push_back(row[col]);
  return out;
}

TrajectoryRecord run_trajectory(const SimConfig& cfg, const NoiseSpec& noise,
                                const ObservableSet& observables,
                                const TrajectoryOptions& options) {
  Stepper stepper(cfg, noise);
  StepperState state = options.resume != nullptr ? *options.resume : initial_state(cfg, options.member);
  const std::uint64_t total = cfg.steps();

  TrajectoryRecord rec;
  rec.names = observables.names();
  rec.initial_l2 = l2_sq(state.field);
  double reference = rec.initial_l2;
  if (cfg.enable_noise && cfg.alpha > 0.0) {
    // Stationary int theta^2 is at most A_0 / 2 (Poincare with lambda >= 1).
    reference = std::max(reference, 0.5 * spectral_sum(noise, 0.0));
  }
  reference = std::max(reference, 1e-300);
  rec.max_l2 = rec.initial_l2;

  StepperState last = state;
  auto observe = [&]() {
    rec.times.push_back(state.time);
    rec.values.push_back(observables.evaluate(state.field));
    if (options.monitor_stability) {
      const auto [cfl, plap] = stepper.stability_monitors(state.field);
      rec.max_cfl = std::max(rec.max_cfl, cfl);
      rec.max_plap_monitor = std::max(rec.max_plap_monitor, plap);
      rec.cfl_exceeded = rec.cfl_exceeded || cfl > cfg.cfl_limit;
    }
    if (options.on_observe) options.on_observe(state);
    last = state;
  };

  observe();
  while (state.step < total) {
    try {
      stepper.step(state);
    } catch (const DivergenceError& e) {
      throw TrajectoryDivergence(e.time(), e.what(), last);
    }
    const double l2 = l2_sq(state.field);
    rec.max_l2 = std::max(rec.max_l2, l2);
    if (!(l2 <= 1e6 * reference)) {
      throw TrajectoryDivergence(state.time,
                                 "int theta^2 exceeded 1e6 x its reference value at t = " +
                                     std::to_string(state.time),
                                 last);
    }
    if (state.step % static_cast<std::uint64_t>(cfg.observe_every) == 0 || state.step == total) {
      observe();
    }
  }
  rec.final_state = state;
  return rec;
}

std::ptrdiff_t EnsembleStats::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : it - names.begin();
}

int default_thread_count() {
  if (const char* env = std::getenv("SQGLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

EnsembleStats run_ensemble(const SimConfig& cfg, const NoiseSpec& noise,
                           const ObservableSet& observables, int threads) {
  validate(cfg);
  const auto count = static_cast<std::size_t>(cfg.ensemble_size);
  std::vector<std::optional<TrajectoryRecord>> records(count);
  std::vector<std::string> errors(count);
  parallel_for(count, threads > 0 ? threads : default_thread_count(), [&](std::size_t m) {
    TrajectoryOptions opts;
    opts.member = m;
    try {
      records[m] = run_trajectory(cfg, noise, observables, opts);
    } catch (const DivergenceError& e) {
      errors[m] = e.what();
    }
  });

  EnsembleStats out;
  out.names = observables.names();
  for (std::size_t m = 0; m < count; ++m) {
    if (records[m]) {
      out.members.push_back(std::move(*records[m]));
      out.member_ids.push_back(m);
    } else {
      out.failures.emplace_back(m, errors[m]);
    }
  }
  if (out.members.empty()) return out;
  out.times = out.members.front().times;
  const std::size_t nt = out.times.size();
  const std::size_t no = out.names.size();
  const double nm = static_cast<double>(out.members.size());
  out.mean.assign(nt, std::vector<double>(no, 0.0));
  out.se.assign(nt, std::vector<double>(no, 0.0));
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t o = 0; o < no; ++o) {
      double sum = 0.0;
      for (const auto& r : out.members) sum += r.values[t][o];
      const double mean = sum / nm;
      double ss = 0.0;
      for (const auto& r : out.members) ss += (r.values[t][o] - mean) * (r.values[t][o] - mean);
      out.mean[t][o] = mean;
      out.se[t][o] = out.members.size() >= 2 ? std::sqrt(ss / (nm - 1.0) / nm)
                                             : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

}  // namespace sqg
