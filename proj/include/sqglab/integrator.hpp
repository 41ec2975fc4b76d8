#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sqglab/errors.hpp"
#include "sqglab/forcing.hpp"
#include "sqglab/functionals.hpp"
#include "sqglab/spectral_engine.hpp"
#include "sqglab/spectral_field.hpp"

namespace sqg {

// How the stochastic forcing enters a step of length dt.
//  kImexEm:          sqrt(alpha) a_j sqrt(dt) xi_j added after the drift update.
//  kImexExponential: the increment is the exact stochastic convolution with the
//                    bi-Laplacian semigroup, sqrt(alpha) a_j sigma_j xi_j with
//                    sigma_j^2 = (1 - exp(-2 alpha lambda_j^2 dt)) / (2 alpha lambda_j^2).
enum class StochasticScheme { kImexEm, kImexExponential };

struct InitialCondition {
  enum class Kind { kZero, kModes, kRandom };

  struct Mode {
    WaveVector k;
    double cos_amp = 0.0;  // cos_amp cos(k.x) + sin_amp sin(k.x)
    double sin_amp = 0.0;
  };

  Kind kind = Kind::kZero;
  std::vector<Mode> modes;
  // Random band-limited data: coefficients ~ |k|^{-slope} xi for 1 <= |k| <= band,
  // rescaled so that sqrt(int theta^2 / |T^2|) = rms.
  int band = 4;
  double rms = 0.25;
  double slope = 1.0;
};

SpectralField make_initial(const InitialCondition& ic, int cutoff, RngStream rng);

struct SimConfig {
  double alpha = 0.0;
  double dt = 1e-3;
  double horizon = 1.0;
  int cutoff = 32;
  int padding = 2;
  bool enable_advection = true;
  bool enable_p_laplacian = true;
  bool enable_noise = true;
  // alpha == 0 runs the classical four-stage scheme; otherwise the two-stage
  // integrating-factor scheme with additive noise.
  StochasticScheme stochastic_scheme = StochasticScheme::kImexExponential;
  std::uint64_t seed = 0;
  int ensemble_size = 1;
  // Observation stride in steps.
  int observe_every = 1;
  // Each step draws this many sub-increments and combines them, so a run at
  // dt with k sub-increments sees the same Brownian path as a run at dt / k.
  int noise_substeps = 1;
  double cfl_limit = 0.5;
  // All members share stream 0 (debugging aid; gives a zero-variance ensemble).
  bool identical_seeds = false;
  InitialCondition initial;

  GridSpec grid() const { return GridSpec(cutoff, padding); }
  std::uint64_t steps() const;
  bool deterministic() const { return alpha == 0.0; }
};

void validate(const SimConfig& cfg);

struct StepperState {
  double time = 0.0;
  std::uint64_t step = 0;
  SpectralField field;
  RngStream rng;
};

// Noise stream of ensemble member m, and the stream used for its initial data.
std::uint64_t noise_stream(const SimConfig& cfg, std::uint64_t member);
std::uint64_t initial_stream(const SimConfig& cfg, std::uint64_t member);

StepperState initial_state(const SimConfig& cfg, std::uint64_t member);

// One-step map for a fixed configuration; precomputes integrating factors and
// noise weights. Not thread-safe; make one per thread.
class Stepper {
 public:
  Stepper(const SimConfig& cfg, NoiseSpec noise);

  void step(StepperState& state);
  const SimConfig& config() const { return cfg_; }
  const NoiseSpec& noise() const { return noise_; }
  const GridSpec& grid() const { return grid_; }

  // dt * N * max|u| and alpha * dt * max|grad theta|^2 * N^2 for a state.
  std::pair<double, double> stability_monitors(const SpectralField& theta);

 private:
  void rhs(const SpectralField& theta, SpectralField& out);
  void apply_factor(SpectralField& f, const std::vector<double>& factor) const;
  void step_rk4(StepperState& s);
  void step_heun(StepperState& s);
  void add_noise(StepperState& s);

  SimConfig cfg_;
  NoiseSpec noise_;
  GridSpec grid_;
  SpectralEngine* engine_;
  std::vector<double> decay_full_, decay_half_;
  std::vector<std::size_t> noise_modes_;
  std::vector<double> noise_sigma_, noise_decay_;
  std::vector<double> xi_;
  SpectralField k1_, k2_, k3_, k4_, tmp_, acc_;
};

StepperState step(StepperState state, const SimConfig& cfg, const NoiseSpec& noise);

class TrajectoryDivergence : public DivergenceError {
 public:
  TrajectoryDivergence(double time, const std::string& what, StepperState last)
      : DivergenceError(time, what), last_(std::move(last)) {}
  const StepperState& last_finite() const { return last_; }

 private:
  StepperState last_;
};

struct TrajectoryRecord {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // [time][observable]
  double initial_l2 = 0.0;
  double max_l2 = 0.0;
  double max_cfl = 0.0;
  double max_plap_monitor = 0.0;
  bool cfl_exceeded = false;
  StepperState final_state;

  std::vector<double> series(const std::string& name) const;
};

struct TrajectoryOptions {
  std::uint64_t member = 0;
  // Start from this state instead of the configured initial condition.
  const StepperState* resume = nullptr;
  // Called at every observation, after the observables are recorded.
  std::function<void(const StepperState&)> on_observe;
  // Also evaluate the stability monitors at each observation.
  bool monitor_stability = true;
};

// Integrates from the start state to cfg.horizon, observing at step 0 and every
// observe_every steps (and at the final step). Throws TrajectoryDivergence if
// the state becomes non-finite or int theta^2 grows beyond 1e6 times its
// reference value.
TrajectoryRecord run_trajectory(const SimConfig& cfg, const NoiseSpec& noise,
                                const ObservableSet& observables,
                                const TrajectoryOptions& options = {});

struct EnsembleStats {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<TrajectoryRecord> members;  // successful members, in member order
  std::vector<std::uint64_t> member_ids;
  std::vector<std::pair<std::uint64_t, std::string>> failures;
  std::vector<std::vector<double>> mean;  // [time][observable]
  std::vector<std::vector<double>> se;

  std::ptrdiff_t index_of(const std::string& name) const;
};

// Thread count from SQGLAB_THREADS, else hardware concurrency.
int default_thread_count();

// Runs `count` tasks on up to `threads` workers. Each index is executed exactly
// once; callers write results into per-index slots.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

EnsembleStats run_ensemble(const SimConfig& cfg, const NoiseSpec& noise,
                           const ObservableSet& observables, int threads = 0);

}  // namespace sqg
