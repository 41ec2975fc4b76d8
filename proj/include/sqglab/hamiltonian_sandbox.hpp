#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sqglab/forcing.hpp"
#include "sqglab/measure_lab.hpp"

namespace sqg::sandbox {

using Vec = std::vector<double>;

// Phase space R^n x R^n.
struct HamiltonianSystem {
  std::string name;
  int n = 1;
  std::function<double(const Vec& x, const Vec& y)> H;
  // Fills dx = dH/dx, dy = dH/dy.
  std::function<void(const Vec& x, const Vec& y, Vec& dx, Vec& dy)> grad_H;
  // h(r) <= H(z) for |z| = r; used to size the quadrature box.
  std::function<double(double r)> radial_lower_bound;
  // H(x, y) = K(y) + V(x) with per-coordinate derivatives, which enables the
  // symplectic splitting.
  bool separable = false;
};

// H = (|x|^2 + |y|^2) / 2
HamiltonianSystem quadratic(int n = 1);
// H = sum (x_i^4 + y_i^4) / 4 + (|x|^2 + |y|^2) / 2
HamiltonianSystem quartic(int n = 1);
// H = max(0, |z|^2 - 1)^2: flat (zero) on the unit ball.
HamiltonianSystem plateau(int n = 1);
HamiltonianSystem make_system(const std::string& name, int n = 1);

enum class Stepper {
  // dx = (-dH/dy - alpha dH/dx) dt + sqrt(2 alpha) dB, dy likewise, one
  // Euler-Maruyama step.
  kExplicit,
  // Leapfrog for the Hamiltonian part, then an Euler-Maruyama step of the
  // dissipation and noise. Separable systems only.
  kSymplectic,
};

struct SandboxConfig {
  double alpha = 0.1;
  double dt = 0.01;
  double horizon = 100.0;
  double burn_in = 10.0;
  std::uint64_t seed = 0;
  int ensemble_size = 1;
  Stepper stepper = Stepper::kExplicit;
  int sample_every = 1;
};

void validate(const SandboxConfig& cfg);

struct SandboxState {
  double time = 0.0;
  Vec x, y;
  RngStream rng;
};

void fd_step(SandboxState& state, const HamiltonianSystem& sys, const SandboxConfig& cfg);

struct Observable {
  std::string name;
  std::function<double(const Vec& x, const Vec& y)> f;
};

// Built-ins: "x<i>^2", "y<i>^2", "x<i>y<i>", "x<i>", "y<i>", "x<i>^4", "H",
// "in_ball", "one" (1-based coordinate index).
Observable make_observable(const std::string& name, const HamiltonianSystem& sys);

struct QuadratureOptions {
  int points_per_dim = 0;  // 0: chosen from the dimension
  double tail_mass = 1e-8;
};

// int f e^{-H} / int e^{-H} by tensor trapezoid quadrature on [-L, L]^{2n}.
// Throws QuadratureError when no box up to L = 1e3 covers 1 - tail_mass of
// the mass or when 2n > 6.
double gibbs_oracle(const HamiltonianSystem& sys, const Observable& obs,
                    const QuadratureOptions& options = {});
// Half-width of the box used by gibbs_oracle.
double quadrature_box(const HamiltonianSystem& sys, double tail_mass = 1e-8);

struct CompareRow {
  std::string observable;
  double estimate = 0.0;
  double se = 0.0;
  double oracle = 0.0;
  double residual = 0.0;
};

struct CompareReport {
  std::string system;
  double alpha = 0.0;
  std::vector<CompareRow> rows;
  MomentLedger ledger;
};

// Time and ensemble averages after burn-in against the Gibbs oracle.
CompareReport stationary_compare(const HamiltonianSystem& sys, const SandboxConfig& cfg,
                                 const std::vector<std::string>& observables, int threads = 0);

}  // namespace sqg::sandbox
