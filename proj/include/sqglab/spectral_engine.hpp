#pragma once

#include <memory>
#include <span>
#include <vector>

#include "sqglab/spectral_field.hpp"

namespace sqg {

// Physical-space synthesis of theta's gradient and velocity on a padded grid.
struct PhysicalGradients {
  std::span<const double> theta_x;
  std::span<const double> theta_y;
  std::span<const double> u1;
  std::span<const double> u2;
};

// Transform plans, wave-number tables and scratch buffers for one GridSpec.
// An engine is not thread-safe; for_grid() hands out one per thread.
class SpectralEngine {
 public:
  explicit SpectralEngine(const GridSpec& grid);
  ~SpectralEngine();
  SpectralEngine(const SpectralEngine&) = delete;
  SpectralEngine& operator=(const SpectralEngine&) = delete;

  static SpectralEngine& for_grid(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }

  // Synthesizes field on the physical grid; out has grid().physical_points().
  void to_physical(const SpectralField& field, std::span<double> out);
  // Analyzes samples and projects onto the lattice of out.cutoff().
  void to_spectral(std::span<const double> samples, SpectralField& out);

  // rhs = -[advection ? P(u.grad theta) : 0] + plap_coeff * [p_laplacian ? P(div(|grad|^2 grad)) : 0]
  void nonlinear(const SpectralField& theta, bool advection, bool p_laplacian,
                 double plap_coeff, SpectralField& rhs);

  void advection(const SpectralField& theta, SpectralField& out);
  void p_laplacian(const SpectralField& theta, SpectralField& out);

  // int |grad theta|^4 dx
  double grad_quartic(const SpectralField& theta);
  // int |grad theta|^2 grad theta . grad (-Delta)^{-1/2} theta dx
  double cubic_pairing(const SpectralField& theta);
  // max |u| and max |grad theta| over grid points.
  std::pair<double, double> max_speed_and_gradient(const SpectralField& theta);

  // Gradient and velocity of theta synthesized into the engine's buffers. The
  // spans stay valid until the next call on this engine.
  PhysicalGradients gradients(const SpectralField& theta, bool with_velocity);

 private:
  enum class Multiplier { kIdentity, kInvSqrt, kDx, kDy, kU1, kU2, kInvSqrtDx, kInvSqrtDy };

  void check_cutoff(int cutoff) const;
  void synthesize(const SpectralField& field, Multiplier m, double* out);
  void analyze(const double* samples, SpectralField& out);

  struct Plans;

  GridSpec grid_;
  std::unique_ptr<Plans> plans_;
  SpectralField flux_x_{1}, flux_y_{1};
};

}  // namespace sqg
