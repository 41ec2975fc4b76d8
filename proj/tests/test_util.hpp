#pragma once

#include <algorithm>
#include <cmath>

#include "sqglab/forcing.hpp"
#include "sqglab/integrator.hpp"
#include "sqglab/spectral_field.hpp"

namespace testutil {

// cos(k.x) and sin(k.x) at the given cutoff.
inline sqg::SpectralField cos_mode(int n, sqg::WaveVector k) {
  sqg::SpectralField f(n);
  f.set_mode(k, {0.5, 0.0});
  return f;
}

inline sqg::SpectralField sin_mode(int n, sqg::WaveVector k) {
  sqg::SpectralField f(n);
  f.set_mode(k, {0.0, -0.5});
  return f;
}

// Generic data filling the whole lattice, unit rms.
inline sqg::SpectralField random_field(int n, std::uint64_t seed, double rms = 1.0) {
  sqg::InitialCondition ic;
  ic.kind = sqg::InitialCondition::Kind::kRandom;
  ic.band = n;
  ic.rms = rms;
  ic.slope = 1.0;
  return sqg::make_initial(ic, n, sqg::RngStream(seed, 0));
}

inline double max_abs(const sqg::SpectralField& f) {
  double m = 0.0;
  for (auto c : f.coefficients()) m = std::max(m, std::abs(c));
  return m;
}

inline double max_diff(const sqg::SpectralField& a, const sqg::SpectralField& b) {
  return max_abs(a - b);
}

}  // namespace testutil
