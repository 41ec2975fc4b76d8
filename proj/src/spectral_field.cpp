#include "sqglab/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqglab/errors.hpp"
#include "sqglab/spectral_engine.hpp"

namespace sqg {

namespace {

// 2^a 3^b 5^c with b <= 2 and c <= 1: FFTW's estimated plans for these are
// markedly faster than for lengths with higher powers of 3, 5 or factors of 7.
bool is_smooth_length(int n) {
  int threes = 0;
  int fives = 0;
  while (n % 2 == 0) n /= 2;
  while (n % 3 == 0) n /= 3, ++threes;
  while (n % 5 == 0) n /= 5, ++fives;
  return n == 1 && threes <= 2 && fives <= 1;
}

void require_same_cutoff(const SpectralField& a, const SpectralField& b) {
  if (a.cutoff() != b.cutoff()) {
    throw DimensionError("spectral fields have different cutoffs (" +
                         std::to_string(a.cutoff()) + " vs " + std::to_string(b.cutoff()) +
                         ")");
  }
}

void require_grid(const SpectralField& f, const GridSpec& grid) {
  if (f.cutoff() != grid.cutoff()) {
    throw DimensionError("field cutoff " + std::to_string(f.cutoff()) +
                         " does not match grid cutoff " + std::to_string(grid.cutoff()));
  }
}

}  // namespace

GridSpec::GridSpec(int cutoff, int padding_factor) : cutoff_(cutoff), padding_(padding_factor) {
  if (cutoff < 1) throw ConfigError("cutoff", "must be >= 1");
  if (padding_factor < 1) throw ConfigError("padding", "must be >= 1");
  size_ = transform_friendly_length(padding_factor * (2 * cutoff + 1));
}

int GridSpec::transform_friendly_length(int n) {
  int m = std::max(n, 1);
  while (!is_smooth_length(m)) ++m;
  return m;
}

SpectralField::SpectralField(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 1) throw DimensionError("cutoff must be >= 1");
  coeffs_.assign(static_cast<std::size_t>(rows()) * static_cast<std::size_t>(cols()), cplx{});
}

cplx SpectralField::coeff(WaveVector k) const {
  if (std::abs(k.kx) > cutoff_ || std::abs(k.ky) > cutoff_) return {};
  if (k.kx >= 0) return at(k.kx, k.ky);
  return std::conj(at(-k.kx, -k.ky));
}

void SpectralField::set_mode(WaveVector k, cplx value) {
  if (std::abs(k.kx) > cutoff_ || std::abs(k.ky) > cutoff_) {
    throw DimensionError("wave vector outside cutoff");
  }
  if (k.kx == 0 && k.ky == 0) throw DimensionError("the k = 0 mode is not stored");
  if (k.kx < 0) {
    k = -k;
    value = std::conj(value);
  }
  at(k.kx, k.ky) = value;
  if (k.kx == 0) at(0, -k.ky) = std::conj(value);
}

bool SpectralField::is_hermitian(double tol) const {
  if (std::abs(at(0, 0)) > tol) return false;
  for (int ky = 1; ky <= cutoff_; ++ky) {
    if (std::abs(at(0, ky) - std::conj(at(0, -ky))) > tol) return false;
  }
  return true;
}

void SpectralField::enforce_hermitian() {
  at(0, 0) = {};
  for (int ky = 1; ky <= cutoff_; ++ky) {
    const cplx avg = 0.5 * (at(0, ky) + std::conj(at(0, -ky)));
    at(0, ky) = avg;
    at(0, -ky) = std::conj(avg);
  }
}

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const cplx& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

void SpectralField::set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), cplx{}); }

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_cutoff(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_cutoff(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& c : coeffs_) c *= a;
  return *this;
}

void SpectralField::axpy(double a, const SpectralField& x) {
  require_same_cutoff(*this, x);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * x.coeffs_[i];
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField project(const SpectralField& field, int cutoff) {
  SpectralField out(cutoff);
  const int m = std::min(cutoff, field.cutoff());
  for (int ky = -m; ky <= m; ++ky) {
    for (int kx = 0; kx <= m; ++kx) out.at(kx, ky) = field.at(kx, ky);
  }
  return out;
}

double RealField::mean() const {
  if (samples.empty()) return 0.0;
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

RealField to_physical(const SpectralField& field, const GridSpec& grid) {
  require_grid(field, grid);
  RealField out{grid.size(), std::vector<double>(grid.physical_points())};
  SpectralEngine::for_grid(grid).to_physical(field, out.samples);
  return out;
}

SpectralField to_spectral(const RealField& real, const GridSpec& grid) {
  if (real.size != grid.size() || real.samples.size() != grid.physical_points()) {
    throw DimensionError("real field of size " + std::to_string(real.size) +
                         " does not match grid size " + std::to_string(grid.size()));
  }
  SpectralField out(grid.cutoff());
  SpectralEngine::for_grid(grid).to_spectral(real.samples, out);
  return out;
}

SpectralField fractional_laplacian(const SpectralField& field, double s) {
  SpectralField out = field;
  const int n = field.cutoff();
  for (int ky = -n; ky <= n; ++ky) {
    for (int kx = 0; kx <= n; ++kx) {
      const int k2 = kx * kx + ky * ky;
      out.at(kx, ky) = k2 == 0 ? cplx{} : field.at(kx, ky) * std::pow(double(k2), s);
    }
  }
  return out;
}

std::pair<SpectralField, SpectralField> riesz_velocity(const SpectralField& field) {
  const int n = field.cutoff();
  SpectralField u1(n), u2(n);
  for (int ky = -n; ky <= n; ++ky) {
    for (int kx = 0; kx <= n; ++kx) {
      const int k2 = kx * kx + ky * ky;
      if (k2 == 0) continue;
      const cplx w = cplx(0.0, 1.0 / std::sqrt(double(k2))) * field.at(kx, ky);
      u1.at(kx, ky) = double(-ky) * w;
      u2.at(kx, ky) = double(kx) * w;
    }
  }
  return {std::move(u1), std::move(u2)};
}

SpectralField advection_term(const SpectralField& field, const GridSpec& grid) {
  require_grid(field, grid);
  if (grid.padding_factor() < 2) {
    throw ConfigError("padding", "padding factor below 2 aliases the nonlinear terms");
  }
  SpectralField out(field.cutoff());
  SpectralEngine::for_grid(grid).advection(field, out);
  return out;
}

SpectralField p_laplacian_term(const SpectralField& field, const GridSpec& grid) {
  require_grid(field, grid);
  if (grid.padding_factor() < 2) {
    throw ConfigError("padding", "padding factor below 2 aliases the nonlinear terms");
  }
  SpectralField out(field.cutoff());
  SpectralEngine::for_grid(grid).p_laplacian(field, out);
  return out;
}

double inner(const SpectralField& f, const SpectralField& g) {
  require_same_cutoff(f, g);
  const int n = f.cutoff();
  double acc = 0.0;
  for (int ky = -n; ky <= n; ++ky) {
    // kx > 0 stands for itself and its conjugate partner.
    const double col0 = (f.at(0, ky) * std::conj(g.at(0, ky))).real();
    double row = 0.0;
    for (int kx = 1; kx <= n; ++kx) row += (f.at(kx, ky) * std::conj(g.at(kx, ky))).real();
    acc += col0 + 2.0 * row;
  }
  return kTorusArea * acc;
}

double l2_sq(const SpectralField& field) { return inner(field, field); }

double sobolev_sq(const SpectralField& field, double s) {
  const int n = field.cutoff();
  double acc = 0.0;
  for (int ky = -n; ky <= n; ++ky) {
    for (int kx = 0; kx <= n; ++kx) {
      const int k2 = kx * kx + ky * ky;
      if (k2 == 0) continue;
      const double w = (kx == 0 ? 1.0 : 2.0) * std::pow(double(k2), s);
      acc += w * std::norm(field.at(kx, ky));
    }
  }
  return kTorusArea * acc;
}

double grad_l4_4(const SpectralField& field, const GridSpec& grid) {
  require_grid(field, grid);
  return SpectralEngine::for_grid(grid).grad_quartic(field);
}

}  // namespace sqg
