#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace sqg {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTorusArea = 4.0 * kPi * kPi;

struct WaveVector {
  int kx = 0;
  int ky = 0;

  constexpr int norm_sq() const { return kx * kx + ky * ky; }
  constexpr WaveVector operator-() const { return {-kx, -ky}; }
  friend constexpr bool operator==(const WaveVector&, const WaveVector&) = default;
};

// Retained modes are max(|kx|,|ky|) <= cutoff. Nonlinear terms are evaluated
// on a physical grid of size() points per direction, at least
// padding_factor * (2 * cutoff + 1) and rounded up to a 2^a 3^b 5^c 7^d length.
class GridSpec {
 public:
  explicit GridSpec(int cutoff, int padding_factor = 2);

  int cutoff() const { return cutoff_; }
  int padding_factor() const { return padding_; }
  int size() const { return size_; }
  int spectral_cols() const { return size_ / 2 + 1; }
  std::size_t physical_points() const {
    return static_cast<std::size_t>(size_) * static_cast<std::size_t>(size_);
  }

  // Padding of 2 resolves products of up to four band-limited factors exactly.
  bool dealiases_cubic() const { return size_ > 4 * cutoff_; }

  static int transform_friendly_length(int n);

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int cutoff_;
  int padding_;
  int size_;
};

// Fourier coefficients theta_k of a real zero-mean field,
//   theta(x) = sum_k theta_k exp(i k.x),   x in [0, 2pi)^2.
// Only the half plane kx >= 0 is stored, as a (2N+1) x (N+1) array indexed by
// (ky + N, kx). The kx = 0 column holds both ky and -ky; they are kept
// conjugate. The k = 0 entry is always zero.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(int cutoff);

  int cutoff() const { return cutoff_; }
  int rows() const { return 2 * cutoff_ + 1; }
  int cols() const { return cutoff_ + 1; }
  std::size_t size() const { return coeffs_.size(); }

  std::size_t index(int kx, int ky) const {
    return static_cast<std::size_t>(ky + cutoff_) * static_cast<std::size_t>(cols()) +
           static_cast<std::size_t>(kx);
  }
  cplx& at(int kx, int ky) { return coeffs_[index(kx, ky)]; }
  const cplx& at(int kx, int ky) const { return coeffs_[index(kx, ky)]; }

  // Coefficient for any wave vector; zero outside the cutoff.
  cplx coeff(WaveVector k) const;
  // Sets theta_k and theta_{-k} = conj(theta_k).
  void set_mode(WaveVector k, cplx value);

  std::span<cplx> coefficients() { return coeffs_; }
  std::span<const cplx> coefficients() const { return coeffs_; }

  bool is_hermitian(double tol = 0.0) const;
  void enforce_hermitian();
  bool all_finite() const;
  void set_zero();

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double a);
  // this += a * x
  void axpy(double a, const SpectralField& x);

 private:
  int cutoff_ = 0;
  std::vector<cplx> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// Truncates to, or zero-extends into, the lattice of the given cutoff.
SpectralField project(const SpectralField& field, int cutoff);

// Samples on the physical grid, row-major with index iy * size + ix at
// (x, y) = 2pi (ix, iy) / size.
struct RealField {
  int size = 0;
  std::vector<double> samples;

  double mean() const;
  double at(int ix, int iy) const {
    return samples[static_cast<std::size_t>(iy) * static_cast<std::size_t>(size) +
                   static_cast<std::size_t>(ix)];
  }
};

RealField to_physical(const SpectralField& field, const GridSpec& grid);
SpectralField to_spectral(const RealField& real, const GridSpec& grid);

// Multiplies each coefficient by |k|^{2s}.
SpectralField fractional_laplacian(const SpectralField& field, double s);

// u = (-d_y, d_x)(-Delta)^{-1/2} theta, i.e. u_k = i(-ky, kx)/|k| theta_k.
std::pair<SpectralField, SpectralField> riesz_velocity(const SpectralField& field);

// Galerkin projection of u.grad(theta).
SpectralField advection_term(const SpectralField& field, const GridSpec& grid);
// Galerkin projection of div(|grad theta|^2 grad theta).
SpectralField p_laplacian_term(const SpectralField& field, const GridSpec& grid);

// int f g dx over the torus.
double inner(const SpectralField& f, const SpectralField& g);
double l2_sq(const SpectralField& field);
// int |(-Delta)^{s/2} theta|^2 dx
double sobolev_sq(const SpectralField& field, double s);
// int |grad theta|^4 dx, exact quadrature on a dealiasing grid.
double grad_l4_4(const SpectralField& field, const GridSpec& grid);

}  // namespace sqg
