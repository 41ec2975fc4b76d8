#pragma once

// Pointwise physical-space kernels and spectral multipliers on the hot path
// of the nonlinear evaluation. Every kernel has a scalar reference
// implementation; an AVX2 variant is selected at runtime when the CPU
// supports it. Elementwise kernels are bit-identical across variants;
// reductions agree to rounding.

#include <complex>
#include <cstddef>
#include <string_view>

namespace sqg::kernels {

struct KernelTable {
  const char* name;

  // Advective flux psi * (-ty, tx), whose divergence is -u.grad theta for
  // u = (-psi_y, psi_x).
  void (*advect_flux)(std::size_t n, const double* tx, const double* ty, const double* psi,
                      double* fx, double* fy);
  // g = tx^2 + ty^2; fx += c*(g*tx); fy += c*(g*ty)
  void (*plap_flux_add)(std::size_t n, double c, const double* tx, const double* ty,
                        double* fx, double* fy);
  // sum (tx^2 + ty^2)^2
  double (*grad_quartic_sum)(std::size_t n, const double* tx, const double* ty);
  // sum (tx^2 + ty^2) * (tx*px + ty*py)
  double (*cubic_pairing_sum)(std::size_t n, const double* tx, const double* ty,
                              const double* px, const double* py);
  // z[i] *= m[i]
  void (*scale_complex)(std::size_t n, std::complex<double>* z, const double* m);
  // y[i] += a * x[i]
  void (*axpy_complex)(std::size_t n, double a, const std::complex<double>* x,
                       std::complex<double>* y);
};

const KernelTable& scalar_table();

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

// Table used by the solver. Defaults to the widest supported variant; the
// SQGLAB_SIMD environment variable ("scalar" or "avx2") overrides the choice
// on first use.
const KernelTable& active();

// Forces a variant by name; returns false if it is unavailable.
bool select(std::string_view name);

}  // namespace sqg::kernels
