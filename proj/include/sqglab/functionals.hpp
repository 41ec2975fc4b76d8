#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sqglab/forcing.hpp"
#include "sqglab/spectral_field.hpp"

namespace sqg {

// M = 1/2 int theta^2
double mass_m(const SpectralField& theta);
// E_{-1/2} = 1/2 int |(-Delta)^{-1/4} theta|^2
double energy_minus_half(const SpectralField& theta);
// int |Delta theta|^2
double h2_dissipation(const SpectralField& theta);
// int |grad theta|^4
double w14_dissipation(const SpectralField& theta, const GridSpec& grid);

// Sign of the cubic term in I(theta). kDerived is the sign produced by pairing
// (-Delta)^{-1/2} theta with the p-Laplacian drift; kPrinted is the opposite.
enum class CubicSign { kDerived, kPrinted };

// I(theta) = int |(-Delta)^{3/4} theta|^2 +/- int |grad theta|^2 grad theta . grad (-Delta)^{-1/2} theta
double dissipation_I(const SpectralField& theta, const GridSpec& grid,
                     CubicSign sign = CubicSign::kDerived);

// Truncated Taylor expansion f(z0 + h) = sum_i c[i] h^i, i <= 4.
struct Jet {
  std::array<double, 5> c{};

  static Jet constant(double v) { return Jet{{v, 0, 0, 0, 0}}; }
  static Jet variable(double v) { return Jet{{v, 1, 0, 0, 0}}; }
  double value() const { return c[0]; }
  // d^order f / dz^order
  double derivative(int order) const;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator*(double s, const Jet& a);
Jet exp(const Jet& a);

// Smooth cutoff: 1 on [-1, 1], 0 outside (-2, 2), C^infinity in between.
Jet bump(const Jet& z);
double bump(double z);

// A scalar function with derivatives up to order 4.
struct ScalarFunction {
  std::string name;
  std::function<Jet(const Jet&)> eval;

  double operator()(double z) const { return eval(Jet::constant(z)).value(); }
  double derivative(double z, int order) const {
    return eval(Jet::variable(z)).derivative(order);
  }
};

// f_k(z) = z^{k+1} B(z), k = 1..n
std::vector<ScalarFunction> casimir_family(int n);
ScalarFunction monomial(int power);

// (1/|T^2|) int f(theta(x)) dx by quadrature on the grid.
double casimir(const SpectralField& theta, const GridSpec& grid, const ScalarFunction& f);

struct Diagnostics;

// Named observables. Stable identifiers:
//   M, E_mhalf, L2_sq, H2_diss, W14_diss, I_diss, I_diss_printed, noise_qv,
//   casimir_<k>, Hs_<s>, Mpow_<p>, Mq_diss_<q>, Mq_qv_<q>
// where Mq_diss_q = M^{q-1} (H2_diss + W14_diss) and Mq_qv_q = M^{q-2} noise_qv.
class ObservableSet {
 public:
  ObservableSet() = default;
  ObservableSet(std::vector<std::string> names, const GridSpec& grid, NoiseSpec noise);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::vector<double> evaluate(const SpectralField& theta) const;
  std::ptrdiff_t index_of(const std::string& name) const;

  static bool is_known(const std::string& name);

 private:
  std::vector<std::string> names_;
  std::vector<std::function<double(const SpectralField&, Diagnostics&)>> evaluators_;
  GridSpec grid_{1, 2};
  std::shared_ptr<const NoiseSpec> noise_;
};

}  // namespace sqg
