#pragma once

#include <string>
#include <vector>

#include "sqglab/forcing.hpp"
#include "sqglab/functionals.hpp"
#include "sqglab/integrator.hpp"

namespace sqg {

// Expectation identities obeyed by the stochastic flow.
//  kAlp: E|theta|^2 + 2 alpha int E(H2 + W14) = E|theta_0|^2 + alpha A_0 t
//  kHmj: E|theta|^2_{H^{-1/2}} + 2 alpha int E I = E|theta_0|^2_{H^{-1/2}} + alpha A_{-1/2} t
//  kCet: E M^q + alpha q int E M^{q-1}(H2 + W14)
//          = E M^q(0) + alpha q (A_0/2) int E M^{q-1} + alpha q (q-1)/2 int E M^{q-2} S
// with S = sum_j a_j^2 (theta, e_j)^2.
enum class BalanceIdentity { kAlp, kHmj, kCet };

struct BalanceReport {
  std::string identity;  // "alp", "hmj", "hmj_printed", "cet_q<q>"
  double t0 = 0.0;
  double t1 = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // lhs - rhs at t1
  double monte_carlo_se = 0.0;
  // The same quantities at every observation time.
  std::vector<double> times;
  std::vector<double> residual_path;
  std::vector<double> se_path;
};

// Observables an ensemble must record for the identity.
std::vector<std::string> balance_observables(BalanceIdentity id, int q = 1,
                                             CubicSign sign = CubicSign::kDerived);

// Residual of the identity over [times.front(), times.back()] from per-member
// observations. Time integrals use the trapezoid rule on the observation grid,
// which must be uniform.
BalanceReport ito_residual(BalanceIdentity id, const EnsembleStats& stats, const NoiseSpec& spec,
                           double alpha, int q = 1, CubicSign sign = CubicSign::kDerived);

// Cumulative trapezoid integral, out[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                         const std::vector<double>& f);

}  // namespace sqg
