#include "sqglab/spectral_engine.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

#include "sqglab/errors.hpp"
#include "sqglab/kernels.hpp"

namespace sqg {

namespace {

// The FFTW planner is not reentrant; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};

}  // namespace

// Two-pass transforms pruned to the retained band: the column pass (along y)
// touches only the kx <= cutoff columns, the rest of the half spectrum being
// identically zero on synthesis and discarded on analysis.
struct SpectralEngine::Plans {
  int size = 0;
  int cols = 0;
  int band = 0;
  std::unique_ptr<double, FftwDeleter<double>> real;
  std::unique_ptr<fftw_complex, FftwDeleter<fftw_complex>> spec;
  // Aligned physical buffers handed out through PhysicalGradients.
  std::vector<std::unique_ptr<double, FftwDeleter<double>>> phys;
  fftw_plan rows_forward = nullptr;
  fftw_plan cols_forward = nullptr;
  fftw_plan cols_backward = nullptr;
  fftw_plan rows_backward = nullptr;

  Plans(int n, int cutoff) : size(n), cols(n / 2 + 1), band(std::min(cutoff + 1, n / 2 + 1)) {
    const std::size_t npts = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    const std::size_t nspec = static_cast<std::size_t>(n) * static_cast<std::size_t>(cols);
    real.reset(fftw_alloc_real(npts));
    spec.reset(fftw_alloc_complex(nspec));
    for (int i = 0; i < 8; ++i) phys.emplace_back(fftw_alloc_real(npts));
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW_ESTIMATE keeps the chosen algorithm independent of timing, so
    // results are reproducible run to run.
    const unsigned flags = FFTW_ESTIMATE;
    rows_forward = fftw_plan_many_dft_r2c(1, &size, size, real.get(), nullptr, 1, size,
                                          spec.get(), nullptr, 1, cols, flags);
    cols_forward = fftw_plan_many_dft(1, &size, band, spec.get(), nullptr, cols, 1, spec.get(),
                                      nullptr, cols, 1, FFTW_FORWARD, flags);
    cols_backward = fftw_plan_many_dft(1, &size, band, spec.get(), nullptr, cols, 1, spec.get(),
                                       nullptr, cols, 1, FFTW_BACKWARD, flags);
    rows_backward = fftw_plan_many_dft_c2r(1, &size, size, spec.get(), nullptr, 1, cols,
                                           real.get(), nullptr, 1, size, flags);
    if (!rows_forward || !cols_forward || !cols_backward || !rows_backward) {
      throw Error("FFTW failed to create plans for grid size " + std::to_string(n));
    }
  }

  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (fftw_plan q : {rows_forward, cols_forward, cols_backward, rows_backward}) {
      if (q != nullptr) fftw_destroy_plan(q);
    }
  }

  std::size_t points() const { return static_cast<std::size_t>(size) * size; }

  // spec -> out; spec is destroyed.
  void backward(double* out) {
    fftw_execute_dft(cols_backward, spec.get(), spec.get());
    fftw_execute_dft_c2r(rows_backward, spec.get(), out);
  }

  // in -> spec (only the kx < band columns are valid afterwards).
  void forward(double* in) {
    fftw_execute_dft_r2c(rows_forward, in, spec.get());
    fftw_execute_dft(cols_forward, spec.get(), spec.get());
  }
};

SpectralEngine::SpectralEngine(const GridSpec& grid)
    : grid_(grid), plans_(std::make_unique<Plans>(grid.size(), grid.cutoff())) {}

SpectralEngine::~SpectralEngine() = default;

SpectralEngine& SpectralEngine::for_grid(const GridSpec& grid) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<SpectralEngine>> cache;
  auto& slot = cache[{grid.cutoff(), grid.padding_factor()}];
  if (!slot) slot = std::make_unique<SpectralEngine>(grid);
  return *slot;
}

void SpectralEngine::check_cutoff(int cutoff) const {
  if (cutoff > grid_.cutoff()) {
    throw DimensionError("field cutoff " + std::to_string(cutoff) + " exceeds grid cutoff " +
                         std::to_string(grid_.cutoff()));
  }
}

void SpectralEngine::synthesize(const SpectralField& field, Multiplier m, double* out) {
  check_cutoff(field.cutoff());
  Plans& p = *plans_;
  auto* buf = reinterpret_cast<cplx*>(p.spec.get());
  std::fill_n(buf, static_cast<std::size_t>(p.size) * p.cols, cplx{});
  const int n = field.cutoff();
  for (int ky = -n; ky <= n; ++ky) {
    const int row = ky < 0 ? ky + p.size : ky;
    cplx* dst = buf + static_cast<std::size_t>(row) * p.cols;
    for (int kx = 0; kx <= n; ++kx) {
      const cplx t = field.at(kx, ky);
      const int k2 = kx * kx + ky * ky;
      if (k2 == 0) continue;
      switch (m) {
        case Multiplier::kIdentity:
          dst[kx] = t;
          break;
        case Multiplier::kInvSqrt:
          dst[kx] = t / std::sqrt(double(k2));
          break;
        case Multiplier::kDx:
          dst[kx] = cplx(-kx * t.imag(), kx * t.real());
          break;
        case Multiplier::kDy:
          dst[kx] = cplx(-ky * t.imag(), ky * t.real());
          break;
        case Multiplier::kU1: {
          const double c = -ky / std::sqrt(double(k2));
          dst[kx] = cplx(-c * t.imag(), c * t.real());
          break;
        }
        case Multiplier::kU2:
        case Multiplier::kInvSqrtDx: {
          const double c = kx / std::sqrt(double(k2));
          dst[kx] = cplx(-c * t.imag(), c * t.real());
          break;
        }
        case Multiplier::kInvSqrtDy: {
          const double c = ky / std::sqrt(double(k2));
          dst[kx] = cplx(-c * t.imag(), c * t.real());
          break;
        }
      }
    }
  }
  p.backward(out);
}

void SpectralEngine::analyze(const double* samples, SpectralField& out) {
  check_cutoff(out.cutoff());
  Plans& p = *plans_;
  p.forward(const_cast<double*>(samples));
  const auto* buf = reinterpret_cast<const cplx*>(p.spec.get());
  const double scale = 1.0 / static_cast<double>(p.points());
  const int n = out.cutoff();
  for (int ky = -n; ky <= n; ++ky) {
    const int row = ky < 0 ? ky + p.size : ky;
    const cplx* src = buf + static_cast<std::size_t>(row) * p.cols;
    for (int kx = 0; kx <= n; ++kx) out.at(kx, ky) = src[kx] * scale;
  }
  // r2c output is Hermitian on the kx = 0 column up to rounding; make it exact.
  out.at(0, 0) = {};
  for (int ky = 1; ky <= n; ++ky) out.at(0, -ky) = std::conj(out.at(0, ky));
}

void SpectralEngine::to_physical(const SpectralField& field, std::span<double> out) {
  if (out.size() != plans_->points()) throw DimensionError("physical buffer size mismatch");
  double* tmp = plans_->phys[7].get();
  synthesize(field, Multiplier::kIdentity, tmp);
  std::copy_n(tmp, out.size(), out.begin());
}

void SpectralEngine::to_spectral(std::span<const double> samples, SpectralField& out) {
  if (samples.size() != plans_->points()) throw DimensionError("physical buffer size mismatch");
  double* tmp = plans_->phys[7].get();
  std::copy(samples.begin(), samples.end(), tmp);
  analyze(tmp, out);
}

PhysicalGradients SpectralEngine::gradients(const SpectralField& theta, bool with_velocity) {
  Plans& p = *plans_;
  double* tx = p.phys[0].get();
  double* ty = p.phys[1].get();
  double* u1 = p.phys[2].get();
  double* u2 = p.phys[3].get();
  synthesize(theta, Multiplier::kDx, tx);
  synthesize(theta, Multiplier::kDy, ty);
  const std::size_t n = p.points();
  if (with_velocity) {
    synthesize(theta, Multiplier::kU1, u1);
    synthesize(theta, Multiplier::kU2, u2);
    return {{tx, n}, {ty, n}, {u1, n}, {u2, n}};
  }
  return {{tx, n}, {ty, n}, {}, {}};
}

void SpectralEngine::nonlinear(const SpectralField& theta, bool advection, bool p_laplacian,
                               double plap_coeff, SpectralField& rhs) {
  check_cutoff(theta.cutoff());
  if (rhs.cutoff() != theta.cutoff()) rhs = SpectralField(theta.cutoff());
  rhs.set_zero();
  p_laplacian = p_laplacian && plap_coeff != 0.0;
  if (!advection && !p_laplacian) return;
  if (!grid_.dealiases_cubic() && p_laplacian) {
    throw ConfigError("padding", "grid does not dealias the cubic p-Laplacian term");
  }
  // Both terms are divergences of pointwise fluxes:
  //   -u.grad theta = div(psi (-theta_y, theta_x)),  psi = (-Delta)^{-1/2} theta,
  // so one pair of forward transforms serves both.
  Plans& p = *plans_;
  const auto& k = kernels::active();
  const std::size_t npts = p.points();
  const PhysicalGradients g = gradients(theta, false);
  double* fx = p.phys[4].get();
  double* fy = p.phys[5].get();
  if (advection) {
    double* psi = p.phys[6].get();
    synthesize(theta, Multiplier::kInvSqrt, psi);
    k.advect_flux(npts, g.theta_x.data(), g.theta_y.data(), psi, fx, fy);
  } else {
    std::fill_n(fx, npts, 0.0);
    std::fill_n(fy, npts, 0.0);
  }
  if (p_laplacian) k.plap_flux_add(npts, plap_coeff, g.theta_x.data(), g.theta_y.data(), fx, fy);

  const int n = theta.cutoff();
  SpectralField& flux_x = flux_x_;
  SpectralField& flux_y = flux_y_;
  if (flux_x.cutoff() != n) flux_x = flux_y = SpectralField(n);
  analyze(fx, flux_x);
  analyze(fy, flux_y);
  for (int ky = -n; ky <= n; ++ky) {
    for (int kx = 0; kx <= n; ++kx) {
      const cplx d = double(kx) * flux_x.at(kx, ky) + double(ky) * flux_y.at(kx, ky);
      rhs.at(kx, ky) = cplx(-d.imag(), d.real());
    }
  }
}

void SpectralEngine::advection(const SpectralField& theta, SpectralField& out) {
  nonlinear(theta, true, false, 0.0, out);
  out *= -1.0;
}

void SpectralEngine::p_laplacian(const SpectralField& theta, SpectralField& out) {
  nonlinear(theta, false, true, 1.0, out);
}

double SpectralEngine::grad_quartic(const SpectralField& theta) {
  const PhysicalGradients g = gradients(theta, false);
  const double sum =
      kernels::active().grad_quartic_sum(g.theta_x.size(), g.theta_x.data(), g.theta_y.data());
  return kTorusArea * sum / static_cast<double>(plans_->points());
}

double SpectralEngine::cubic_pairing(const SpectralField& theta) {
  const PhysicalGradients g = gradients(theta, false);
  Plans& p = *plans_;
  double* px = p.phys[4].get();
  double* py = p.phys[5].get();
  synthesize(theta, Multiplier::kInvSqrtDx, px);
  synthesize(theta, Multiplier::kInvSqrtDy, py);
  const double sum = kernels::active().cubic_pairing_sum(g.theta_x.size(), g.theta_x.data(),
                                                         g.theta_y.data(), px, py);
  return kTorusArea * sum / static_cast<double>(p.points());
}

std::pair<double, double> SpectralEngine::max_speed_and_gradient(const SpectralField& theta) {
  const PhysicalGradients g = gradients(theta, true);
  double umax = 0.0;
  double gmax = 0.0;
  for (std::size_t i = 0; i < g.theta_x.size(); ++i) {
    umax = std::max(umax, std::hypot(g.u1[i], g.u2[i]));
    gmax = std::max(gmax, std::hypot(g.theta_x[i], g.theta_y[i]));
  }
  return {umax, gmax};
}

}  // namespace sqg
