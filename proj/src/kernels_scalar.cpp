#include "sqglab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace sqg::kernels {

namespace {

void advect_flux(std::size_t n, const double* tx, const double* ty, const double* psi,
                 double* fx, double* fy) {
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = -(psi[i] * ty[i]);
    fy[i] = psi[i] * tx[i];
  }
}

void plap_flux_add(std::size_t n, double c, const double* tx, const double* ty, double* fx,
                   double* fy) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = tx[i] * tx[i] + ty[i] * ty[i];
    fx[i] += c * (g * tx[i]);
    fy[i] += c * (g * ty[i]);
  }
}

// Four interleaved partial sums, the same association as the 4-lane SIMD path.
double grad_quartic_sum(std::size_t n, const double* tx, const double* ty) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double g = tx[i + l] * tx[i + l] + ty[i + l] * ty[i + l];
      acc[l] += g * g;
    }
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double g = tx[i] * tx[i] + ty[i] * ty[i];
    tail += g * g;
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
}

double cubic_pairing_sum(std::size_t n, const double* tx, const double* ty, const double* px,
                         const double* py) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const std::size_t j = i + l;
      const double g = tx[j] * tx[j] + ty[j] * ty[j];
      acc[l] += g * (tx[j] * px[j] + ty[j] * py[j]);
    }
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double g = tx[i] * tx[i] + ty[i] * ty[i];
    tail += g * (tx[i] * px[i] + ty[i] * py[i]);
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
}

void scale_complex(std::size_t n, std::complex<double>* z, const double* m) {
  auto* d = reinterpret_cast<double*>(z);
  for (std::size_t i = 0; i < n; ++i) {
    d[2 * i] *= m[i];
    d[2 * i + 1] *= m[i];
  }
}

void axpy_complex(std::size_t n, double a, const std::complex<double>* x,
                  std::complex<double>* y) {
  const auto* xs = reinterpret_cast<const double*>(x);
  auto* ys = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    ys[i] += a * xs[i];
  }
}

constexpr KernelTable kScalar{
    "scalar",          advect_flux,   plap_flux_add, grad_quartic_sum,
    cubic_pairing_sum, scale_complex, axpy_complex,
};

const KernelTable* pick_default() {
  if (const char* env = std::getenv("SQGLAB_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && avx2_table() != nullptr) return avx2_table();
  }
  if (const KernelTable* t = avx2_table()) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  if (name == "scalar") {
    current().store(&kScalar, std::memory_order_release);
    return true;
  }
  if (name == "avx2" && avx2_table() != nullptr) {
    current().store(avx2_table(), std::memory_order_release);
    return true;
  }
  return false;
}

}  // namespace sqg::kernels
