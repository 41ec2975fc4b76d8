#include "sqglab/kernels.hpp"

#if defined(__x86_64__) && defined(SQGLAB_HAVE_AVX2)

#include <immintrin.h>

namespace sqg::kernels {

namespace {

void advect_flux(std::size_t n, const double* tx, const double* ty, const double* psi,
                 double* fx, double* fy) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_loadu_pd(psi + i);
    const __m256d a = _mm256_mul_pd(p, _mm256_loadu_pd(ty + i));
    _mm256_storeu_pd(fx + i, _mm256_xor_pd(a, sign));
    _mm256_storeu_pd(fy + i, _mm256_mul_pd(p, _mm256_loadu_pd(tx + i)));
  }
  for (; i < n; ++i) {
    fx[i] = -(psi[i] * ty[i]);
    fy[i] = psi[i] * tx[i];
  }
}

void plap_flux_add(std::size_t n, double c, const double* tx, const double* ty, double* fx,
                   double* fy) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(tx + i);
    const __m256d y = _mm256_loadu_pd(ty + i);
    const __m256d g = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
    const __m256d ax = _mm256_mul_pd(cv, _mm256_mul_pd(g, x));
    const __m256d ay = _mm256_mul_pd(cv, _mm256_mul_pd(g, y));
    _mm256_storeu_pd(fx + i, _mm256_add_pd(_mm256_loadu_pd(fx + i), ax));
    _mm256_storeu_pd(fy + i, _mm256_add_pd(_mm256_loadu_pd(fy + i), ay));
  }
  for (; i < n; ++i) {
    const double g = tx[i] * tx[i] + ty[i] * ty[i];
    fx[i] += c * (g * tx[i]);
    fy[i] += c * (g * ty[i]);
  }
}

double horizontal(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double grad_quartic_sum(std::size_t n, const double* tx, const double* ty) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(tx + i);
    const __m256d y = _mm256_loadu_pd(ty + i);
    const __m256d g = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(g, g));
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double g = tx[i] * tx[i] + ty[i] * ty[i];
    tail += g * g;
  }
  return horizontal(acc) + tail;
}

double cubic_pairing_sum(std::size_t n, const double* tx, const double* ty, const double* px,
                         const double* py) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(tx + i);
    const __m256d y = _mm256_loadu_pd(ty + i);
    const __m256d g = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
    const __m256d d = _mm256_add_pd(_mm256_mul_pd(x, _mm256_loadu_pd(px + i)),
                                    _mm256_mul_pd(y, _mm256_loadu_pd(py + i)));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(g, d));
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double g = tx[i] * tx[i] + ty[i] * ty[i];
    tail += g * (tx[i] * px[i] + ty[i] * py[i]);
  }
  return horizontal(acc) + tail;
}

void scale_complex(std::size_t n, std::complex<double>* z, const double* m) {
  auto* d = reinterpret_cast<double*>(z);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // (m0, m0, m1, m1)
    const __m128d mm = _mm_loadu_pd(m + i);
    const __m256d w = _mm256_permute4x64_pd(_mm256_castpd128_pd256(mm), 0b01010000);
    _mm256_storeu_pd(d + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(d + 2 * i), w));
  }
  for (; i < n; ++i) {
    d[2 * i] *= m[i];
    d[2 * i + 1] *= m[i];
  }
}

void axpy_complex(std::size_t n, double a, const std::complex<double>* x,
                  std::complex<double>* y) {
  const auto* xs = reinterpret_cast<const double*>(x);
  auto* ys = reinterpret_cast<double*>(y);
  const std::size_t m = 2 * n;
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(xs + i));
    _mm256_storeu_pd(ys + i, _mm256_add_pd(_mm256_loadu_pd(ys + i), prod));
  }
  for (; i < m; ++i) {
    ys[i] += a * xs[i];
  }
}

constexpr KernelTable kAvx2{
    "avx2",            advect_flux,   plap_flux_add, grad_quartic_sum,
    cubic_pairing_sum, scale_complex, axpy_complex,
};

}  // namespace

const KernelTable* avx2_table() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2 : nullptr;
}

}  // namespace sqg::kernels

#else

namespace sqg::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace sqg::kernels

#endif
