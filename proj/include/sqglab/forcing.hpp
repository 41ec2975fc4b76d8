#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sqglab/spectral_field.hpp"

namespace sqg {

enum class Parity { kCosine, kSine };

// One real eigenfunction of -Delta: normalization * cos(k.x) or
// normalization * sin(k.x), with unit L2 norm on the torus.
struct BasisMode {
  double lambda = 0.0;
  WaveVector k;
  Parity parity = Parity::kCosine;
  double normalization = 0.0;
};

using EigenBasis = std::vector<BasisMode>;

// All real eigenfunctions with |k|^2 <= max_lambda, one representative k per
// conjugate pair (kx > 0, or kx = 0 and ky > 0), ordered by
// (lambda, kx, ky, parity) with cosine first.
EigenBasis enumerate_basis(double max_lambda);

// Noise eta = sum_j a_j e_j W_j over an eigenbasis.
struct NoiseSpec {
  EigenBasis basis;
  std::vector<double> amplitudes;

  std::size_t size() const { return basis.size(); }
  // Largest |kx| or |ky| among modes with a_j != 0 (0 when no mode is forced).
  int max_wavenumber() const;
  // Smallest eigenvalue with a_j != 0 (0 when no mode is forced).
  double min_forced_lambda() const;
  bool is_zero() const;
};

// a_j = lambda_j^exponent for lambda_j <= max_lambda.
NoiseSpec power_law_noise(double exponent, double max_lambda);
// Amplitude per eigenvalue shell; modes in unlisted shells are not forced.
NoiseSpec shell_noise(const std::vector<std::pair<double, double>>& shells);
NoiseSpec explicit_noise(const EigenBasis& basis, std::vector<double> amplitudes);

// A_s = sum_j lambda_j^s a_j^2
double spectral_sum(const NoiseSpec& spec, double s);

// Counter-based normal generator (Philox-4x32-10 + Box-Muller). The output
// for a given (seed, stream, counter) does not depend on platform or on how
// many other streams are in use.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0)
      : seed_(seed), stream_(stream), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  // Number of 128-bit blocks consumed so far.
  std::uint64_t counter() const { return counter_; }

  // Raw Philox block for a counter value; does not advance.
  std::array<std::uint32_t, 4> block(std::uint64_t counter) const;

  // Fills out with independent standard normals; consumes ceil(n / 2) blocks.
  void normals(std::span<double> out);
  double normal();
  // Uniform in (0, 1); consumes one block.
  double uniform();

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
};

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

// field += c * e_j
void add_basis_mode(SpectralField& field, const BasisMode& mode, double c);
// int theta e_j dx
double project_onto(const SpectralField& field, const BasisMode& mode);
// sum_j a_j^2 (int theta e_j dx)^2
double noise_quadratic_variation(const SpectralField& field, const NoiseSpec& spec);

// sum_j a_j sqrt(dt) xi_j e_j on the lattice of the given cutoff.
SpectralField sample_increment(const NoiseSpec& spec, double dt, RngStream& rng, int cutoff);

}  // namespace sqg
