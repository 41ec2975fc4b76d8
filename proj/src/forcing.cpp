#include "sqglab/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "sqglab/errors.hpp"

namespace sqg {

namespace {

constexpr double kModeNorm = 1.0 / (kPi * std::numbers::sqrt2);

bool is_representative(int kx, int ky) { return kx > 0 || (kx == 0 && ky > 0); }

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

EigenBasis enumerate_basis(double max_lambda) {
  EigenBasis basis;
  if (max_lambda < 1.0) return basis;
  const int kmax = static_cast<int>(std::floor(std::sqrt(max_lambda)));
  for (int kx = 0; kx <= kmax; ++kx) {
    for (int ky = -kmax; ky <= kmax; ++ky) {
      const int k2 = kx * kx + ky * ky;
      if (!is_representative(kx, ky) || k2 > max_lambda) continue;
      for (Parity p : {Parity::kCosine, Parity::kSine}) {
        basis.push_back({double(k2), {kx, ky}, p, kModeNorm});
      }
    }
  }
  std::sort(basis.begin(), basis.end(), [](const BasisMode& a, const BasisMode& b) {
    return std::tuple(a.lambda, a.k.kx, a.k.ky, int(a.parity)) <
           std::tuple(b.lambda, b.k.kx, b.k.ky, int(b.parity));
  });
  return basis;
}

int NoiseSpec::max_wavenumber() const {
  int m = 0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (amplitudes[j] != 0.0) m = std::max({m, std::abs(basis[j].k.kx), std::abs(basis[j].k.ky)});
  }
  return m;
}

double NoiseSpec::min_forced_lambda() const {
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (amplitudes[j] != 0.0) return basis[j].lambda;
  }
  return 0.0;
}

bool NoiseSpec::is_zero() const {
  return std::all_of(amplitudes.begin(), amplitudes.end(), [](double a) { return a == 0.0; });
}

NoiseSpec power_law_noise(double exponent, double max_lambda) {
  NoiseSpec spec;
  spec.basis = enumerate_basis(max_lambda);
  spec.amplitudes.reserve(spec.basis.size());
  for (const auto& m : spec.basis) spec.amplitudes.push_back(std::pow(m.lambda, exponent));
  return spec;
}

NoiseSpec shell_noise(const std::vector<std::pair<double, double>>& shells) {
  double top = 0.0;
  for (const auto& [lambda, amp] : shells) top = std::max(top, lambda);
  NoiseSpec spec;
  spec.basis = enumerate_basis(top);
  spec.amplitudes.assign(spec.basis.size(), 0.0);
  for (std::size_t j = 0; j < spec.basis.size(); ++j) {
    for (const auto& [lambda, amp] : shells) {
      if (spec.basis[j].lambda == lambda) spec.amplitudes[j] = amp;
    }
  }
  return spec;
}

NoiseSpec explicit_noise(const EigenBasis& basis, std::vector<double> amplitudes) {
  if (amplitudes.size() > basis.size()) {
    throw ConfigError("noise.amplitudes", "more amplitudes than basis functions");
  }
  amplitudes.resize(basis.size(), 0.0);
  return {basis, std::move(amplitudes)};
}

double spectral_sum(const NoiseSpec& spec, double s) {
  double acc = 0.0;
  for (std::size_t j = 0; j < spec.basis.size(); ++j) {
    const double a = spec.amplitudes[j];
    if (a != 0.0) acc += std::pow(spec.basis[j].lambda, s) * a * a;
  }
  return acc;
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  constexpr std::uint64_t kM0 = 0xD2511F53u;
  constexpr std::uint64_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kM0 * ctr[0];
    const std::uint64_t p1 = kM1 * ctr[2];
    ctr = {hi32(p1) ^ ctr[1] ^ key[0], lo32(p1), hi32(p0) ^ ctr[3] ^ key[1], lo32(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

std::array<std::uint32_t, 4> RngStream::block(std::uint64_t counter) const {
  return philox4x32_10({lo32(counter), hi32(counter), lo32(stream_), hi32(stream_)},
                       {lo32(seed_), hi32(seed_)});
}

void RngStream::normals(std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const auto b = block(counter_++);
    const double u1 = to_open_unit(b[0], b[1]);
    const double u2 = to_open_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phase = 2.0 * kPi * u2;
    out[i] = r * std::cos(phase);
    if (i + 1 < out.size()) out[i + 1] = r * std::sin(phase);
  }
}

double RngStream::normal() {
  double z = 0.0;
  normals({&z, 1});
  return z;
}

double RngStream::uniform() {
  const auto b = block(counter_++);
  return to_open_unit(b[0], b[1]);
}

void add_basis_mode(SpectralField& field, const BasisMode& mode, double c) {
  const int kx = mode.k.kx;
  const int ky = mode.k.ky;
  if (kx > field.cutoff() || std::abs(ky) > field.cutoff()) {
    throw DimensionError("basis mode outside the field cutoff");
  }
  // cos(k.x) = (e^{ik.x} + e^{-ik.x}) / 2, sin(k.x) = (e^{ik.x} - e^{-ik.x}) / (2i)
  const double h = 0.5 * c * mode.normalization;
  const cplx add = mode.parity == Parity::kCosine ? cplx(h, 0.0) : cplx(0.0, -h);
  field.at(kx, ky) += add;
  if (kx == 0) field.at(0, -ky) = std::conj(field.at(0, ky));
}

double project_onto(const SpectralField& field, const BasisMode& mode) {
  const cplx t = field.coeff(mode.k);
  const double v = mode.parity == Parity::kCosine ? t.real() : -t.imag();
  return kTorusArea * mode.normalization * v;
}

double noise_quadratic_variation(const SpectralField& field, const NoiseSpec& spec) {
  double acc = 0.0;
  for (std::size_t j = 0; j < spec.basis.size(); ++j) {
    const double a = spec.amplitudes[j];
    if (a == 0.0) continue;
    const double p = project_onto(field, spec.basis[j]);
    acc += a * a * p * p;
  }
  return acc;
}

SpectralField sample_increment(const NoiseSpec& spec, double dt, RngStream& rng, int cutoff) {
  if (dt < 0.0) throw ConfigError("dt", "noise increment needs dt >= 0");
  SpectralField out(cutoff);
  std::vector<double> xi(spec.size());
  rng.normals(xi);
  const double sdt = std::sqrt(dt);
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double a = spec.amplitudes[j];
    if (a != 0.0) add_basis_mode(out, spec.basis[j], a * sdt * xi[j]);
  }
  return out;
}

}  // namespace sqg
