#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sqglab/forcing.hpp"
#include "sqglab/functionals.hpp"
#include "sqglab/integrator.hpp"

namespace sqg {

// Time averages of a set of observables with batch-means standard errors.
// A ledger is a list of contiguous batches; merging concatenates batch lists,
// so merged statistics depend only on the merge order.
class MomentLedger {
 public:
  struct Batch {
    std::size_t count = 0;
    std::vector<double> mean;
  };

  MomentLedger() = default;
  explicit MomentLedger(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t count() const { return count_; }
  const std::vector<Batch>& batches() const { return batches_; }
  double burn_in() const { return burn_in_; }
  std::size_t stride() const { return stride_; }
  void set_window(double burn_in, std::size_t stride) {
    burn_in_ = burn_in;
    stride_ = stride;
  }

  // Appends one batch built from rows [row][observable].
  void add_batch(const std::vector<std::vector<double>>& rows);
  void merge(const MomentLedger& other);

  std::ptrdiff_t index_of(const std::string& name) const;
  double mean(const std::string& name) const;
  double se(const std::string& name) const;
  // Plain sample variance (ignores correlation; reported for reference).
  double variance(const std::string& name) const;

  struct Estimate {
    double mean = 0.0;
    double se = 0.0;
  };
  // sum_i c_i <O_i>, with the standard error taken from the batch means of the
  // combined series.
  Estimate combination(const std::vector<std::pair<std::string, double>>& terms) const;

 private:
  std::size_t column(const std::string& name) const;

  std::vector<std::string> names_;
  std::vector<Batch> batches_;
  std::size_t count_ = 0;
  // Welford accumulators
  std::vector<double> mean_, m2_;
  double burn_in_ = 0.0;
  std::size_t stride_ = 1;
};

// Ledger over rows whose time is >= burn_in, in `batches` contiguous batches
// (the last batch takes the remainder). Throws EstimationError when fewer than
// 2 * batches rows remain.
MomentLedger time_average(const std::vector<std::string>& names, const std::vector<double>& times,
                          const std::vector<std::vector<double>>& rows, double burn_in,
                          std::size_t stride = 1, std::size_t batches = 20);

struct ResidualReport {
  std::string name;
  double estimate = 0.0;
  double target = 0.0;
  double residual = 0.0;  // estimate - target
  double se = 0.0;
};

// Observables needed by stationary_residuals.
std::vector<std::string> stationary_observables();

// Residuals of the stationary identities:
//   H1:           <H2 + W14> - A_0/2
//   L2, L2_printed: <I> - A_{-1/2}/2 for both cubic signs
//   q<q>, q<q>_printed (q = 2, 3):
//     <M^{q-1}(H2 + W14)> - (A_0/2)<M^{q-1}> - c (q-1) <M^{q-2} S>
//   with c = 1/2 (Ito-derived) or c = 1 (printed).
std::vector<ResidualReport> stationary_residuals(const MomentLedger& ledger, const NoiseSpec& spec);

struct HistogramSpec {
  std::string observable;
  // Explicit bin edges; empty selects the Freedman-Diaconis rule.
  std::vector<double> edges;
  std::size_t min_samples = 1000;
  // Atom if maxmass(h/4) / maxmass(h) exceeds this.
  double atom_ratio = 0.5;
};

struct AtomReport {
  std::string observable;
  std::vector<double> edges;   // bins at the base width h
  std::vector<double> masses;  // sum to 1
  std::array<double, 3> widths{};
  std::array<double, 3> max_mass{};
  double ratio = 1.0;  // max_mass[2] / max_mass[0]
  bool degenerate = false;
  bool atom = false;
};

AtomReport histogram_atom_check(const std::vector<double>& samples, const HistogramSpec& spec);

struct GramResult {
  Eigen::MatrixXd matrix;
  double determinant = 0.0;
  double min_eigenvalue = 0.0;
};

// M_ij = sum_m a_m^2 (f_i'(theta), e_m)(f_j'(theta), e_m), the inner products
// taken by quadrature on the padded grid.
GramResult casimir_gram(const SpectralField& theta, const std::vector<ScalarFunction>& fs,
                        const NoiseSpec& spec, const GridSpec& grid);

// 1 / (alpha lambda_min^2), lambda_min the smallest forced eigenvalue.
double diffusive_time(double alpha, const NoiseSpec& spec);

struct StationaryOptions {
  std::vector<std::string> observables = stationary_observables();
  double burn_in_diffusive = 10.0;
  double sample_diffusive = 20.0;
  // Observation stride in steps.
  int sample_every = 10;
  std::size_t batches = 20;
  // Observables whose post-burn-in samples are kept (pooled over members).
  std::vector<std::string> keep_samples = {"M", "E_mhalf"};
  int threads = 0;
};

struct StationaryResult {
  double alpha = 0.0;
  double burn_in = 0.0;
  double sample_time = 0.0;
  std::size_t members = 0;
  MomentLedger ledger;  // pooled over successful members
  std::vector<ResidualReport> residuals;
  std::vector<std::pair<std::string, std::vector<double>>> samples;
  std::vector<std::pair<std::uint64_t, std::string>> failures;
  double max_cfl = 0.0;

  const std::vector<double>& samples_of(const std::string& name) const;
};

// Runs cfg.ensemble_size members for burn-in + sampling time (cfg.horizon is
// overridden) and pools their post-burn-in time averages in member order.
StationaryResult stationary_run(SimConfig cfg, const NoiseSpec& noise,
                                const StationaryOptions& options = {});

struct SweepResult {
  std::vector<double> alphas;
  std::vector<StationaryResult> rows;
};

// One stationary run per alpha (strictly decreasing, all > 0); run lengths are
// fixed in diffusive times, so they scale as 1/alpha.
SweepResult inviscid_sweep(const SimConfig& base, const NoiseSpec& noise,
                           const std::vector<double>& alphas, const StationaryOptions& options = {});

// True when the column increases monotonically along the rows and the last
// row exceeds the first by more than `k` combined standard errors.
bool monotone_growth(const std::vector<double>& mean, const std::vector<double>& se, double k = 3.0);

}  // namespace sqg
