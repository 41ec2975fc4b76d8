#include "sqglab/measure_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqglab/errors.hpp"

namespace sqg {

MomentLedger::MomentLedger(std::vector<std::string> names)
    : names_(std::move(names)), mean_(names_.size(), 0.0), m2_(names_.size(), 0.0) {}

std::ptrdiff_t MomentLedger::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : it - names_.begin();
}

std::size_t MomentLedger::column(const std::string& name) const {
  const auto i = index_of(name);
  if (i < 0) throw ConfigError("observables", "ledger has no observable '" + name + "'");
  return static_cast<std::size_t>(i);
}

void MomentLedger::add_batch(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return;
  const std::size_t no = names_.size();
  Batch b;
  b.count = rows.size();
  b.mean.assign(no, 0.0);
  for (const auto& row : rows) {
    if (row.size() != no) throw DimensionError("ledger row width mismatch");
    ++count_;
    const double n = static_cast<double>(count_);
    for (std::size_t o = 0; o < no; ++o) {
      b.mean[o] += row[o];
      const double d = row[o] - mean_[o];
      mean_[o] += d / n;
      m2_[o] += d * (row[o] - mean_[o]);
    }
  }
  for (double& v : b.mean) v /= static_cast<double>(b.count);
  batches_.push_back(std::move(b));
}

void MomentLedger::merge(const MomentLedger& other) {
  if (other.count_ == 0) return;
  if (count_ == 0 && names_.empty()) {
    *this = other;
    return;
  }
  if (other.names_ != names_) throw DimensionError("merging ledgers with different observables");
  // Chan et al. pairwise update
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t o = 0; o < names_.size(); ++o) {
    const double d = other.mean_[o] - mean_[o];
    mean_[o] += d * nb / n;
    m2_[o] += other.m2_[o] + d * d * na * nb / n;
  }
  count_ += other.count_;
  batches_.insert(batches_.end(), other.batches_.begin(), other.batches_.end());
}

double MomentLedger::mean(const std::string& name) const {
  if (count_ == 0) throw EstimationError("empty ledger");
  return mean_[column(name)];
}

double MomentLedger::variance(const std::string& name) const {
  if (count_ < 2) throw EstimationError("variance needs >= 2 samples");
  return m2_[column(name)] / static_cast<double>(count_ - 1);
}

double MomentLedger::se(const std::string& name) const {
  return combination({{name, 1.0}}).se;
}

MomentLedger::Estimate MomentLedger::combination(
    const std::vector<std::pair<std::string, double>>& terms) const {
  if (count_ < 2 || batches_.size() < 2) {
    throw EstimationError("standard error needs >= 2 samples in >= 2 batches");
  }
  std::vector<std::pair<std::size_t, double>> cols;
  for (const auto& [name, c] : terms) cols.emplace_back(column(name), c);
  auto combine = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (const auto& [i, c] : cols) s += c * v[i];
    return s;
  };
  const double n = static_cast<double>(count_);
  double grand = 0.0;
  for (const auto& b : batches_) grand += static_cast<double>(b.count) * combine(b.mean);
  grand /= n;
  // Weighted batch-means variance; reduces to s_b^2 / B for equal batches.
  double ss = 0.0;
  for (const auto& b : batches_) {
    const double d = combine(b.mean) - grand;
    ss += static_cast<double>(b.count) * d * d;
  }
  const double nb = static_cast<double>(batches_.size());
  return {combine(mean_), std::sqrt(ss / (nb - 1.0) / n)};
}

MomentLedger time_average(const std::vector<std::string>& names, const std::vector<double>& times,
                          const std::vector<std::vector<double>>& rows, double burn_in,
                          std::size_t stride, std::size_t batches) {
  if (times.size() != rows.size()) throw DimensionError("times/rows size mismatch");
  if (stride == 0 || batches < 2) throw ConfigError("stationary.batches", "need stride >= 1, batches >= 2");
  std::vector<std::vector<double>> kept;
  const auto first = static_cast<std::size_t>(
      std::lower_bound(times.begin(), times.end(), burn_in) - times.begin());
  for (std::size_t i = first; i < rows.size(); i += stride) kept.push_back(rows[i]);
  if (kept.size() < 2 * batches) {
    throw EstimationError("only " + std::to_string(kept.size()) +
                          " samples after burn-in; need at least " + std::to_string(2 * batches));
  }
  MomentLedger ledger(names);
  ledger.set_window(burn_in, stride);
  const std::size_t per = kept.size() / batches;
  for (std::size_t b = 0; b < batches; ++b) {
    const auto first = kept.begin() + static_cast<std::ptrdiff_t>(b * per);
    const auto last = b + 1 == batches ? kept.end() : first + static_cast<std::ptrdiff_t>(per);
    ledger.add_batch({first, last});
  }
  return ledger;
}

std::vector<std::string> stationary_observables() {
  return {"M",        "E_mhalf",   "L2_sq",   "H2_diss", "W14_diss", "I_diss",
          "I_diss_printed", "noise_qv", "Mpow_1", "Mpow_2", "Mq_diss_2", "Mq_diss_3",
          "Mq_qv_2",  "Mq_qv_3"};
}

std::vector<ResidualReport> stationary_residuals(const MomentLedger& ledger,
                                                 const NoiseSpec& spec) {
  for (const auto& name : stationary_observables()) {
    if (ledger.index_of(name) < 0) {
      throw ConfigError("observables", "stationary residuals need observable '" + name + "'");
    }
  }
  const double a0 = spectral_sum(spec, 0.0);
  const double ah = spectral_sum(spec, -0.5);
  std::vector<ResidualReport> out;
  auto add = [&](std::string name, const std::vector<std::pair<std::string, double>>& terms,
                 double target) {
    const auto e = ledger.combination(terms);
    out.push_back({std::move(name), e.mean, target, e.mean - target, e.se});
  };
  add("H1", {{"H2_diss", 1.0}, {"W14_diss", 1.0}}, 0.5 * a0);
  add("L2", {{"I_diss", 1.0}}, 0.5 * ah);
  add("L2_printed", {{"I_diss_printed", 1.0}}, 0.5 * ah);
  for (int q : {2, 3}) {
    const std::string qs = std::to_string(q);
    const std::string low = "Mpow_" + std::to_string(q - 1);
    for (double c : {0.5, 1.0}) {
      add("q" + qs + (c == 1.0 ? "_printed" : ""),
          {{"Mq_diss_" + qs, 1.0}, {low, -0.5 * a0}, {"Mq_qv_" + qs, -c * (q - 1)}}, 0.0);
    }
  }
  return out;
}

namespace {

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> bin_masses(const std::vector<double>& samples, double lo, double width,
                               std::size_t bins) {
  std::vector<double> counts(bins, 0.0);
  for (double s : samples) {
    auto b = static_cast<std::size_t>(std::floor((s - lo) / width));
    counts[std::min(b, bins - 1)] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(samples.size());
  return counts;
}

}  // namespace

AtomReport histogram_atom_check(const std::vector<double>& samples, const HistogramSpec& spec) {
  if (samples.size() < spec.min_samples) {
    throw EstimationError("atom check needs >= " + std::to_string(spec.min_samples) +
                          " samples, got " + std::to_string(samples.size()));
  }
  AtomReport rep;
  rep.observable = spec.observable;
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn;
  const double range = *mx - *mn;
  if (!(range > 0.0)) {
    rep.degenerate = true;
    rep.atom = true;
    rep.edges = {lo, lo};
    rep.masses = {1.0};
    rep.max_mass = {1.0, 1.0, 1.0};
    rep.ratio = 1.0;
    return rep;
  }
  double h = 0.0;
  if (!spec.edges.empty()) {
    if (spec.edges.size() < 2) throw ConfigError("histogram.edges", "need >= 2 edges");
    h = (spec.edges.back() - spec.edges.front()) / static_cast<double>(spec.edges.size() - 1);
  } else {
    const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
    const double n = static_cast<double>(samples.size());
    h = 2.0 * iqr / std::cbrt(n);
    if (!(h > 0.0)) h = range / std::ceil(std::sqrt(n));
  }
  for (int level = 0; level < 3; ++level) {
    const double w = h / static_cast<double>(1 << level);
    const auto bins = static_cast<std::size_t>(std::max(1.0, std::ceil(range / w)));
    const auto masses = bin_masses(samples, lo, w, bins);
    rep.widths[level] = w;
    rep.max_mass[level] = *std::max_element(masses.begin(), masses.end());
    if (level == 0) {
      if (!spec.edges.empty()) {
        rep.edges = spec.edges;
        rep.masses.assign(spec.edges.size() - 1, 0.0);
        for (double s : samples) {
          auto it = std::upper_bound(spec.edges.begin(), spec.edges.end(), s);
          auto b = std::clamp<std::ptrdiff_t>(it - spec.edges.begin() - 1, 0,
                                              static_cast<std::ptrdiff_t>(rep.masses.size()) - 1);
          rep.masses[static_cast<std::size_t>(b)] += 1.0 / static_cast<double>(samples.size());
        }
      } else {
        rep.masses = masses;
        for (std::size_t i = 0; i <= bins; ++i) rep.edges.push_back(lo + w * static_cast<double>(i));
      }
    }
  }
  rep.ratio = rep.max_mass[2] / rep.max_mass[0];
  rep.atom = rep.ratio > spec.atom_ratio;
  return rep;
}

GramResult casimir_gram(const SpectralField& theta, const std::vector<ScalarFunction>& fs,
                        const NoiseSpec& spec, const GridSpec& grid) {
  const RealField real = to_physical(theta, grid);
  const std::size_t n = fs.size();
  std::vector<std::size_t> forced;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    if (spec.amplitudes[j] != 0.0) forced.push_back(j);
  }
  // Row i: a_m (f_i'(theta), e_m) over forced m.
  Eigen::MatrixXd proj(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(forced.size()));
  RealField deriv = real;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < real.samples.size(); ++p) {
      deriv.samples[p] = fs[i].derivative(real.samples[p], 1);
    }
    const SpectralField d = to_spectral(deriv, grid);
    for (std::size_t m = 0; m < forced.size(); ++m) {
      const std::size_t j = forced[m];
      proj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) =
          spec.amplitudes[j] * project_onto(d, spec.basis[j]);
    }
  }
  GramResult out;
  out.matrix = proj * proj.transpose();
  out.determinant = n == 0 ? 1.0 : out.matrix.determinant();
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = eig.eigenvalues().minCoeff();
  }
  return out;
}

double diffusive_time(double alpha, const NoiseSpec& spec) {
  const double lam = spec.min_forced_lambda();
  if (!(alpha > 0.0) || !(lam > 0.0)) {
    throw ConfigError("sim.alpha", "diffusive time needs alpha > 0 and a forced mode");
  }
  return 1.0 / (alpha * lam * lam);
}

const std::vector<double>& StationaryResult::samples_of(const std::string& name) const {
  for (const auto& [n, v] : samples) {
    if (n == name) return v;
  }
  throw ConfigError("stationary.keep_samples", "no samples kept for '" + name + "'");
}

StationaryResult stationary_run(SimConfig cfg, const NoiseSpec& noise,
                                const StationaryOptions& options) {
  const double tau = diffusive_time(cfg.alpha, noise);
  StationaryResult res;
  res.alpha = cfg.alpha;
  // Snap both windows to the step grid.
  const double burn_steps = std::ceil(options.burn_in_diffusive * tau / cfg.dt);
  const double sample_steps = std::ceil(options.sample_diffusive * tau / cfg.dt);
  res.burn_in = burn_steps * cfg.dt;
  res.sample_time = sample_steps * cfg.dt;
  cfg.horizon = (burn_steps + sample_steps) * cfg.dt;
  cfg.observe_every = options.sample_every;
  validate(cfg);

  const ObservableSet observables(options.observables, cfg.grid(), noise);
  std::vector<std::size_t> keep_cols;
  for (const auto& name : options.keep_samples) {
    const auto i = observables.index_of(name);
    if (i < 0) throw ConfigError("stationary.keep_samples", "'" + name + "' is not observed");
    keep_cols.push_back(static_cast<std::size_t>(i));
  }

  const auto count = static_cast<std::size_t>(cfg.ensemble_size);
  struct Member {
    std::optional<MomentLedger> ledger;
    std::vector<std::vector<double>> kept;
    std::string error;
    double max_cfl = 0.0;
  };
  std::vector<Member> members(count);
  const int threads = options.threads > 0 ? options.threads : default_thread_count();
  parallel_for(count, threads, [&](std::size_t m) {
    TrajectoryOptions opts;
    opts.member = m;
    try {
      const TrajectoryRecord rec = run_trajectory(cfg, noise, observables, opts);
      // Observation times are exact multiples of dt * stride; compare in steps.
      const double start = res.burn_in - 0.5 * cfg.dt;
      members[m].ledger =
          time_average(observables.names(), rec.times, rec.values, start, 1, options.batches);
      members[m].kept.assign(keep_cols.size(), {});
      for (std::size_t i = 0; i < rec.times.size(); ++i) {
        if (rec.times[i] < start) continue;
        for (std::size_t k = 0; k < keep_cols.size(); ++k) {
          members[m].kept[k].push_back(rec.values[i][keep_cols[k]]);
        }
      }
      members[m].max_cfl = rec.max_cfl;
    } catch (const DivergenceError& e) {
      members[m].error = e.what();
    }
  });

  res.ledger = MomentLedger(observables.names());
  res.ledger.set_window(res.burn_in, static_cast<std::size_t>(options.sample_every));
  for (const auto& name : options.keep_samples) res.samples.emplace_back(name, std::vector<double>{});
  for (std::size_t m = 0; m < count; ++m) {
    if (!members[m].ledger) {
      res.failures.emplace_back(m, members[m].error);
      continue;
    }
    ++res.members;
    res.ledger.merge(*members[m].ledger);
    res.max_cfl = std::max(res.max_cfl, members[m].max_cfl);
    for (std::size_t k = 0; k < keep_cols.size(); ++k) {
      auto& dst = res.samples[k].second;
      dst.insert(dst.end(), members[m].kept[k].begin(), members[m].kept[k].end());
    }
  }
  if (res.members == 0) throw EstimationError("every member of the stationary run diverged");
  const auto& names = observables.names();
  const auto required = stationary_observables();
  const bool has_all = std::all_of(
      required.begin(), required.end(),
      [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); });
  if (has_all) res.residuals = stationary_residuals(res.ledger, noise);
  return res;
}

SweepResult inviscid_sweep(const SimConfig& base, const NoiseSpec& noise,
                           const std::vector<double>& alphas, const StationaryOptions& options) {
  if (alphas.empty()) throw ConfigError("sweep.alphas", "empty alpha list");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw ConfigError("sweep.alphas", "every alpha must be > 0");
    if (i > 0 && !(alphas[i] < alphas[i - 1])) {
      throw ConfigError("sweep.alphas", "alphas must be strictly decreasing");
    }
  }
  SweepResult out;
  out.alphas = alphas;
  for (double a : alphas) {
    SimConfig cfg = base;
    cfg.alpha = a;
    out.rows.push_back(stationary_run(cfg, noise, options));
  }
  return out;
}

bool monotone_growth(const std::vector<double>& mean, const std::vector<double>& se, double k) {
  if (mean.size() < 2) return false;
  for (std::size_t i = 1; i < mean.size(); ++i) {
    if (!(mean[i] > mean[i - 1])) return false;
  }
  const double combined = std::hypot(se.front(), se.back());
  return mean.back() - mean.front() > k * combined;
}

}  // namespace sqg
