#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "sqglab/acceptance.hpp"
#include "sqglab/balance.hpp"
#include "sqglab/cli_runner.hpp"
#include "sqglab/errors.hpp"

#ifndef SQGLAB_BUILD_ID
#define SQGLAB_BUILD_ID "unknown"
#endif

namespace sqg {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot write '" + path.string() + "'");
    row_strings(header);
  }
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::string cell(double v) { return format_double(v); }
std::string cell(const std::string& s) { return s; }

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  int threads;
  std::ostream& log;
  json& manifest;

  fs::path file(const std::string& name) {
    manifest["outputs"].push_back(name);
    return dir / name;
  }
};

int run_simulate(Context& ctx, const std::optional<std::string>& resume) {
  const SimConfig& sim = ctx.cfg.sim;
  const NoiseSpec noise = ctx.cfg.noise_spec();
  const ObservableSet obs(ctx.cfg.observables, sim.grid(), noise);

  std::optional<StepperState> start;
  if (resume) {
    Checkpoint ck = read_checkpoint(*resume);
    if (ck.state.field.cutoff() != sim.cutoff) {
      throw CheckpointError("checkpoint cutoff " + std::to_string(ck.state.field.cutoff()) +
                            " does not match sim.cutoff " + std::to_string(sim.cutoff));
    }
    if (ck.alpha != sim.alpha) throw CheckpointError("checkpoint alpha does not match sim.alpha");
    if (ck.state.step > sim.steps()) throw CheckpointError("checkpoint lies beyond sim.horizon");
    ctx.manifest["resumed_from"] = *resume;
    ctx.manifest["resumed_step"] = ck.state.step;
    start = std::move(ck.state);
  }

  TrajectoryOptions opts;
  if (start) opts.resume = &*start;
  const auto every = ctx.cfg.output.checkpoint_every;
  const fs::path periodic = ctx.dir / "checkpoint.sqgf";
  if (every > 0) {
    opts.on_observe = [&](const StepperState& s) {
      if (s.step > 0 && s.step % every == 0) {
        write_checkpoint(periodic.string(), Checkpoint{sim.alpha, s});
        ctx.manifest["last_checkpoint"] = periodic.string();
      }
    };
  }
  TrajectoryRecord rec;
  try {
    rec = run_trajectory(sim, noise, obs, opts);
  } catch (const TrajectoryDivergence& e) {
    const fs::path p = ctx.dir / "last_finite.sqgf";
    write_checkpoint(p.string(), Checkpoint{sim.alpha, e.last_finite()});
    ctx.manifest["last_checkpoint"] = p.string();
    throw;
  }

  std::vector<std::string> header = {"time"};
  header.insert(header.end(), rec.names.begin(), rec.names.end());
  CsvWriter csv(ctx.file("observables.csv"), header);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    std::vector<std::string> row = {cell(rec.times[i])};
    for (double v : rec.values[i]) row.push_back(cell(v));
    csv.row_strings(row);
  }
  const fs::path fin = ctx.dir / "final.sqgf";
  write_checkpoint(fin.string(), Checkpoint{sim.alpha, rec.final_state});
  ctx.manifest["last_checkpoint"] = fin.string();
  ctx.manifest["final_step"] = rec.final_state.step;
  ctx.manifest["max_cfl"] = rec.max_cfl;
  ctx.manifest["cfl_exceeded"] = rec.cfl_exceeded;
  return 0;
}

bool has_all(const EnsembleStats& stats, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    if (stats.index_of(n) < 0) return false;
  }
  return true;
}

int run_ensemble_mode(Context& ctx) {
  const SimConfig& sim = ctx.cfg.sim;
  const NoiseSpec noise = ctx.cfg.noise_spec();
  const ObservableSet obs(ctx.cfg.observables, sim.grid(), noise);
  const EnsembleStats stats = run_ensemble(sim, noise, obs, ctx.threads);

  json failures = json::array();
  for (const auto& [m, what] : stats.failures) failures.push_back({{"member", m}, {"error", what}});
  ctx.manifest["failures"] = failures;
  ctx.manifest["members_ok"] = stats.members.size();
  if (stats.members.empty()) throw DivergenceError(0.0, "every ensemble member failed");

  CsvWriter csv(ctx.file("ensemble.csv"), {"time", "observable", "mean", "se"});
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    for (std::size_t c = 0; c < stats.names.size(); ++c) {
      csv.row_strings({cell(stats.times[i]), stats.names[c], cell(stats.mean[i][c]),
                       cell(stats.se[i][c])});
    }
  }

  struct Check {
    BalanceIdentity id;
    int q;
    CubicSign sign;
  };
  std::vector<Check> checks = {{BalanceIdentity::kAlp, 1, CubicSign::kDerived},
                               {BalanceIdentity::kHmj, 1, CubicSign::kDerived},
                               {BalanceIdentity::kHmj, 1, CubicSign::kPrinted}};
  for (int q = 1; q <= 3; ++q) checks.push_back({BalanceIdentity::kCet, q, CubicSign::kDerived});
  std::vector<BalanceReport> reports;
  if (sim.alpha > 0.0 && stats.times.size() >= 2) {
    for (const auto& c : checks) {
      if (has_all(stats, balance_observables(c.id, c.q, c.sign))) {
        reports.push_back(ito_residual(c.id, stats, noise, sim.alpha, c.q, c.sign));
      }
    }
  }
  if (!reports.empty()) {
    CsvWriter b(ctx.file("balance.csv"), {"identity", "t0", "t1", "lhs", "rhs", "residual", "se"});
    for (const auto& r : reports) {
      b.row_strings({r.identity, cell(r.t0), cell(r.t1), cell(r.lhs), cell(r.rhs),
                     cell(r.residual), cell(r.monte_carlo_se)});
    }
  }
  return 0;
}

void write_residuals(CsvWriter& csv, const std::vector<ResidualReport>& rows,
                     const std::optional<double>& alpha) {
  for (const auto& r : rows) {
    std::vector<std::string> cells;
    if (alpha) cells.push_back(cell(*alpha));
    for (auto&& c : {r.name, cell(r.estimate), cell(r.target), cell(r.residual), cell(r.se)}) {
      cells.push_back(c);
    }
    csv.row_strings(cells);
  }
}

json failure_list(const StationaryResult& res) {
  json failures = json::array();
  for (const auto& [m, what] : res.failures) failures.push_back({{"member", m}, {"error", what}});
  return failures;
}

void write_histograms(Context& ctx, const StationaryResult& res) {
  if (ctx.cfg.histograms.empty()) return;
  CsvWriter atoms(ctx.file("atoms.csv"),
                  {"observable", "samples", "width", "max_mass", "max_mass_half",
                   "max_mass_quarter", "ratio", "degenerate", "atom"});
  for (const auto& name : ctx.cfg.histograms) {
    const auto& samples = res.samples_of(name);
    HistogramSpec spec;
    spec.observable = name;
    try {
      const AtomReport rep = histogram_atom_check(samples, spec);
      CsvWriter h(ctx.file("histogram_" + name + ".csv"), {"bin_left", "bin_right", "mass"});
      for (std::size_t i = 0; i < rep.masses.size(); ++i) {
        h.row_strings({cell(rep.edges[i]), cell(rep.edges[i + 1]), cell(rep.masses[i])});
      }
      atoms.row_strings({name, std::to_string(samples.size()), cell(rep.widths[0]),
                         cell(rep.max_mass[0]), cell(rep.max_mass[1]), cell(rep.max_mass[2]),
                         cell(rep.ratio), rep.degenerate ? "1" : "0", rep.atom ? "1" : "0"});
    } catch (const EstimationError& e) {
      ctx.log << "histogram " << name << " skipped: " << e.what() << '\n';
      ctx.manifest["warnings"].push_back("histogram " + name + ": " + e.what());
    }
  }
}

StationaryOptions stationary_options(const Context& ctx) {
  StationaryOptions opts = ctx.cfg.stationary;
  opts.threads = ctx.threads;
  return opts;
}

int run_stationary_mode(Context& ctx) {
  const NoiseSpec noise = ctx.cfg.noise_spec();
  const StationaryResult res = stationary_run(ctx.cfg.sim, noise, stationary_options(ctx));
  ctx.manifest["failures"] = failure_list(res);
  ctx.manifest["burn_in"] = res.burn_in;
  ctx.manifest["sample_time"] = res.sample_time;
  ctx.manifest["members_ok"] = res.members;
  ctx.manifest["max_cfl"] = res.max_cfl;
  ctx.manifest["pooled_members"] = res.members > 1;

  CsvWriter csv(ctx.file("stationary.csv"), {"observable", "mean", "se"});
  for (const auto& name : res.ledger.names()) {
    csv.row_strings({name, cell(res.ledger.mean(name)), cell(res.ledger.se(name))});
  }
  CsvWriter r(ctx.file("residuals.csv"), {"name", "estimate", "target", "residual", "se"});
  write_residuals(r, res.residuals, std::nullopt);
  write_histograms(ctx, res);
  return 0;
}

int run_sweep_mode(Context& ctx) {
  const NoiseSpec noise = ctx.cfg.noise_spec();
  const SweepResult sweep =
      inviscid_sweep(ctx.cfg.sim, noise, ctx.cfg.sweep_alphas, stationary_options(ctx));
  CsvWriter csv(ctx.file("sweep.csv"), {"alpha", "observable", "mean", "se"});
  CsvWriter r(ctx.file("sweep_residuals.csv"),
              {"alpha", "name", "estimate", "target", "residual", "se"});
  json rows = json::array();
  std::vector<double> q2_mean, q2_se;
  for (const auto& row : sweep.rows) {
    for (const auto& name : row.ledger.names()) {
      csv.row_strings({cell(row.alpha), name, cell(row.ledger.mean(name)), cell(row.ledger.se(name))});
    }
    write_residuals(r, row.residuals, row.alpha);
    rows.push_back({{"alpha", row.alpha},
                    {"burn_in", row.burn_in},
                    {"sample_time", row.sample_time},
                    {"members_ok", row.members},
                    {"failures", failure_list(row)}});
    q2_mean.push_back(row.ledger.mean("Mq_diss_2"));
    q2_se.push_back(row.ledger.se("Mq_diss_2"));
  }
  ctx.manifest["rows"] = rows;
  ctx.manifest["q2_monotone_growth"] = monotone_growth(q2_mean, q2_se);
  return 0;
}

int run_sandbox_mode(Context& ctx) {
  const auto& sb = ctx.cfg.sandbox;
  const auto sys = sandbox::make_system(sb.system, sb.n);
  std::vector<double> alphas = sb.alphas;
  if (alphas.empty()) alphas.push_back(sb.config.alpha);
  CsvWriter csv(ctx.file("sandbox.csv"),
                {"alpha", "observable", "estimate", "se", "oracle", "residual"});
  for (double a : alphas) {
    sandbox::SandboxConfig c = sb.config;
    c.alpha = a;
    const auto rep = sandbox::stationary_compare(sys, c, sb.observables, ctx.threads);
    for (const auto& row : rep.rows) {
      csv.row_strings({cell(a), row.observable, cell(row.estimate), cell(row.se), cell(row.oracle),
                       cell(row.residual)});
    }
  }
  return 0;
}

int run_verify_mode(Context& ctx) {
  AcceptanceOptions opts;
  opts.criteria = ctx.cfg.verify_criteria;
  opts.threads = ctx.threads;
  opts.scratch_dir = (ctx.dir / "verify_scratch").string();
  opts.log = &ctx.log;
  const auto results = run_acceptance(opts);
  CsvWriter csv(ctx.file("acceptance.csv"), {"criterion", "title", "passed", "detail"});
  json table = json::array();
  bool all = true;
  for (const auto& r : results) {
    std::string detail = r.detail;
    for (char& ch : detail) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    csv.row_strings({std::to_string(r.id), r.title, r.passed ? "1" : "0", detail});
    table.push_back({{"criterion", r.id}, {"title", r.title}, {"passed", r.passed},
                     {"seconds", r.seconds}});
    all = all && r.passed;
  }
  ctx.manifest["acceptance"] = table;
  const auto passed = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  ctx.log << passed << "/" << results.size() << " criteria passed\n";
  return all ? 0 : 1;
}

}  // namespace

int execute(const RunConfig& input, const ExecOptions& options, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  RunConfig cfg = input;
  if (options.seed) {
    cfg.sim.seed = *options.seed;
    cfg.sandbox.config.seed = *options.seed;
  }
  if (options.out_dir) cfg.output.dir = *options.out_dir;
  const int threads = options.threads > 0 ? options.threads : default_thread_count();
  const fs::path dir(cfg.output.dir);

  json manifest;
  manifest["mode"] = to_string(cfg.mode);
  manifest["config"] = config_to_json(cfg);
  manifest["build_id"] = SQGLAB_BUILD_ID;
  manifest["threads"] = threads;
  manifest["seeds"] = {{"sim", cfg.sim.seed}, {"sandbox", cfg.sandbox.config.seed}};
  manifest["outputs"] = json::array();
  manifest["warnings"] = json::array();
  manifest["last_checkpoint"] = nullptr;
  manifest["error"] = nullptr;

  log << "config " << manifest["config"].dump() << '\n';

  int status = 0;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    log << "error: cannot create output directory '" << dir.string() << "': " << ec.message() << '\n';
    return 2;
  }
  Context ctx{cfg, dir, threads, log, manifest};
  try {
    switch (cfg.mode) {
      case RunMode::kSimulate: status = run_simulate(ctx, options.resume); break;
      case RunMode::kEnsemble: status = run_ensemble_mode(ctx); break;
      case RunMode::kStationary: status = run_stationary_mode(ctx); break;
      case RunMode::kSweep: status = run_sweep_mode(ctx); break;
      case RunMode::kSandbox: status = run_sandbox_mode(ctx); break;
      case RunMode::kVerify: status = run_verify_mode(ctx); break;
    }
    manifest["status"] = status == 0 ? "ok" : "failed";
  } catch (const std::exception& e) {
    status = dynamic_cast<const DivergenceError*>(&e) ? 3 : 2;
    manifest["status"] = status == 3 ? "diverged" : "error";
    manifest["error"] = e.what();
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) manifest["error_key"] = ce->key();
    log << "error: " << e.what() << '\n';
    if (!manifest["last_checkpoint"].is_null()) {
      log << "last checkpoint: " << manifest["last_checkpoint"].get<std::string>() << '\n';
    }
  }
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  return status;
}

}  // namespace sqg
