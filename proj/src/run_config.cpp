#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sqglab/cli_runner.hpp"
#include "sqglab/errors.hpp"

namespace sqg {

using nlohmann::json;

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kSimulate: return "simulate";
    case RunMode::kEnsemble: return "ensemble";
    case RunMode::kStationary: return "stationary";
    case RunMode::kSweep: return "sweep";
    case RunMode::kSandbox: return "sandbox";
    case RunMode::kVerify: return "verify";
  }
  return "simulate";
}

RunMode parse_mode(const std::string& name) {
  for (RunMode m : {RunMode::kSimulate, RunMode::kEnsemble, RunMode::kStationary,
                    RunMode::kSweep, RunMode::kSandbox, RunMode::kVerify}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("mode", "unknown mode '" + name + "'");
}

NoiseSpec NoiseRule::build(int cutoff) const {
  const double default_max = std::pow(0.5 * cutoff, 2);
  switch (kind) {
    case Kind::kPowerLaw:
      return power_law_noise(exponent, max_lambda > 0.0 ? max_lambda : default_max);
    case Kind::kShells:
      return shell_noise(shells);
    case Kind::kExplicit: {
      EigenBasis basis = enumerate_basis(max_lambda > 0.0 ? max_lambda : default_max);
      if (basis.size() != amplitudes.size()) {
        throw ConfigError("noise.amplitudes",
                          "expected " + std::to_string(basis.size()) + " amplitudes, got " +
                              std::to_string(amplitudes.size()));
      }
      return explicit_noise(basis, amplitudes);
    }
    case Kind::kNone:
      return NoiseSpec{};
  }
  return NoiseSpec{};
}

namespace {

// A JSON object being consumed; finish() rejects keys nobody asked for.
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return nullptr;
    return &node_->at(key);
  }

  template <typename T>
  bool get(const std::string& key, T& out) {
    const json* v = raw(key);
    if (!v) return false;
    try {
      out = v->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(key_path(key), std::string("bad value: ") + e.what());
    }
    return true;
  }

  template <typename T>
  void require(const std::string& key, T& out) {
    if (!get(key, out)) throw ConfigError(key_path(key), "missing required key");
  }

  Section sub(const std::string& key) { return Section(raw(key), key_path(key)); }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) throw ConfigError(key_path(key), "unknown key");
    }
  }

 private:
  const json* node_;
  std::string path_;
  std::set<std::string> seen_;
};

StochasticScheme parse_scheme(const std::string& s) {
  if (s == "exponential") return StochasticScheme::kImexExponential;
  if (s == "euler_maruyama") return StochasticScheme::kImexEm;
  throw ConfigError("sim.scheme", "expected 'exponential' or 'euler_maruyama'");
}

std::string scheme_name(StochasticScheme s) {
  return s == StochasticScheme::kImexEm ? "euler_maruyama" : "exponential";
}

void read_sim(Section& s, SimConfig& sim, RunMode mode) {
  const bool needs_horizon = mode == RunMode::kSimulate || mode == RunMode::kEnsemble;
  const bool needs_alpha = mode != RunMode::kSweep;
  if (needs_alpha) {
    s.require("alpha", sim.alpha);
  } else {
    s.get("alpha", sim.alpha);
  }
  s.require("dt", sim.dt);
  if (needs_horizon) {
    s.require("horizon", sim.horizon);
  } else if (!s.get("horizon", sim.horizon)) {
    sim.horizon = sim.dt;  // replaced by the stationary run lengths
  }
  s.require("cutoff", sim.cutoff);
  s.get("padding", sim.padding);
  s.get("advection", sim.enable_advection);
  s.get("p_laplacian", sim.enable_p_laplacian);
  s.get("noise", sim.enable_noise);
  std::string scheme = scheme_name(sim.stochastic_scheme);
  s.get("scheme", scheme);
  sim.stochastic_scheme = parse_scheme(scheme);
  s.get("seed", sim.seed);
  s.get("ensemble_size", sim.ensemble_size);
  s.get("observe_every", sim.observe_every);
  s.get("noise_substeps", sim.noise_substeps);
  s.get("cfl_limit", sim.cfl_limit);
  s.get("identical_seeds", sim.identical_seeds);
  if (!(sim.dt > 0.0)) throw ConfigError("sim.dt", "must be > 0");
  s.finish();
}

void read_initial(Section& s, InitialCondition& ic) {
  std::string kind = "random";
  ic.kind = InitialCondition::Kind::kRandom;
  s.get("kind", kind);
  if (kind == "zero") {
    ic.kind = InitialCondition::Kind::kZero;
  } else if (kind == "modes") {
    ic.kind = InitialCondition::Kind::kModes;
  } else if (kind != "random") {
    throw ConfigError("initial.kind", "expected 'zero', 'modes' or 'random'");
  }
  if (const json* modes = s.raw("modes")) {
    if (!modes->is_array()) throw ConfigError("initial.modes", "expected an array");
    for (std::size_t i = 0; i < modes->size(); ++i) {
      Section m(&(*modes)[i], "initial.modes[" + std::to_string(i) + "]");
      std::vector<int> k;
      m.require("k", k);
      if (k.size() != 2) throw ConfigError(m.key_path("k"), "expected [kx, ky]");
      InitialCondition::Mode mode{{k[0], k[1]}, 0.0, 0.0};
      m.get("cos", mode.cos_amp);
      m.get("sin", mode.sin_amp);
      m.finish();
      ic.modes.push_back(mode);
    }
  }
  s.get("band", ic.band);
  s.get("rms", ic.rms);
  s.get("slope", ic.slope);
  if (ic.kind == InitialCondition::Kind::kModes && ic.modes.empty()) {
    throw ConfigError("initial.modes", "missing required key");
  }
  s.finish();
}

void read_noise(Section& s, NoiseRule& rule) {
  std::string kind = "power_law";
  s.get("rule", kind);
  if (kind == "power_law") {
    rule.kind = NoiseRule::Kind::kPowerLaw;
  } else if (kind == "shells") {
    rule.kind = NoiseRule::Kind::kShells;
  } else if (kind == "explicit") {
    rule.kind = NoiseRule::Kind::kExplicit;
  } else if (kind == "none") {
    rule.kind = NoiseRule::Kind::kNone;
  } else {
    throw ConfigError("noise.rule", "expected power_law, shells, explicit or none");
  }
  s.get("exponent", rule.exponent);
  s.get("max_lambda", rule.max_lambda);
  if (const json* shells = s.raw("shells")) {
    try {
      for (const auto& e : *shells) rule.shells.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    } catch (const json::exception&) {
      throw ConfigError("noise.shells", "expected [[lambda, amplitude], ...]");
    }
  }
  s.get("amplitudes", rule.amplitudes);
  if (rule.kind == NoiseRule::Kind::kShells && rule.shells.empty()) {
    throw ConfigError("noise.shells", "missing required key");
  }
  if (rule.kind == NoiseRule::Kind::kExplicit && rule.amplitudes.empty()) {
    throw ConfigError("noise.amplitudes", "missing required key");
  }
  s.finish();
}

void check_observables(const std::vector<std::string>& names, const std::string& key) {
  for (const auto& n : names) {
    if (!ObservableSet::is_known(n)) throw ConfigError(key, "unknown observable '" + n + "'");
  }
}

sandbox::Stepper parse_stepper(const std::string& s) {
  if (s == "explicit") return sandbox::Stepper::kExplicit;
  if (s == "symplectic") return sandbox::Stepper::kSymplectic;
  throw ConfigError("sandbox.stepper", "expected 'explicit' or 'symplectic'");
}

void read_sandbox(Section& s, SandboxSection& sb, RunMode mode) {
  if (mode == RunMode::kSandbox) {
    s.require("system", sb.system);
  } else {
    s.get("system", sb.system);
  }
  s.get("n", sb.n);
  auto& c = sb.config;
  s.get("alpha", c.alpha);
  s.get("alphas", sb.alphas);
  s.get("dt", c.dt);
  s.get("horizon", c.horizon);
  s.get("burn_in", c.burn_in);
  s.get("seed", c.seed);
  s.get("ensemble_size", c.ensemble_size);
  s.get("sample_every", c.sample_every);
  std::string stepper = c.stepper == sandbox::Stepper::kSymplectic ? "symplectic" : "explicit";
  s.get("stepper", stepper);
  c.stepper = parse_stepper(stepper);
  s.get("observables", sb.observables);
  s.finish();
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  Section root(&doc, "");
  RunConfig cfg;
  std::string mode;
  root.require("mode", mode);
  cfg.mode = parse_mode(mode);
  const bool uses_sim = cfg.mode != RunMode::kSandbox && cfg.mode != RunMode::kVerify;

  Section sim = root.sub("sim");
  if (uses_sim) {
    if (!root.has("sim")) throw ConfigError("sim", "missing required section");
    read_sim(sim, cfg.sim, cfg.mode);
  } else if (root.has("sim")) {
    read_sim(sim, cfg.sim, RunMode::kStationary);
  }
  Section initial = root.sub("initial");
  read_initial(initial, cfg.sim.initial);
  Section noise = root.sub("noise");
  read_noise(noise, cfg.noise);
  if (cfg.noise.kind == NoiseRule::Kind::kNone) cfg.sim.enable_noise = false;

  root.get("observables", cfg.observables);
  check_observables(cfg.observables, "observables");

  Section st = root.sub("stationary");
  st.get("burn_in_diffusive", cfg.stationary.burn_in_diffusive);
  st.get("sample_diffusive", cfg.stationary.sample_diffusive);
  st.get("sample_every", cfg.stationary.sample_every);
  st.get("batches", cfg.stationary.batches);
  st.get("histograms", cfg.histograms);
  st.finish();
  check_observables(cfg.histograms, "stationary.histograms");
  if (!(cfg.stationary.burn_in_diffusive >= 0.0)) {
    throw ConfigError("stationary.burn_in_diffusive", "must be >= 0");
  }
  if (!(cfg.stationary.sample_diffusive > 0.0)) {
    throw ConfigError("stationary.sample_diffusive", "must be > 0");
  }
  if (cfg.stationary.sample_every < 1) throw ConfigError("stationary.sample_every", "must be >= 1");
  if (cfg.stationary.batches < 2) throw ConfigError("stationary.batches", "must be >= 2");
  // The stationary residuals need their own observables; user extras follow.
  auto& names = cfg.stationary.observables;
  names = stationary_observables();
  for (const auto& n : cfg.observables) {
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  }
  for (const auto& n : cfg.histograms) {
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  }
  cfg.stationary.keep_samples = cfg.histograms;

  Section sweep = root.sub("sweep");
  if (cfg.mode == RunMode::kSweep) {
    sweep.require("alphas", cfg.sweep_alphas);
    if (cfg.sweep_alphas.empty()) throw ConfigError("sweep.alphas", "must not be empty");
    for (std::size_t i = 0; i < cfg.sweep_alphas.size(); ++i) {
      if (!(cfg.sweep_alphas[i] > 0.0) || (i > 0 && cfg.sweep_alphas[i] >= cfg.sweep_alphas[i - 1])) {
        throw ConfigError("sweep.alphas", "must be positive and strictly decreasing");
      }
    }
  } else {
    sweep.get("alphas", cfg.sweep_alphas);
  }
  sweep.finish();

  Section sb = root.sub("sandbox");
  read_sandbox(sb, cfg.sandbox, cfg.mode);

  Section out = root.sub("output");
  out.get("dir", cfg.output.dir);
  out.get("checkpoint_every", cfg.output.checkpoint_every);
  out.finish();

  Section verify = root.sub("verify");
  verify.get("criteria", cfg.verify_criteria);
  verify.finish();
  for (int c : cfg.verify_criteria) {
    if (c < 1 || c > 11) throw ConfigError("verify.criteria", "criteria are numbered 1..11");
  }
  root.finish();

  // Mode-level validation.
  switch (cfg.mode) {
    case RunMode::kSimulate:
    case RunMode::kEnsemble:
      validate(cfg.sim);
      if (cfg.output.checkpoint_every % static_cast<std::uint64_t>(cfg.sim.observe_every) != 0) {
        throw ConfigError("output.checkpoint_every", "must be a multiple of sim.observe_every");
      }
      break;
    case RunMode::kStationary:
    case RunMode::kSweep: {
      SimConfig probe = cfg.sim;
      if (cfg.mode == RunMode::kSweep) probe.alpha = cfg.sweep_alphas.front();
      if (!(probe.alpha > 0.0)) throw ConfigError("sim.alpha", "stationary runs need alpha > 0");
      probe.horizon = probe.dt;
      validate(probe);
      if (cfg.noise_spec().is_zero()) throw ConfigError("noise", "stationary runs need forcing");
      break;
    }
    case RunMode::kSandbox: {
      const auto sys = sandbox::make_system(cfg.sandbox.system, cfg.sandbox.n);
      sandbox::validate(cfg.sandbox.config);
      for (double a : cfg.sandbox.alphas) {
        if (!(a >= 0.0)) throw ConfigError("sandbox.alphas", "must be >= 0");
      }
      for (const auto& o : cfg.sandbox.observables) sandbox::make_observable(o, sys);
      break;
    }
    case RunMode::kVerify:
      break;
  }
  if (uses_sim) {
    const NoiseSpec spec = cfg.noise_spec();
    if (cfg.sim.enable_noise && spec.max_wavenumber() > cfg.sim.cutoff) {
      throw ConfigError("noise", "forced modes exceed the Galerkin cutoff");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const RunConfig& cfg) {
  const SimConfig& s = cfg.sim;
  json j;
  j["mode"] = to_string(cfg.mode);
  j["sim"] = {{"alpha", s.alpha},
              {"dt", s.dt},
              {"horizon", s.horizon},
              {"cutoff", s.cutoff},
              {"padding", s.padding},
              {"advection", s.enable_advection},
              {"p_laplacian", s.enable_p_laplacian},
              {"noise", s.enable_noise},
              {"scheme", scheme_name(s.stochastic_scheme)},
              {"seed", s.seed},
              {"ensemble_size", s.ensemble_size},
              {"observe_every", s.observe_every},
              {"noise_substeps", s.noise_substeps},
              {"cfl_limit", s.cfl_limit},
              {"identical_seeds", s.identical_seeds}};
  const auto& ic = s.initial;
  json modes = json::array();
  for (const auto& m : ic.modes) {
    modes.push_back({{"k", {m.k.kx, m.k.ky}}, {"cos", m.cos_amp}, {"sin", m.sin_amp}});
  }
  const char* kind = ic.kind == InitialCondition::Kind::kZero    ? "zero"
                     : ic.kind == InitialCondition::Kind::kModes ? "modes"
                                                                 : "random";
  j["initial"] = {{"kind", kind}, {"modes", modes}, {"band", ic.band}, {"rms", ic.rms},
                  {"slope", ic.slope}};
  const auto& n = cfg.noise;
  const char* rule = n.kind == NoiseRule::Kind::kPowerLaw ? "power_law"
                     : n.kind == NoiseRule::Kind::kShells ? "shells"
                     : n.kind == NoiseRule::Kind::kExplicit ? "explicit"
                                                            : "none";
  json shells = json::array();
  for (const auto& [l, a] : n.shells) shells.push_back({l, a});
  j["noise"] = {{"rule", rule}, {"exponent", n.exponent}, {"max_lambda", n.max_lambda},
                {"shells", shells}, {"amplitudes", n.amplitudes}};
  j["observables"] = cfg.observables;
  j["stationary"] = {{"burn_in_diffusive", cfg.stationary.burn_in_diffusive},
                     {"sample_diffusive", cfg.stationary.sample_diffusive},
                     {"sample_every", cfg.stationary.sample_every},
                     {"batches", cfg.stationary.batches},
                     {"histograms", cfg.histograms}};
  j["sweep"] = {{"alphas", cfg.sweep_alphas}};
  const auto& sb = cfg.sandbox;
  j["sandbox"] = {{"system", sb.system},
                  {"n", sb.n},
                  {"alpha", sb.config.alpha},
                  {"alphas", sb.alphas},
                  {"dt", sb.config.dt},
                  {"horizon", sb.config.horizon},
                  {"burn_in", sb.config.burn_in},
                  {"seed", sb.config.seed},
                  {"ensemble_size", sb.config.ensemble_size},
                  {"sample_every", sb.config.sample_every},
                  {"stepper", sb.config.stepper == sandbox::Stepper::kSymplectic ? "symplectic"
                                                                                 : "explicit"},
                  {"observables", sb.observables}};
  j["output"] = {{"dir", cfg.output.dir}, {"checkpoint_every", cfg.output.checkpoint_every}};
  j["verify"] = {{"criteria", cfg.verify_criteria}};
  return j;
}

}  // namespace sqg
