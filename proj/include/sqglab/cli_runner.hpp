#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sqglab/forcing.hpp"
#include "sqglab/hamiltonian_sandbox.hpp"
#include "sqglab/integrator.hpp"
#include "sqglab/measure_lab.hpp"

namespace sqg {

enum class RunMode { kSimulate, kEnsemble, kStationary, kSweep, kSandbox, kVerify };

std::string to_string(RunMode mode);
RunMode parse_mode(const std::string& name);

// How the noise amplitudes are built from the config.
struct NoiseRule {
  enum class Kind { kPowerLaw, kShells, kExplicit, kNone };
  Kind kind = Kind::kPowerLaw;
  // power_law: a_j = lambda_j^exponent for lambda_j <= max_lambda
  // (max_lambda = 0 selects (N/2)^2).
  double exponent = -1.0;
  double max_lambda = 0.0;
  std::vector<std::pair<double, double>> shells;  // (lambda, amplitude)
  // explicit: basis enumerated up to max_lambda, one amplitude per entry.
  std::vector<double> amplitudes;

  NoiseSpec build(int cutoff) const;
};

struct SandboxSection {
  std::string system = "quadratic";
  int n = 1;
  sandbox::SandboxConfig config;
  // One comparison per alpha; empty means config.alpha only.
  std::vector<double> alphas;
  std::vector<std::string> observables = {"x1^2", "y1^2", "x1y1"};
};

struct OutputSection {
  std::string dir = "out";
  // Steps between checkpoints in simulate mode (0: final checkpoint only).
  std::uint64_t checkpoint_every = 0;
};

struct RunConfig {
  RunMode mode = RunMode::kSimulate;
  SimConfig sim;
  NoiseRule noise;
  std::vector<std::string> observables = {"M", "E_mhalf", "L2_sq", "H2_diss", "W14_diss"};
  StationaryOptions stationary;
  // Observables whose pooled stationary samples get a histogram and atom check.
  std::vector<std::string> histograms = {"M", "E_mhalf"};
  std::vector<double> sweep_alphas;
  SandboxSection sandbox;
  OutputSection output;
  // verify mode: criteria to run (empty: all).
  std::vector<int> verify_criteria;

  NoiseSpec noise_spec() const { return noise.build(sim.cutoff); }
};

// Parses and validates a JSON run configuration. Unknown keys, missing
// mode-required keys and invalid values raise ConfigError with the dotted key
// path.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
// Every field, defaults included.
nlohmann::json config_to_json(const RunConfig& cfg);

// Binary state snapshot. Layout (all little-endian):
//   "SQGF" | u32 version | u32 0x01020304 | u32 cutoff | f64 time | u64 step |
//   f64 alpha | u64 seed | u64 stream | u64 counter | u64 count |
//   count x (f64 re, f64 im)
// Coefficients are listed for ky = -N..N, kx = 0..N, skipping kx = 0, ky <= 0
// (those follow from conjugate symmetry and k = 0 is zero).
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  double alpha = 0.0;
  StepperState state;
};

std::string encode_checkpoint(const Checkpoint& ck);
// Throws CheckpointError on bad magic, byte order, size or truncation, and
// CheckpointVersionError on a version mismatch.
Checkpoint decode_checkpoint(std::string_view bytes);
// Writes through a temporary file and renames it into place.
void write_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& path);

struct ExecOptions {
  std::optional<std::string> out_dir;
  std::optional<std::string> resume;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0: default_thread_count()
};

// Runs the configured mode and writes its CSVs and manifest.json into the
// output directory. Returns the process exit status; module errors are
// caught, logged, and recorded in the manifest.
int execute(const RunConfig& cfg, const ExecOptions& options, std::ostream& log);

// %.17g
std::string format_double(double v);

}  // namespace sqg
