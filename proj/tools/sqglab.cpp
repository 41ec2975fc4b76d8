// Command-line front end: sqglab <mode> --config PATH [--out DIR] [--resume CK]
// [--seed S] [--threads K]. The subcommand selects the mode; a "mode" entry in
// the config must agree with it or be absent.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqglab/cli_runner.hpp"
#include "sqglab/errors.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sqg::ConfigError("--config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral laboratory for stochastic SQG"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resume;
  std::uint64_t seed = 0;
  int threads = 0;
  const char* modes[] = {"simulate", "ensemble", "stationary", "sweep", "sandbox", "verify"};
  for (const char* m : modes) {
    auto* sub = app.add_subcommand(m, std::string("run the ") + m + " mode");
    auto* cfg = sub->add_option("--config", config_path, "JSON run configuration");
    if (std::string(m) != "verify") cfg->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    if (std::string(m) == "simulate") {
      sub->add_option("--resume", resume, "checkpoint to resume from")->check(CLI::ExistingFile);
    }
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--threads", threads, "worker threads (default: SQGLAB_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();

  sqg::RunConfig cfg;
  try {
    nlohmann::json doc = config_path.empty() ? nlohmann::json::object()
                                             : nlohmann::json::parse(read_file(config_path));
    if (doc.contains("mode") && doc["mode"] != mode) {
      throw sqg::ConfigError("mode", "config says '" + doc["mode"].dump() + "' but the subcommand is '" +
                                         mode + "'");
    }
    doc["mode"] = mode;
    cfg = sqg::parse_config(doc.dump());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed config: " << e.what() << '\n';
    return 2;
  } catch (const sqg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  sqg::ExecOptions opts;
  if (sub->count("--out")) opts.out_dir = out_dir;
  if (sub->get_option_no_throw("--resume") && sub->count("--resume")) opts.resume = resume;
  if (sub->count("--seed")) opts.seed = seed;
  opts.threads = threads;
  return sqg::execute(cfg, opts, std::cout);
}
