#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sqglab/cli_runner.hpp"
#include "sqglab/errors.hpp"
#include "test_util.hpp"

using namespace sqg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sqglab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string sim_config(double horizon) {
  nlohmann::json j = {{"mode", "simulate"},
                      {"sim",
                       {{"alpha", 0.1},
                        {"dt", 0.01},
                        {"horizon", horizon},
                        {"cutoff", 8},
                        {"seed", 12},
                        {"observe_every", 5}}}};
  return j.dump();
}

int run(const std::string& text, const fs::path& out, std::optional<std::string> resume = {}) {
  ExecOptions opt;
  opt.out_dir = out.string();
  opt.resume = std::move(resume);
  opt.threads = 1;
  std::ostringstream log;
  return execute(parse_config(text), opt, log);
}

}  // namespace

TEST_CASE("config parsing fills defaults and names bad keys") {
  const RunConfig cfg = parse_config(sim_config(1.0));
  CHECK(cfg.mode == RunMode::kSimulate);
  CHECK(cfg.sim.padding == 2);
  CHECK(cfg.sim.cutoff == 8);
  CHECK(cfg.noise_spec().size() > 0);

  auto key_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of(R"({"mode":"simulate","sim":{"alpha":0.1,"dt":0,"horizon":1,"cutoff":8}})") == "sim.dt");
  CHECK(key_of(R"({"mode":"simulate","sim":{"alpha":0.1,"dt":0.1,"horizon":1,"cutoff":8,"foo":1}})") ==
        "sim.foo");
  CHECK(key_of(R"({"mode":"simulate","sim":{"alpha":0.1,"dt":0.1,"horizon":1}})") == "sim.cutoff");
  CHECK(key_of(R"({"mode":"sweep","sim":{"dt":0.1,"cutoff":8},"sweep":{"alphas":[0.1,0.2]}})") ==
        "sweep.alphas");
  CHECK(key_of("{not json") != "<none>");

  const RunConfig sweep =
      parse_config(R"({"mode":"sweep","sim":{"dt":0.1,"cutoff":8},"sweep":{"alphas":[0.2,0.1]}})");
  CHECK(sweep.sweep_alphas.size() == 2);
  // The echo parses back to the same configuration.
  CHECK(config_to_json(parse_config(config_to_json(sweep).dump())) == config_to_json(sweep));
}

TEST_CASE("checkpoint round trip is bitwise") {
  Checkpoint ck;
  ck.alpha = 0.125;
  ck.state.time = 1.5;
  ck.state.step = 150;
  ck.state.field = testutil::random_field(8, 44);
  ck.state.rng = RngStream(3, 7, 99);
  const std::string bytes = encode_checkpoint(ck);
  const Checkpoint back = decode_checkpoint(bytes);
  CHECK(back.alpha == ck.alpha);
  CHECK(back.state.time == ck.state.time);
  CHECK(back.state.step == ck.state.step);
  CHECK(back.state.rng == ck.state.rng);
  CHECK(std::memcmp(back.state.field.coefficients().data(), ck.state.field.coefficients().data(),
                    ck.state.field.size() * sizeof(cplx)) == 0);
  CHECK(encode_checkpoint(back) == bytes);

  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 1)), CheckpointError);
  CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), CheckpointError);
  std::string bumped = bytes;
  bumped[4] = 2;
  CHECK_THROWS_AS(decode_checkpoint(bumped), CheckpointVersionError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(magic), CheckpointError);

  const fs::path dir = scratch("ck");
  write_checkpoint((dir / "a.sqgf").string(), ck);
  CHECK(slurp(dir / "a.sqgf") == bytes);
  CHECK(read_checkpoint((dir / "a.sqgf").string()).state.step == 150);
  CHECK_THROWS_AS(read_checkpoint((dir / "missing.sqgf").string()), CheckpointError);
}

TEST_CASE("T = 0 simulate writes a manifest and one observation row") {
  const fs::path dir = scratch("t0");
  CHECK(run(sim_config(0.0), dir) == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  std::istringstream csv(slurp(dir / "observables.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("resume reproduces the uninterrupted run bitwise") {
  const fs::path full = scratch("full"), half = scratch("half"), rest = scratch("rest");
  REQUIRE(run(sim_config(0.2), full) == 0);
  REQUIRE(run(sim_config(0.1), half) == 0);
  REQUIRE(run(sim_config(0.2), rest, (half / "final.sqgf").string()) == 0);
  CHECK(slurp(full / "final.sqgf") == slurp(rest / "final.sqgf"));
}

TEST_CASE("failures still leave a manifest") {
  const fs::path dir = scratch("diverge");
  nlohmann::json j = {{"mode", "simulate"},
                      {"sim",
                       {{"alpha", 0.0},
                        {"dt", 5.0},
                        {"horizon", 500.0},
                        {"cutoff", 16},
                        {"noise", false},
                        {"cfl_limit", 1e9}}},
                      {"initial", {{"kind", "random"}, {"rms", 20.0}}}};
  CHECK(run(j.dump(), dir) == 3);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "diverged");
  CHECK(fs::exists(dir / "last_finite.sqgf"));

  const fs::path bad = scratch("badresume");
  CHECK(run(sim_config(0.2), bad, (bad / "nothing.sqgf").string()) == 2);
  CHECK(nlohmann::json::parse(slurp(bad / "manifest.json"))["status"] == "error");
}
