#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "rismimo/cli/commands.hpp"
#include "rismimo/cli/scenario.hpp"

using namespace rismimo;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
  const fs::path p = fs::path(RISMIMO_TEST_TMP) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_main(std::vector<std::string> args) {
  args.insert(args.begin(), "rismimo");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("empty scenario reproduces the prototype rate") {
  const auto out = tmp("rate");
  cli::run_subcommand("rate", cli::load_scenario_text(""), {out, false});
  const auto j = nlohmann::json::parse(slurp(out / "rate.json"));
  CHECK(j["peak_rate_gbps"].get<double>() == doctest::Approx(5.17).epsilon(0.03));
  CHECK(j["power_saving_pct"].get<double>() == doctest::Approx(38.28).epsilon(1e-3));
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(m["subcommand"] == "rate");
  CHECK(m["seed"] == 20240601);
  CHECK(m["outputs"].size() == 2);
  CHECK(m["scenario"].is_object());
}

TEST_CASE("geometry output and determinism") {
  const auto a = tmp("geo_a"), b = tmp("geo_b");
  const auto s = cli::load_scenario_text("");
  cli::run_subcommand("geometry", s, {a, false});
  cli::run_subcommand("geometry", s, {b, false});
  const auto csv = slurp(a / "geometry.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1025);
  CHECK(csv == slurp(b / "geometry.csv"));
  CHECK(csv.rfind("index,row,col,group,x_mm,y_mm,incidence_deg\n", 0) == 0);
}

TEST_CASE("seeded runs are reproducible") {
  const auto a = tmp("link_a"), b = tmp("link_b");
  const auto s = cli::load_scenario_text("link:\n  evm_symbols: 2000\n");
  cli::run_subcommand("link", s, {a, false});
  cli::run_subcommand("link", s, {b, false});
  CHECK(slurp(a / "link.json") == slurp(b / "link.json"));
}

TEST_CASE("scenario parsing") {
  const auto s = cli::load_scenario_text("rng_seed: 7\nlink:\n  distance_m: 9\n");
  CHECK(s.rng_seed == 7);
  CHECK(s.link.scenario.distance_m == 9.0);

  try {
    cli::load_scenario_text("link:\n  distance_m: 9\n  bogus: 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::load_scenario_text("nosuch:\n  a: 1\n"), ConfigError);
  CHECK_THROWS_AS(cli::load_scenario_text("link:\n  distance_m: [1, 2]\n"), ConfigError);

  auto o = cli::load_scenario_text("");
  const auto h0 = cli::scenario_hash(o);
  CHECK(h0 == cli::scenario_hash(cli::load_scenario_text("")));
  cli::apply_override(o, "link.distance_m", "12");
  CHECK(o.link.scenario.distance_m == 12.0);
  CHECK(cli::scenario_hash(o) != h0);
  CHECK_THROWS_AS(cli::apply_override(o, "link.nope", "1"), ConfigError);
  CHECK_THROWS_AS(cli::apply_override(o, "link.distance_m", "abc"), ConfigError);
  CHECK_FALSE(cli::scenario_keys().empty());
}

TEST_CASE("exit codes") {
  const std::string out = tmp("exit").string();
  CHECK(run_main({"rate", "-o", out}) == cli::kExitOk);
  CHECK(run_main({"rate", "-o", out, "--frame.bogus=1"}) == cli::kExitConfig);
  CHECK(run_main({"nosuch"}) == cli::kExitConfig);
  CHECK(run_main({"link", "-o", out, "--link.distance_m", "-1"}) == cli::kExitConfig);
  CHECK(run_main({"element-opt", "-o", out, "--strict", "--element.min_amplitude=0.999"}) == cli::kExitCompute);
  CHECK(run_main({"element-opt", "-o", out, "--element.min_amplitude=0.999"}) == cli::kExitOk);
}
