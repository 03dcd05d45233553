#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stimem/errors.hpp"
#include "stimem/scenarios.hpp"

using namespace stimem;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
  const fs::path p = fs::path(STIMEM_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(STIMEM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("scenario table") {
  const auto& all = list_scenarios();
  REQUIRE(all.size() == 10);
  const std::vector<std::string> names = {"free-wp",      "spon-decay", "stim-early",
                                          "stim-late",    "double-pulse", "phase-scan",
                                          "semiclassical-compare", "perturbative-breakdown",
                                          "fel-rates",    "synchrotron-rates"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(all[i].name == names[i]);
    CHECK_FALSE(all[i].figure.empty());
    CHECK(&find_scenario(names[i]) == &all[i]);
  }
  CHECK_THROWS_AS(find_scenario("nope"), ConfigError);
}

TEST_CASE("defaults follow the figure parameters") {
  const auto free = default_config("free-wp");
  CHECK(free.get_int("cavity.modes") == 1000);
  CHECK(free.get_double("packet.center") == 10.0);
  const auto early = default_config("stim-early");
  CHECK(early.get_double("packet.center") == 117.7);
  CHECK(early.get_double("cavity.length_over_pi") == 80.0);
  CHECK(early.get_double("cavity.gamma_atom") == 0.05);
  CHECK(early.get_double("packet.width") == 0.25);
  CHECK(default_config("stim-late").get_double("packet.center") == 87.7);
  const auto syn = default_config("synchrotron-rates");
  CHECK(syn.get_double("nuclear.duration") == 100e-12);
  CHECK(syn.get_double("nuclear.delay") == 8e-9);
  CHECK(syn.get_double("nuclear.second_fraction") == 0.25);
  const auto cmp = default_config("semiclassical-compare");
  CHECK(cmp.get_double("semiclassical.phase") == 4.71);
  CHECK(cmp.get_double("packet.phase") == 4.09);
}

TEST_CASE("config rejects unknown keys and bad values with the key path") {
  auto c = default_config("fel-rates");
  CHECK_THROWS_AS(c.set("cavity.modes", "10"), ConfigError);
  try {
    c.assign("nuclear.bogus=1");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "nuclear.bogus");
  }
  c.assign("nuclear.duration = abc");
  try {
    c.get_double("nuclear.duration");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "nuclear.duration");
  }
  CHECK_THROWS_AS(c.assign("no-equals-sign"), ConfigError);
  c.assign("nuclear.phases=1, 2,3");
  CHECK(c.get_list("nuclear.phases") == std::vector<double>{1.0, 2.0, 3.0});
  c.assign("nuclear.curve_points=2.5");
  CHECK_THROWS_AS(c.get_int("nuclear.curve_points"), ConfigError);
}

TEST_CASE("INI files override defaults") {
  const auto dir = tmp("ini");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "a.ini");
    f << "[nuclear]\nduration = 2e-13\nphases = 3.0\n";
  }
  auto c = default_config("fel-rates");
  c.load_file(dir / "a.ini");
  CHECK(c.get_double("nuclear.duration") == 2e-13);
  {
    std::ofstream f(dir / "b.ini");
    f << "[cavity]\nmodes = 10\n";
  }
  CHECK_THROWS_AS(c.load_file(dir / "b.ini"), ConfigError);
  {
    std::ofstream f(dir / "c.ini");
    f << "duration = 1\n";
  }
  CHECK_THROWS_AS(c.load_file(dir / "c.ini"), ConfigError);
}

TEST_CASE("runs are reproducible apart from the manifest timestamp") {
  const auto a = tmp("repro_a"), b = tmp("repro_b");
  const auto c = default_config("fel-rates");
  const auto sa = run_scenario("fel-rates", c, a);
  run_scenario("fel-rates", c, b);
  for (const char* f : {"summary.json", "decay_curve.csv", "breakdown.csv"})
    CHECK(slurp(a / f) == slurp(b / f));
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["scenario"] == "fel-rates");
  CHECK(manifest["config"]["nuclear.duration"] == "1e-13");
  CHECK(manifest.contains("created"));
  CHECK(sa["runs"][0]["delta_d"].get<double>() > 0.0);

  // Full precision in the CSV.
  std::istringstream lines(slurp(a / "decay_curve.csv"));
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "phi,t,reference,signal");
  CHECK(row.rfind("3.1415926535897931,", 0) == 0);
}

TEST_CASE("free packet scenario output") {
  const auto dir = tmp("free");
  const auto s = run_scenario("free-wp", default_config("free-wp"), dir);
  CHECK(s["rigidity_rms"].get<double>() < 0.01);
  CHECK(s["rigidity_rms"].get<double>() > 0.0);
  const auto peaks = s["peak_positions"];
  CHECK(peaks[1].get<double>() == doctest::Approx(80.0).epsilon(0.01));
  CHECK(peaks[2].get<double>() == doctest::Approx(170.0).epsilon(0.01));
  CHECK(fs::exists(dir / "intensity.csv"));
  CHECK(fs::exists(dir / "spectrum.csv"));
}

TEST_CASE("command line") {
  CHECK(cli("list") == 0);
  CHECK(cli("run no-such-scenario") == 2);
  CHECK(cli("run fel-rates --set nuclear.bogus=1 --out " + tmp("cli_bad").string()) == 2);
  CHECK(cli("run fel-rates --set cavity.modes=10 --out " + tmp("cli_bad2").string()) == 2);
  CHECK(cli("run spon-decay --phi 1.0 --out " + tmp("cli_phi").string()) == 2);
  CHECK(cli("run free-wp --set cavity.modes=201 --out " + tmp("cli_odd").string()) == 2);
  // Time step far beyond the stability guard.
  CHECK(cli("run spon-decay --set integrator.dt=0.5 --out " + tmp("cli_dt").string()) == 3);
  // Mode window too narrow for the packet.
  CHECK(cli("run free-wp --set cavity.modes=20 --out " + tmp("cli_window").string()) == 3);

  const auto out = tmp("cli_fel");
  CHECK(cli("run fel-rates --phi 3.14159 --out " + out.string()) == 0);
  const auto s = nlohmann::json::parse(slurp(out / "summary.json"));
  REQUIRE(s["runs"].size() == 1);
  CHECK(s["runs"][0]["phi"].get<double>() == 3.14159);
  CHECK(s["runs"][0]["delta_d"].get<double>() > 0.0);

  const auto ini = tmp("cli_ini");
  fs::create_directories(ini);
  {
    std::ofstream f(ini / "cfg.ini");
    f << "[nuclear]\nphases = 6.283185307179586\n";
  }
  CHECK(cli("run fel-rates --config " + (ini / "cfg.ini").string() + " --out " + (ini / "run").string()) == 0);
  const auto s2 = nlohmann::json::parse(slurp(ini / "run" / "summary.json"));
  CHECK(s2["runs"][0]["delta_d"].get<double>() < 0.0);
}
