#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "ddrlab/io.hpp"
#include "reports.hpp"

using namespace ddrlab::harness;
namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string(DDRLAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ddrlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config validation names the bad field") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.h = 0.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("h"), ConfigError);
  c = {};
  c.scenario = "torus";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.frame_spacing = 3.0 * c.h;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config json round trip and strict keys") {
  ExperimentConfig c;
  c.scenario = "annulus";
  c.h = 0.01;
  c.seed = 99;
  const ExperimentConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_from_json(nlohmann::json{{"h", 0.05}}, c).scenario == "annulus");
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"hh", 0.05}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"h", "small"}}), ConfigError);
}

TEST_CASE("checks and number formatting") {
  CHECK(make_check("a", 0.5, ">=", 0.4).passed);
  CHECK_FALSE(make_check("a", 0.3, ">=", 0.4).passed);
  CHECK(make_check("b", 0.3, "<=", 0.4).passed);
  const std::vector<Check> checks{make_check("a", 1, ">=", 0), make_check("b", 1, "<=", 0)};
  CHECK_FALSE(all_passed(checks));
  REQUIRE(first_failure(checks) != nullptr);
  CHECK(first_failure(checks)->name == "b");
  CHECK(number(std::nan("")).is_null());
  CHECK(number(2.5) == 2.5);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("exit");
  CHECK(cli("run --h 0 --out " + (dir / "r").string()) == 2);
  CHECK(cli("run --h -0.1") == 2);
  CHECK(cli("generate --scenario torus --out " + (dir / "m.json").string()) == 2);
  CHECK(cli("report") == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("verify --lemma nope --report " + (dir / "v.json").string()) == 2);
  {
    std::ofstream bad(dir / "bad.ddf1", std::ios::binary);
    bad << "DDF0 this is not an archive";
  }
  CHECK(cli("report " + (dir / "bad.ddf1").string()) == 1);
  CHECK(cli("ddf --mesh " + (dir / "missing.json").string() + " --out " + (dir / "x.ddf1").string()) == 1);
}

TEST_CASE("generate, ddf and report chain") {
  const fs::path dir = scratch("chain");
  const std::string mesh = (dir / "mesh.json").string();
  const std::string data = (dir / "data.ddf1").string();
  REQUIRE(cli("generate --scenario annulus --h 0.05 --out " + mesh) == 0);
  REQUIRE(cli("ddf --mesh " + mesh + " --sources grid:0.1 --out " + data) == 0);
  CHECK(cli("report " + data) == 0);
  const std::string cert = (dir / "cert.json").string();
  CHECK(cli("reconstruct --data-a " + data + " --data-b " + data + " --out " + cert) == 0);
  const auto j = nlohmann::json::parse(ddrlab::read_text_file(cert));
  CHECK(j["median_sup_defect"] == 0.0);
}

TEST_CASE("runs are deterministic byte for byte") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string common = "run --scenario dumbbell --h 0.05 --probes 8 --archive-limit-mb 4 --out ";
  cli(common + a.string());
  cli(common + b.string());
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const std::string ext = e.path().extension().string();
    if (ext != ".json" && ext != ".ddf1" && ext != ".svg") continue;
    CAPTURE(e.path().filename().string());
    const fs::path other = b / e.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(ddrlab::read_text_file(e.path().string()) == ddrlab::read_text_file(other.string()));
    ++compared;
  }
  CHECK(compared >= 4);
}
