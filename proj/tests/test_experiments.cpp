#include <filesystem>
#include <fstream>
#include <sstream>

#include "bubblelab/errors.hpp"
#include "bubblelab/experiments.hpp"
#include "bubblelab/output.hpp"
#include "doctest.h"

using namespace bubblelab;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("bubblelab_exp_" + name);
  fs::remove_all(d);
  return d;
}

ExperimentConfig config(const ordered_json& j, const fs::path& out) {
  ExperimentConfig c = ExperimentConfig::from_json(j);
  c.output_dir = out;
  return c;
}

const ordered_json kDegreeIdentity = {{"command", "degree"}, {"params", {{"map", "identity"}, {"name", "deg"}}}, {"resolution", "60x120"}};

}  // namespace

TEST_CASE("degree of the identity map") {
  const fs::path out = scratch("degree");
  const ExperimentResult r = run(config(kDegreeIdentity, out));
  REQUIRE(r.exit_code == kExitOk);
  CHECK(r.summary.at("results").at("degree").get<int>() == 1);
  CHECK(r.summary.at("results").at("raw").get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.summary.at("status") == "ok");
  REQUIRE_FALSE(r.files.empty());
  CHECK(r.files.front() == out / "deg.json");
  for (const auto& f : r.files) CHECK(fs::exists(f));
  fs::remove_all(out);
}

TEST_CASE("summary layout and config echo") {
  const fs::path out = scratch("layout");
  const ExperimentResult r = run(config(kDegreeIdentity, out));
  const ordered_json on_disk = ordered_json::parse(slurp(out / "deg.json"));
  CHECK(on_disk == r.summary);
  std::vector<std::string> keys;
  for (auto it = on_disk.begin(); it != on_disk.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"command", "build_id", "seed", "config", "status", "tolerances", "results", "checks"});
  CHECK(on_disk.at("build_id") == build_id());
  CHECK(on_disk.at("config").at("params").at("map") == "identity");
  CHECK(on_disk.at("config").at("resolution") == "60x120");
  for (const auto& c : on_disk.at("checks")) {
    CHECK(c.contains("name"));
    CHECK(c.at("passed").get<bool>());
  }
  fs::remove_all(out);
}

TEST_CASE("reruns are byte-identical across output directories") {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  const ExperimentResult ra = run(config(kDegreeIdentity, a));
  const ExperimentResult rb = run(config(kDegreeIdentity, b));
  REQUIRE(ra.files.size() == rb.files.size());
  for (std::size_t i = 0; i < ra.files.size(); ++i) {
    CHECK(ra.files[i].filename() == rb.files[i].filename());
    CHECK(slurp(ra.files[i]) == slurp(rb.files[i]));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("configuration errors exit with code 3") {
  const fs::path out = scratch("bad");
  CHECK(run(config({{"command", "degree"}, {"params", {{"map", "no/such/map.json"}}}}, out)).exit_code == kExitConfig);
  CHECK(run(config({{"command", "degree"}}, out)).exit_code == kExitConfig);
  CHECK(run(config({{"command", "verify-lemma34"}, {"params", {{"p", {2.5}}}}}, out)).exit_code == kExitConfig);
  ExperimentConfig unknown;
  unknown.command = "teleport";
  unknown.output_dir = out;
  const ExperimentResult r = run(unknown);
  CHECK(r.exit_code == kExitConfig);
  CHECK_FALSE(r.message.empty());
  CHECK_THROWS_AS(ExperimentConfig::from_json(ordered_json::array()), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"command", "degree"}, {"resolution", "12"}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::load(out / "missing.json"), ConfigError);
  fs::remove_all(out);
}

TEST_CASE("verify-lemma34 on a small table") {
  const fs::path out = scratch("lemma34");
  const ExperimentResult r =
      run(config({{"command", "verify-lemma34"}, {"params", {{"p", {1.0, 1.5}}, {"j", {5, 10}}, {"name", "l34"}}}, {"resolution", "90x180"}}, out));
  REQUIRE(r.exit_code != kExitConfig);
  const ordered_json& rows = r.summary.at("results").at("rows");
  CHECK(rows.size() == 4);
  for (const auto& row : rows) CHECK(row.at("measured_seminorm_p").get<double>() > 0.0);
  const std::string csv = slurp(out / "l34.csv");
  CHECK(csv.rfind("p,j,I1_a,", 0) == 0);
  CHECK(csv.find("\r\n") != std::string::npos);
  CHECK(csv.find("\n") == csv.find("\r\n") + 1);
  fs::remove_all(out);
}

TEST_CASE("CSV quoting follows RFC 4180") {
  CsvTable t({"a", "b"});
  t.row({"plain", "with,comma"}).row({"say \"hi\"", "line\nbreak"});
  CHECK(t.str() == "a,b\r\nplain,\"with,comma\"\r\n\"say \"\"hi\"\"\",\"line\nbreak\"\r\n");
  CHECK(t.rows() == 2);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 8.0 * kPi, -2.5e-300, 1e22}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("shipped experiment configs parse") {
  const fs::path dir = BUBBLELAB_EXPERIMENTS_DIR;
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    const ExperimentConfig c = ExperimentConfig::load(e.path());
    const auto& names = command_names();
    CHECK(std::find(names.begin(), names.end(), c.command) != names.end());
    ++n;
  }
  CHECK(n >= 12);
}
