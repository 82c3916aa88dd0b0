#include <stdexcept>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mfl/experiments.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mfl_harness_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MFL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

mfl::ExperimentConfig tiny_theorem1(const fs::path& out) {
  mfl::ExperimentConfig c;
  c.experiment = "theorem1";
  c.run_id = "tiny";
  c.n_list = {4, 8};
  c.replicas = 40;
  c.t_end = 0.1;
  c.dt = 0.01;
  c.times = {0.05, 0.1};
  c.n_hermite = 32;
  c.ensemble.chains = 2;
  c.out_dir = out.string();
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config round trip") {
    mfl::ExperimentConfig c;
    CHECK(mfl::parse_config(mfl::serialize_config(c)) == c);
    c.experiment = "meanfield";
    c.seed = 18446744073709551615ULL;
    c.beta = 0.1 + 0.2;
    c.betas = {0.25, 1.0 / 3.0};
    c.kernel.family = "table";
    c.kernel.table = "1:0.5 -1:0.5";
    c.meanfield.confining = mfl::ConfiningKind::double_well;
    c.meanfield.interaction = mfl::InteractionKind::cosine_localized;
    c.f0 = "0.5*cos(1)*He(1) + sin(2)";
    c.filter = true;
    c.ensemble.thin_sweeps = 12;
    CHECK(mfl::parse_config(mfl::serialize_config(c)) == c);
  }

  TEST_CASE("config rejections") {
    CHECK_THROWS_AS(mfl::parse_config("[run]\nbogus = 1\n"), mfl::ConfigError);
    CHECK_THROWS_AS(mfl::parse_config("[nowhere]\nseed = 1\n"), mfl::ConfigError);
    CHECK_THROWS_AS(mfl::parse_config("[physics]\nbeta = abc\n"), mfl::ConfigError);
    CHECK_THROWS_AS(mfl::parse_config("[run]\nexperiment = unknown\n"), mfl::ConfigError);
    CHECK_THROWS_AS(mfl::parse_config("[physics]\nbeta = -1\n"), mfl::ConfigError);
    CHECK_THROWS_AS(mfl::parse_config("[ensemble]\nthin_sweeps = 2\n"), mfl::ConfigError);
    CHECK_NOTHROW(mfl::parse_config("[run]\nexperiment = limit\n"));
  }

  TEST_CASE("csv quoting") {
    CHECK(mfl::csv_escape("plain") == "plain");
    CHECK(mfl::csv_escape("a,b") == "\"a,b\"");
    CHECK(mfl::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(mfl::csv_escape("line\nbreak") == "\"line\nbreak\"");
    mfl::Table t("t", {"x", "label"});
    t.add({mfl::cell(0.1), "a,b"});
    CHECK(mfl::to_csv(t) == "x,label\r\n0.1,\"a,b\"\r\n");
    CHECK(mfl::cell(std::nan("")) == "nan");
    CHECK(mfl::cell(-INFINITY) == "-inf");
    CHECK_THROWS(t.add({"only one"}));
  }

  TEST_CASE("empty report writes a manifest only") {
    const auto dir = scratch("empty");
    mfl::ExperimentReport r;
    r.stage = "empty";
    const auto files = mfl::emit_outputs(r, dir, {"e", "", 0.0});
    CHECK(files.empty());
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["files"].empty());
    CHECK(m["passed"] == true);
    CHECK(m["artifact_version"] == mfl::artifact_version());
    fs::remove_all(dir);
  }

  TEST_CASE("file naming, manifest checksums and reproducibility") {
    const auto a = scratch("t1a"), b = scratch("t1b");
    auto c = tiny_theorem1(a);
    c.workers = 1;
    const auto ra = mfl::run_and_emit(c);
    c.out_dir = b.string();
    c.workers = 3;
    const auto rb = mfl::run_and_emit(c);
    for (const char* name : {"tiny-theorem1-marginals.csv", "tiny-theorem1-vlasov_modes.csv",
                             "tiny-theorem1-discrepancy.csv", "manifest.json"})
      CHECK(fs::exists(a / name));
    const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
    REQUIRE(m["files"].size() == ra.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
      const auto& f = ra.files[i];
      CHECK(f.crc32 == mfl::crc32_of(slurp(a / f.name)));
      CHECK(f.crc32 == rb.files[i].crc32);
      CHECK(slurp(a / f.name) == slurp(b / f.name));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("exit codes") {
    const auto cfg = scratch("cfg");
    fs::create_directories(cfg);
    std::ofstream(cfg / "bad.ini") << "[physics]\nbeta = -2\n";
    std::ofstream(cfg / "unknown.ini") << "[physics]\ncolour = red\n";
    std::ofstream(cfg / "good.ini") << "[meanfield]\ngrid_points = 101\n";
    CHECK(run_cli("meanfield --config " + (cfg / "bad.ini").string()) == mfl::exit_config);
    CHECK(run_cli("meanfield --config " + (cfg / "unknown.ini").string()) == mfl::exit_config);
    CHECK(run_cli("nonsense") == mfl::exit_config);
    CHECK(run_cli("meanfield --config " + (cfg / "good.ini").string() + " --out " + (cfg / "out").string()) ==
          mfl::exit_ok);
    CHECK(fs::exists(cfg / "out" / "manifest.json"));
    fs::remove_all(cfg);
  }

  TEST_CASE("run_and_emit reports numerical failure") {
    auto c = tiny_theorem1(scratch("fail"));
    c.experiment = "limit";
    c.kernel.amplitude = -6.0;
    c.n_list = {2};
    const auto r = mfl::run_and_emit(c);
    CHECK(r.exit_code == mfl::exit_numerical);
    fs::remove_all(c.out_dir);
  }
}
