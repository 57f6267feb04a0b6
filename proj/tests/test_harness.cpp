#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deltaclip/config.hpp"
#include "deltaclip/harness.hpp"

using namespace deltaclip;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("deltaclip_test_" + std::to_string(++counter) + "_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kQuadraticConfig = R"({
  "version": 1,
  "seed": 7,
  "objective": {"kind": "quadratic", "diag": [1, 10]},
  "optimizer": {"kind": "delta-gclip", "eta": 0.09, "gamma": 1.0, "delta": 0.5},
  "iterations": 200,
  "init": {"kind": "point", "point": [2.0, -1.0]}
})";

}  // namespace

TEST_CASE("config loading rejects malformed documents with diagnostics") {
  TempDir tmp;
  SUBCASE("not json") {
    const auto p = write_file(tmp.path / "bad.json", "not json at all {");
    CHECK_THROWS_AS(load_config(p.string()), ConfigError);
  }
  SUBCASE("missing version") {
    const auto p = write_file(tmp.path / "bad.json",
                              R"({"seed": 1, "objective": {"kind": "quadratic", "diag": [1]},
                                  "optimizer": {"kind": "constant", "eta": 0.1}, "iterations": 5})");
    CHECK_THROWS_WITH_AS(load_config(p.string()),
                         doctest::Contains("version"), ConfigError);
  }
  SUBCASE("missing seed") {
    const auto p = write_file(tmp.path / "bad.json",
                              R"({"version": 1, "objective": {"kind": "quadratic", "diag": [1]},
                                  "optimizer": {"kind": "constant", "eta": 0.1}, "iterations": 5})");
    CHECK_THROWS_WITH_AS(load_config(p.string()), doctest::Contains("seed"), ConfigError);
  }
  SUBCASE("unknown optimizer kind") {
    const auto p = write_file(tmp.path / "bad.json",
                              R"({"version": 1, "seed": 1,
                                  "objective": {"kind": "quadratic", "diag": [1]},
                                  "optimizer": {"kind": "adam", "eta": 0.1}, "iterations": 5})");
    CHECK_THROWS_WITH_AS(load_config(p.string()), doctest::Contains("optimizer.kind"), ConfigError);
  }
  SUBCASE("empty grid axis") {
    const auto p = write_file(tmp.path / "bad.json",
                              R"({"version": 1, "seed": 1,
                                  "objective": {"kind": "quadratic", "diag": [1]},
                                  "optimizer": {"kind": "constant", "eta": 0.1},
                                  "iterations": 5, "grid": {"eta": []}})");
    CHECK_THROWS_AS(load_config(p.string()), ConfigError);
  }
  SUBCASE("missing dataset file") {
    const auto p = write_file(tmp.path / "bad.json",
                              R"({"version": 1, "seed": 1,
                                  "objective": {"kind": "mlp", "widths": [2, 4, 1],
                                                "dataset": {"kind": "csv", "path": "nope.csv"}},
                                  "optimizer": {"kind": "constant", "eta": 0.1}, "iterations": 5})");
    CHECK_THROWS_WITH_AS(load_config(p.string()), doctest::Contains("not found"), ConfigError);
  }
}

TEST_CASE("csv datasets load with and without a header") {
  TempDir tmp;
  const auto p = write_file(tmp.path / "data.csv",
                            "x1,x2,y\n"
                            "1.0, 2.0, 3.5\n"
                            "0.5,-1.0,0.25\n");
  const Dataset d = load_dataset_csv(p.string());
  REQUIRE(d.size() == 2);
  CHECK(d.input_dim() == 2);
  CHECK(d.inputs[0][1] == 2.0);
  CHECK(d.targets[1] == 0.25);

  const auto p2 = write_file(tmp.path / "noheader.csv", "1,2\n3,4\n");
  const Dataset d2 = load_dataset_csv(p2.string());
  CHECK(d2.size() == 2);
  CHECK(d2.input_dim() == 1);

  const auto bad = write_file(tmp.path / "ragged.csv", "1,2,3\n1,2\n");
  CHECK_THROWS_AS(load_dataset_csv(bad.string()), ConfigError);
}

TEST_CASE("run command writes schema-stable, reproducible artifacts") {
  TempDir tmp;
  auto cfg_path = write_file(tmp.path / "quad.json", kQuadraticConfig);

  SUBCASE("zero iterations produce exactly one data row") {
    nlohmann::json j = nlohmann::json::parse(kQuadraticConfig);
    j["iterations"] = 0;
    write_file(tmp.path / "quad0.json", j.dump());
    const auto out = tmp.path / "out0";
    CHECK(cmd_run((tmp.path / "quad0.json").string(), out.string(), std::nullopt) == 0);
    std::ifstream trace(out / "trace.csv");
    std::string line;
    std::getline(trace, line);
    CHECK(line == "t,loss,grad_norm,step_size,dist_from_init");
    int rows = 0;
    while (std::getline(trace, line)) {
      if (!line.empty()) ++rows;
    }
    CHECK(rows == 1);
  }

  SUBCASE("identical config and seed reproduce the trace byte for byte") {
    const auto out1 = tmp.path / "out1";
    const auto out2 = tmp.path / "out2";
    CHECK(cmd_run(cfg_path.string(), out1.string(), std::nullopt) == 0);
    CHECK(cmd_run(cfg_path.string(), out2.string(), std::nullopt) == 0);
    const std::string t1 = slurp(out1 / "trace.csv");
    const std::string t2 = slurp(out2 / "trace.csv");
    CHECK(!t1.empty());
    CHECK(t1 == t2);
  }

  SUBCASE("report carries status, losses and the theorem block") {
    const auto out = tmp.path / "out_report";
    CHECK(cmd_run(cfg_path.string(), out.string(), std::nullopt) == 0);
    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report["status"] == "ok");
    CHECK(report["final_loss"].is_number());
    CHECK(report["min_grad_norm_sq"].is_number());
    CHECK(report["trace_file"] == "trace.csv");
    REQUIRE(report["theorem_report"].is_object());
    CHECK(report["theorem_report"]["envelope_ok"].get<bool>());
    CHECK(report["theorem_report"]["radius_ok"].get<bool>());
    CHECK(report["config"]["seed"] == 7);
  }

  SUBCASE("running a gridded config through run is a usage error") {
    nlohmann::json j = nlohmann::json::parse(kQuadraticConfig);
    j["grid"] = {{"eta", {0.01, 0.05}}};
    write_file(tmp.path / "grid.json", j.dump());
    CHECK_THROWS_AS(cmd_run((tmp.path / "grid.json").string(), (tmp.path / "x").string(), std::nullopt),
                    ConfigError);
  }
}

TEST_CASE("grid command") {
  TempDir tmp;

  SUBCASE("a 1x1 grid reproduces the single run exactly") {
    nlohmann::json j = nlohmann::json::parse(kQuadraticConfig);
    write_file(tmp.path / "single.json", j.dump());
    j["grid"] = {{"eta", {0.09}}};
    write_file(tmp.path / "grid1.json", j.dump());

    CHECK(cmd_run((tmp.path / "single.json").string(), (tmp.path / "ro").string(), std::nullopt) == 0);
    CHECK(cmd_grid((tmp.path / "grid1.json").string(), (tmp.path / "go").string(), std::nullopt, 1) == 0);

    const std::string run_trace = slurp(tmp.path / "ro" / "trace.csv");
    const std::string cell_trace =
        slurp(tmp.path / "go" / "cells" / "eta0.09_gamma1_delta0.5" / "trace.csv");
    CHECK(!run_trace.empty());
    CHECK(run_trace == cell_trace);
  }

  SUBCASE("inactive delta cells agree on a mild quadratic") {
    // gamma/|grad| stays >= 1 along the run, so delta never engages.
    nlohmann::json j = nlohmann::json::parse(R"({
      "version": 1, "seed": 3,
      "objective": {"kind": "quadratic", "diag": [1, 2]},
      "optimizer": {"kind": "delta-gclip", "eta": 0.1, "gamma": 10.0, "delta": 1e-8},
      "iterations": 300,
      "init": {"kind": "point", "point": [1.0, 1.0]},
      "grid": {"delta": [1e-8, 1e-3]}
    })");
    write_file(tmp.path / "grid2.json", j.dump());
    CHECK(cmd_grid((tmp.path / "grid2.json").string(), (tmp.path / "g2").string(), std::nullopt, 2) == 0);

    std::ifstream summary(tmp.path / "g2" / "grid_summary.csv");
    std::string header, row1, row2;
    std::getline(summary, header);
    std::getline(summary, row1);
    std::getline(summary, row2);
    CHECK(header == "eta,gamma,delta,status,final_loss,min_loss,iterations,trace_file,best");
    auto field = [](const std::string& row, int idx) {
      std::stringstream ss(row);
      std::string cell;
      for (int i = 0; i <= idx; ++i) std::getline(ss, cell, ',');
      return cell;
    };
    const double l1 = std::stod(field(row1, 4));
    const double l2 = std::stod(field(row2, 4));
    CHECK(std::abs(l1 - l2) <= 1e-10);
    CHECK(field(row1, 8) == "1");  // best flag on the top-ranked row
    CHECK(field(row2, 8) == "0");
  }

  SUBCASE("cell results do not depend on axis order") {
    nlohmann::json j = nlohmann::json::parse(kQuadraticConfig);
    j["iterations"] = 50;
    j["grid"] = {{"eta", {0.09, 0.03}}, {"delta", {0.5, 0.25}}};
    write_file(tmp.path / "gA.json", j.dump());
    j["grid"] = {{"eta", {0.03, 0.09}}, {"delta", {0.25, 0.5}}};
    write_file(tmp.path / "gB.json", j.dump());

    CHECK(cmd_grid((tmp.path / "gA.json").string(), (tmp.path / "gA").string(), std::nullopt, 2) == 0);
    CHECK(cmd_grid((tmp.path / "gB.json").string(), (tmp.path / "gB").string(), std::nullopt, 2) == 0);
    for (const char* cell :
         {"eta0.09_gamma1_delta0.5", "eta0.09_gamma1_delta0.25", "eta0.03_gamma1_delta0.5",
          "eta0.03_gamma1_delta0.25"}) {
      const std::string a = slurp(tmp.path / "gA" / "cells" / cell / "trace.csv");
      const std::string b = slurp(tmp.path / "gB" / "cells" / cell / "trace.csv");
      CHECK(!a.empty());
      CHECK(a == b);
    }
  }

  SUBCASE("a grid config without axes is a usage error") {
    write_file(tmp.path / "nogrid.json", kQuadraticConfig);
    CHECK_THROWS_AS(
        cmd_grid((tmp.path / "nogrid.json").string(), (tmp.path / "x").string(), std::nullopt, 1),
        ConfigError);
  }
}

TEST_CASE("verify command") {
  TempDir tmp;

  SUBCASE("well-posed quadratic config passes every check") {
    write_file(tmp.path / "ok.json", kQuadraticConfig);
    CHECK(cmd_verify((tmp.path / "ok.json").string(), (tmp.path / "v1").string(), std::nullopt) == 0);
    const auto verdict = nlohmann::json::parse(slurp(tmp.path / "v1" / "verify.json"));
    CHECK(verdict["all_pass"].get<bool>());
    for (const auto& check : verdict["checks"]) {
      CHECK(check["status"] != "fail");
    }
  }

  SUBCASE("step size outside the hypotheses skips the envelope, still exit 0") {
    nlohmann::json j = nlohmann::json::parse(kQuadraticConfig);
    j["optimizer"]["eta"] = 0.19;  // beta = 10 needs eta < 0.1
    write_file(tmp.path / "hyp.json", j.dump());
    CHECK(cmd_verify((tmp.path / "hyp.json").string(), (tmp.path / "v2").string(), std::nullopt) == 0);
    const auto verdict = nlohmann::json::parse(slurp(tmp.path / "v2" / "verify.json"));
    bool saw_skip = false;
    for (const auto& check : verdict["checks"]) {
      if (check["name"] == "rate_envelope") {
        CHECK(check["status"] == "skipped");
        saw_skip = true;
      }
    }
    CHECK(saw_skip);
  }
}

TEST_CASE("cli exit codes: 2 for usage errors, 0 for help") {
  const std::string cli = std::string(DELTACLIP_BINARY_DIR) + "/deltaclip";
  if (!fs::exists(cli)) return;  // tool not built in this configuration
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run("--help") == 0);
  CHECK(run("run /nonexistent/config.json") == 2);
  CHECK(run("frobnicate") == 2);
  TempDir tmp;
  write_file(tmp.path / "bad.json", "{\"version\": 2}");
  CHECK(run("run " + (tmp.path / "bad.json").string()) == 2);
}
