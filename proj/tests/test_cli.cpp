#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "leibniz/cli_commands.hpp"

using namespace leibniz::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           fs::path("leibniz_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write(const fs::path& dir, const std::string& name,
               const std::string& contents) {
  fs::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  out << contents;
  return p;
}

const char* kLossless = R"({
  "name": "cli-lossless",
  "topology": {"kind": "triangle"},
  "protocol": "oae",
  "seed": 1,
  "duration": 150,
  "horizon": 16,
  "flows": [{"from": "b", "to": "c", "count": 50}]
})";

const char* kDivergence = R"({
  "name": "cli-divergence",
  "topology": {"kind": "triangle"},
  "protocol": "oae",
  "seed": 1,
  "duration": 40,
  "horizon": 12,
  "link": {"partitions": [{"edge": ["a", "b"], "start": 3, "end": null},
                           {"edge": ["a", "c"], "start": 3, "end": null},
                           {"edge": ["b", "c"], "start": 3, "end": null}]},
  "flows": [{"from": "b", "to": "c", "count": 1}]
})";

const char* kContrast = R"({
  "name": "cli-contrast",
  "topology": {"kind": "triangle"},
  "protocol": "oae",
  "seed": 2,
  "duration": 300,
  "horizon": 16,
  "link": {"loss_prob": 0.2},
  "flows": [{"from": "a", "to": "b", "count": 150}],
  "lww": {"writes": [{"node": "a", "key": "k", "value": "v1", "slot": 5},
                      {"node": "b", "key": "k", "value": "v2", "slot": 5}]}
})";

}  // namespace

TEST_CASE("enumerate-kbp prints the three counts") {
  std::ostringstream out, err;
  CHECK(cmd_enumerate_kbp(1, out, err) == kOk);
  CHECK(out.str().find("1 6 0 0") != std::string::npos);

  std::ostringstream out2, err2;
  CHECK(cmd_enumerate_kbp(2, out2, err2) == kOk);
  CHECK(out2.str().find("2 6 36 24") != std::string::npos);

  std::ostringstream out3, err3;
  CHECK(cmd_enumerate_kbp(3, out3, err3) == kUsage);
}

TEST_CASE("run: happy path writes artifacts and passes checks") {
  TempDir tmp;
  auto scenario = write(tmp.path, "s.json", kLossless);
  RunOptions opts;
  opts.scenario_path = scenario.string();
  opts.out_dir = (tmp.path / "out").string();
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kOk);
  CHECK(fs::exists(tmp.path / "out" / "trace.jsonl"));
  CHECK(fs::exists(tmp.path / "out" / "metrics.csv"));
  CHECK(fs::exists(tmp.path / "out" / "report.json"));
  CHECK(out.str().find(",50,50,0,0,0,0,0") != std::string::npos);

  // the written trace passes conservation checking
  std::ostringstream cout2, cerr2;
  CHECK(cmd_check_conservation((tmp.path / "out" / "trace.jsonl").string(),
                               cout2, cerr2) == kOk);
  CHECK(cout2.str().find("all conservation checks passed") !=
        std::string::npos);
}

TEST_CASE("LEIBNIZ_LINK_LOG turns progress logging on") {
  TempDir tmp;
  auto scenario = write(tmp.path, "s.json", kLossless);
  RunOptions opts;
  opts.scenario_path = scenario.string();
  opts.out_dir = (tmp.path / "out").string();

  ::setenv("LEIBNIZ_LINK_LOG", "1", 1);
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kOk);
  CHECK(err.str().find("running cli-lossless") != std::string::npos);

  ::setenv("LEIBNIZ_LINK_LOG", "0", 1);
  std::ostringstream out2, err2;
  CHECK(cmd_run(opts, out2, err2) == kOk);
  CHECK(err2.str().empty());
  ::unsetenv("LEIBNIZ_LINK_LOG");
}

TEST_CASE("run: seed override is reflected in the report") {
  TempDir tmp;
  auto scenario = write(tmp.path, "s.json", kLossless);
  RunOptions opts;
  opts.scenario_path = scenario.string();
  opts.seed = 99;
  opts.out_dir = (tmp.path / "out").string();
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kOk);
  CHECK(out.str().find(",99,") != std::string::npos);
}

TEST_CASE("run: validation failure names the missing key") {
  TempDir tmp;
  auto scenario = write(tmp.path, "bad.json", R"({
    "topology": {"kind": "triangle"},
    "protocol": "oae",
    "duration": 100,
    "flows": [{"from": "a", "to": "b", "count": 1}]
  })");
  RunOptions opts;
  opts.scenario_path = scenario.string();
  opts.out_dir = (tmp.path / "out").string();
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kUsage);
  CHECK(err.str().find("horizon") != std::string::npos);
}

TEST_CASE("run: forced divergence exits nonzero with a report") {
  TempDir tmp;
  auto scenario = write(tmp.path, "d.json", kDivergence);
  RunOptions opts;
  opts.scenario_path = scenario.string();
  opts.out_dir = (tmp.path / "out").string();
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kViolation);
  CHECK(err.str().find("divergence") != std::string::npos);
}

TEST_CASE("compare: cross-protocol table with aggregates, deterministic") {
  TempDir tmp;
  auto scenario = write(tmp.path, "c.json", kContrast);
  CompareOptions opts;
  opts.scenario_path = scenario.string();
  opts.protocols = {"oae", "fireforget", "lww"};
  opts.seeds = {1, 2, 3};
  std::ostringstream out, err;
  REQUIRE(cmd_compare(opts, out, err) == kOk);
  std::string table = out.str();
  CHECK(table.find("oae,cli-contrast,1,") != std::string::npos);
  CHECK(table.find("fireforget,cli-contrast,3,") != std::string::npos);
  CHECK(table.find("lww,cli-contrast,2,") != std::string::npos);
  CHECK(table.find("mean_commits") != std::string::npos);

  std::ostringstream out2, err2;
  REQUIRE(cmd_compare(opts, out2, err2) == kOk);
  CHECK(out.str() == out2.str());  // identical seeds rerun identically

  // column 7 (0-based) is silent_corruptions: zero for every oae row,
  // positive for every fireforget and lww row in this lossy scenario
  std::istringstream lines(table);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line.rfind("protocol", 0) == 0 ||
        line.rfind("mean", 0) == 0) {
      continue;
    }
    std::vector<std::string> cols;
    std::istringstream ls(line);
    std::string col;
    while (std::getline(ls, col, ',')) cols.push_back(col);
    if (cols.size() != 10) continue;  // aggregate table
    uint64_t silent = std::stoull(cols[7]);
    if (cols[0] == "oae") CHECK(silent == 0);
    if (cols[0] == "fireforget") CHECK(silent > 0);
    if (cols[0] == "lww") CHECK(silent > 0);
  }
}

TEST_CASE("compare: usage errors") {
  TempDir tmp;
  auto scenario = write(tmp.path, "c.json", kContrast);
  CompareOptions one;
  one.scenario_path = scenario.string();
  one.protocols = {"oae"};
  one.seeds = {1};
  std::ostringstream out, err;
  CHECK(cmd_compare(one, out, err) == kUsage);

  CompareOptions bad;
  bad.scenario_path = scenario.string();
  bad.protocols = {"oae", "tachyon"};
  bad.seeds = {1};
  std::ostringstream out2, err2;
  CHECK(cmd_compare(bad, out2, err2) == kUsage);
  CHECK(err2.str().find("oae, fireforget, lww") != std::string::npos);
}

TEST_CASE("check-conservation: tampering and truncation are caught") {
  TempDir tmp;
  auto scenario = write(tmp.path, "s.json", kLossless);
  RunOptions opts;
  opts.scenario_path = scenario.string();
  opts.out_dir = (tmp.path / "out").string();
  std::ostringstream out, err;
  REQUIRE(cmd_run(opts, out, err) == kOk);
  fs::path trace = tmp.path / "out" / "trace.jsonl";

  // tamper: inflate the footer's entropy claim
  std::ifstream in(trace, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  auto pos = text.find("\"entropy_bits\":0");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 16, "\"entropy_bits\":64");
  auto tampered = write(tmp.path, "tampered.jsonl", text);
  std::ostringstream out2, err2;
  CHECK(cmd_check_conservation(tampered.string(), out2, err2) == kViolation);

  // truncation: a malformed line is reported with its number
  auto broken = write(tmp.path, "broken.jsonl",
                      text.substr(0, text.find('\n') + 1) + "{oops\n");
  std::ostringstream out3, err3;
  CHECK(cmd_check_conservation(broken.string(), out3, err3) == kUsage);
  CHECK(err3.str().find("line 2") != std::string::npos);

  std::ostringstream out4, err4;
  CHECK(cmd_check_conservation((tmp.path / "nope.jsonl").string(), out4,
                               err4) == kUsage);
}
