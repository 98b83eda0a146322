#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace leibniz::cli {

// Exit code contract, stable for CI: 0 success, 1 invariant violation,
// 2 usage or validation error.
constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct RunOptions {
  std::string scenario_path;
  std::optional<uint64_t> seed;  // overrides the scenario's seed
  std::string out_dir = ".";
};

// Executes one scenario: writes <out>/trace.jsonl, <out>/metrics.csv and
// <out>/report.json, runs the inline invariant checks, and reports.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

struct CompareOptions {
  std::string scenario_path;
  std::vector<std::string> protocols;
  std::vector<uint64_t> seeds;
  std::optional<std::string> out_dir;
};

// Runs every (protocol, seed) cell of one scenario and prints the metrics
// table plus per-protocol mean rows.
int cmd_compare(const CompareOptions& opts, std::ostream& out,
                std::ostream& err);

// Verifies the conservation laws on a written trace.
int cmd_check_conservation(const std::string& trace_path, std::ostream& out,
                           std::ostream& err);

// Prints the knowledge-balance state counts.
int cmd_enumerate_kbp(int systems, std::ostream& out, std::ostream& err);

// Verbosity from LEIBNIZ_LINK_LOG (unset/"0"/"" = quiet).
bool log_enabled();

}  // namespace leibniz::cli
