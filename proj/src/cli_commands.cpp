#include "leibniz/cli_commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "leibniz/audit.hpp"
#include "leibniz/baselines.hpp"
#include "leibniz/kbp.hpp"
#include "leibniz/sim.hpp"

namespace leibniz::cli {

namespace fs = std::filesystem;
using sim::ParseResult;
using sim::Protocol;
using sim::RunResult;
using sim::Scenario;

bool log_enabled() {
  const char* v = std::getenv("LEIBNIZ_LINK_LOG");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

namespace {

void print_validation_errors(const ParseResult& parsed, std::ostream& err) {
  err << "scenario validation failed:\n";
  for (const auto& e : parsed.errors) {
    err << "  " << (e.field.empty() ? "<document>" : e.field) << ": "
        << e.message << "\n";
  }
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

struct InlineChecks {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

InlineChecks inline_checks(const Scenario& s, const RunResult& r) {
  InlineChecks checks;
  auto conservation = audit::check_conservation(r.trace);
  for (const auto& v : conservation.violations) {
    checks.violations.push_back("conservation: " + v);
  }
  uint64_t corruption = baselines::corruption_audit(r.trace, s.protocol);
  if (s.protocol == Protocol::Oae && corruption != 0) {
    checks.violations.push_back(
        "silent corruption under oae: " + std::to_string(corruption));
  }
  if (s.protocol == Protocol::Oae && r.metrics.detected_divergences > 0) {
    checks.violations.push_back(
        "detected divergences: " +
        std::to_string(r.metrics.detected_divergences) +
        " (one endpoint rolled back while its peer committed)");
  }
  return checks;
}

std::string report_json(const Scenario& s, const RunResult& r,
                        const std::string& trace_path,
                        const std::string& metrics_path,
                        const InlineChecks& checks) {
  std::string out = "{";
  out += "\"scenario\":\"" + r.trace.header.scenario_digest + "\"";
  out += ",\"name\":\"" + s.name + "\"";
  out += ",\"seed\":" + std::to_string(s.seed);
  out += ",\"trace\":\"" + trace_path + "\"";
  out += ",\"metrics\":\"" + metrics_path + "\"";
  out += ",\"row\":\"" + to_csv_row(r.metrics) + "\"";
  out += std::string(",\"checks_passed\":") + (checks.ok() ? "true" : "false");
  out += ",\"violations\":[";
  for (std::size_t i = 0; i < checks.violations.size(); ++i) {
    if (i) out += ',';
    out += '"' + checks.violations[i] + '"';
  }
  out += "]}";
  return out;
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  ParseResult parsed = sim::load_scenario_file(opts.scenario_path);
  if (!parsed.ok()) {
    print_validation_errors(parsed, err);
    return kUsage;
  }
  Scenario s = std::move(*parsed.scenario);
  if (opts.seed) s.seed = *opts.seed;
  if (log_enabled()) {
    err << "running " << s.name << " protocol=" << to_string(s.protocol)
        << " seed=" << s.seed << "\n";
  }
  RunResult r;
  try {
    r = sim::run_scenario(s);
  } catch (const std::exception& e) {
    err << "protocol safety assertion failed: " << e.what() << "\n";
    return kViolation;
  }

  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  fs::path trace_path = dir / "trace.jsonl";
  fs::path metrics_path = dir / "metrics.csv";
  write_file(trace_path, to_jsonl(r.trace));
  write_file(metrics_path,
             sim::metrics_csv_header() + "\n" + to_csv_row(r.metrics) + "\n");

  InlineChecks checks = inline_checks(s, r);
  fs::path report_path = dir / "report.json";
  write_file(report_path, report_json(s, r, trace_path.string(),
                                      metrics_path.string(), checks) +
                              "\n");

  out << sim::metrics_csv_header() << "\n" << to_csv_row(r.metrics) << "\n";
  if (log_enabled()) {
    err << "trace: " << trace_path.string() << " ("
        << r.trace.events.size() << " events)\n";
  }
  if (!checks.ok()) {
    for (const auto& v : checks.violations) err << "violation: " << v << "\n";
    return kViolation;
  }
  return kOk;
}

int cmd_compare(const CompareOptions& opts, std::ostream& out,
                std::ostream& err) {
  if (opts.protocols.size() < 2) {
    err << "compare needs at least two protocols\n";
    return kUsage;
  }
  for (const auto& p : opts.protocols) {
    if (!sim::protocol_from_string(p)) {
      err << "unknown protocol '" << p
          << "' (valid: oae, fireforget, lww)\n";
      return kUsage;
    }
  }
  if (opts.seeds.empty()) {
    err << "compare needs at least one seed\n";
    return kUsage;
  }
  std::ifstream in(opts.scenario_path, std::ios::binary);
  if (!in) {
    err << "cannot open scenario file: " << opts.scenario_path << "\n";
    return kUsage;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc = nlohmann::json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) {
    err << "scenario file is not valid JSON\n";
    return kUsage;
  }

  std::string table = sim::metrics_csv_header() + "\n";
  struct Sums {
    double commits = 0, aborts = 0, divergences = 0, silent = 0, relay = 0,
           entropy = 0;
    uint64_t cells = 0;
  };
  std::map<std::string, Sums> agg;
  for (const auto& proto : opts.protocols) {
    nlohmann::json cell_doc = doc;
    cell_doc["protocol"] = proto;
    ParseResult parsed = sim::parse_scenario(cell_doc.dump());
    if (!parsed.ok()) {
      err << "scenario invalid under protocol '" << proto << "':\n";
      print_validation_errors(parsed, err);
      return kUsage;
    }
    for (uint64_t seed : opts.seeds) {
      Scenario s = *parsed.scenario;
      s.seed = seed;
      RunResult r;
      try {
        r = sim::run_scenario(s);
      } catch (const std::exception& e) {
        err << "protocol safety assertion failed (" << proto
            << ", seed=" << seed << "): " << e.what() << "\n";
        return kViolation;
      }
      table += to_csv_row(r.metrics) + "\n";
      Sums& sums = agg[proto];
      sums.commits += static_cast<double>(r.metrics.commits);
      sums.aborts += static_cast<double>(r.metrics.aborts);
      sums.divergences += static_cast<double>(r.metrics.detected_divergences);
      sums.silent += static_cast<double>(r.metrics.silent_corruptions);
      sums.relay += static_cast<double>(r.metrics.relay_uses);
      sums.entropy += static_cast<double>(r.metrics.entropy_produced_bits);
      ++sums.cells;
    }
  }
  std::string agg_table =
      "protocol,cells,mean_commits,mean_aborts,mean_detected_divergences,"
      "mean_silent_corruptions,mean_relay_uses,mean_entropy_produced_bits\n";
  char buf2[256];
  for (const auto& proto : opts.protocols) {
    const Sums& s = agg[proto];
    double n = static_cast<double>(s.cells);
    std::snprintf(buf2, sizeof buf2, "%s,%llu,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f\n",
                  proto.c_str(), static_cast<unsigned long long>(s.cells),
                  s.commits / n, s.aborts / n, s.divergences / n, s.silent / n,
                  s.relay / n, s.entropy / n);
    agg_table += buf2;
  }
  out << table << "\n" << agg_table;
  if (opts.out_dir) {
    fs::path dir(*opts.out_dir);
    fs::create_directories(dir);
    write_file(dir / "compare.csv", table);
    write_file(dir / "compare_aggregate.csv", agg_table);
  }
  return kOk;
}

int cmd_check_conservation(const std::string& trace_path, std::ostream& out,
                           std::ostream& err) {
  sim::RunTrace trace;
  try {
    trace = sim::load_trace_file(trace_path);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kUsage;
  }
  auto report = audit::check_conservation(trace);
  out << "node-law checks: " << report.node_slot_checks << "\n";
  out << "entropy recomputed: " << report.entropy_recomputed
      << " bits (footer claims " << trace.footer.entropy_bits << ")\n";
  out << "lossless zero-residual claims "
      << (report.lossless_claims_checked ? "checked" : "not applicable")
      << "\n";
  if (!report.ok()) {
    for (const auto& v : report.violations) err << "violation: " << v << "\n";
    return kViolation;
  }
  out << "all conservation checks passed\n";
  return kOk;
}

int cmd_enumerate_kbp(int systems, std::ostream& out, std::ostream& err) {
  if (systems != 1 && systems != 2) {
    err << "--systems must be 1 or 2\n";
    return kUsage;
  }
  auto counts = kbp::enumerate_maximal_states(systems);
  out << "systems single product entangled\n";
  out << systems << " " << counts.single << " " << counts.product << " "
      << counts.entangled << "\n";
  return kOk;
}

}  // namespace leibniz::cli
