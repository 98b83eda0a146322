#pragma once

#include <cstdint>
#include <string>

namespace leibniz::sim {

// One row of the metrics table. The CSV header is frozen; downstream
// tooling may rely on the exact column set and order.
struct Metrics {
  std::string protocol;
  std::string scenario;
  uint64_t seed = 0;
  uint64_t txns = 0;
  uint64_t commits = 0;
  uint64_t aborts = 0;
  uint64_t detected_divergences = 0;
  uint64_t silent_corruptions = 0;
  uint64_t relay_uses = 0;
  uint64_t entropy_produced_bits = 0;
};

inline std::string metrics_csv_header() {
  return "protocol,scenario,seed,txns,commits,aborts,detected_divergences,"
         "silent_corruptions,relay_uses,entropy_produced_bits";
}

inline std::string to_csv_row(const Metrics& m) {
  std::string out;
  out += m.protocol;
  out += ',';
  out += m.scenario;
  out += ',';
  out += std::to_string(m.seed);
  out += ',';
  out += std::to_string(m.txns);
  out += ',';
  out += std::to_string(m.commits);
  out += ',';
  out += std::to_string(m.aborts);
  out += ',';
  out += std::to_string(m.detected_divergences);
  out += ',';
  out += std::to_string(m.silent_corruptions);
  out += ',';
  out += std::to_string(m.relay_uses);
  out += ',';
  out += std::to_string(m.entropy_produced_bits);
  return out;
}

}  // namespace leibniz::sim
