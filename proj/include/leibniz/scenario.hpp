#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leibniz/topology.hpp"

namespace leibniz::sim {

enum class Protocol : uint8_t { Oae, FireForget, Lww };
const char* to_string(Protocol p);
std::optional<Protocol> protocol_from_string(const std::string& s);

struct PartitionWindow {
  Edge edge;
  uint64_t start = 0;
  std::optional<uint64_t> end;  // nullopt: for the remainder of the run
};

// Per-hop fault model. Deterministic given the scenario seed: loss draws
// hash (seed, edge, slot, seq, src); partitions drop every frame whose
// traversal overlaps their window.
struct LinkModel {
  uint64_t delay = 1;      // slots per hop, >= 1
  double loss_prob = 0.0;  // per frame per hop
  std::vector<PartitionWindow> partitions;
};

struct Flow {
  NodeId from = 0;
  NodeId to = 0;
  uint64_t count = 0;
  uint64_t payload_bytes = 8;
  uint64_t period = 1;  // slots between initiations
  uint64_t start = 0;
};

struct LwwWrite {
  NodeId node = 0;
  std::string key;
  std::string value;
  uint64_t slot = 0;
};

struct LwwConfig {
  uint64_t gossip_period = 4;
  std::map<NodeId, int64_t> skew;  // local clock offset in slots
  std::vector<LwwWrite> writes;
};

struct Scenario {
  std::string name = "scenario";
  Topology topology;
  LinkModel link;
  Protocol protocol = Protocol::Oae;
  uint64_t seed = 1;
  uint64_t duration = 0;
  uint64_t horizon = 0;       // oae only
  bool relay = true;          // oae: route around dead links
  bool retransmit = true;     // oae: L2.4 retries while non-terminal
  std::vector<Flow> flows;    // oae + fireforget
  LwwConfig lww;

  uint64_t digest() const;  // canonical content digest for reports
};

struct ValidationError {
  std::string field;  // dotted path, e.g. "link.loss_prob"
  std::string message;
};

// Parses and validates a scenario document (JSON). On failure returns the
// full list of field errors instead of the scenario.
struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<ValidationError> errors;
  bool ok() const { return scenario.has_value(); }
};

ParseResult parse_scenario(const std::string& json_text);
ParseResult load_scenario_file(const std::string& path);

}  // namespace leibniz::sim
