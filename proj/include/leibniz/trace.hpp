#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace leibniz::sim {

// One appended record per observable event. Serialized as JSON Lines with a
// fixed key order so identical runs produce byte-identical files.
struct TraceEvent {
  uint64_t slot = 0;
  std::string kind;  // frame-sent, frame-delivered, frame-dropped,
                     // phase-change, commit, abort, divergence-detected,
                     // corruption-detected, partition-start, partition-end,
                     // relay-used
  std::optional<uint64_t> txn;
  std::string node;  // acting node, empty for edge-only events
  std::string edge;  // canonical "lo-hi" name, empty for node-only events
  std::optional<uint64_t> bits;    // payload bits carried / affected
  std::optional<std::string> digest;
  std::optional<std::string> src;      // frame's logical source node
  std::optional<std::string> dst;      // frame's logical destination node
  std::optional<std::string> tag;      // frame tag
  std::optional<std::string> phase;    // phase-change target
  std::optional<std::string> role;     // initiator | responder
  std::optional<std::string> verdict;  // commit | abort
  std::optional<std::string> path;     // relay path "b>a>c"
  std::optional<std::string> key;      // lww key
  std::optional<std::string> writer;   // lww writing node
  std::optional<uint64_t> ts;          // lww write timestamp
  std::optional<std::string> seen;     // lww: write ids visible at write time
  std::optional<std::string> note;
};

struct RunHeader {
  std::string protocol;
  uint64_t seed = 0;
  uint64_t duration = 0;
  uint64_t delay = 1;
  uint64_t loss_ppm = 0;  // loss probability in parts per million
  bool relay = true;
  bool retransmit = true;
  std::string topology_kind;
  std::vector<std::string> nodes;
  std::vector<std::string> edges;  // canonical "lo-hi"
  std::string scenario_digest;
  uint64_t horizon = 0;
};

struct RunFooter {
  uint64_t slot = 0;
  uint64_t txns = 0;
  uint64_t commits = 0;
  uint64_t aborts = 0;
  uint64_t divergences = 0;
  uint64_t silent_corruptions = 0;
  uint64_t relay_uses = 0;
  uint64_t entropy_bits = 0;
};

struct RunTrace {
  RunHeader header;
  std::vector<TraceEvent> events;
  RunFooter footer;
};

std::string to_jsonl(const TraceEvent& ev);
std::string to_jsonl(const RunHeader& h);
std::string to_jsonl(const RunFooter& f);
std::string to_jsonl(const RunTrace& trace);  // whole file contents

// Parses a complete trace file. Throws std::runtime_error with the
// offending line number on malformed input.
RunTrace parse_trace(const std::string& file_contents);
RunTrace load_trace_file(const std::string& path);

}  // namespace leibniz::sim
