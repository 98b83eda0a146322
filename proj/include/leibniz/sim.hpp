#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "leibniz/baselines.hpp"
#include "leibniz/causal.hpp"
#include "leibniz/link.hpp"
#include "leibniz/metrics.hpp"
#include "leibniz/scenario.hpp"
#include "leibniz/topology.hpp"
#include "leibniz/trace.hpp"

namespace leibniz::sim {

struct RunResult {
  RunTrace trace;
  Metrics metrics;
  // final protocol state, for assertions in tests
  std::map<NodeId, link::Endpoint> endpoints;           // oae
  baselines::FireForgetState fireforget;
  baselines::LwwState lww;
  causal::EventHistory history;                         // oae event graph
};

// Deterministic slotted discrete-event simulator. One instance per run; no
// shared state between instances, so parameter sweeps may run instances in
// parallel.
class Simulator {
 public:
  explicit Simulator(Scenario scenario);

  // Executes the whole scenario. Throws std::logic_error if a safety
  // invariant of the protocol itself breaks (never expected; the
  // accounting invariants that legitimately vary live in Metrics).
  RunResult run();

 private:
  struct InFlight {
    link::Frame frame;
    std::vector<NodeId> path;  // terminals included
    std::size_t hop = 0;       // current edge: path[hop] -> path[hop+1]
    uint64_t sent_slot = 0;
  };
  struct TxnMeta {
    NodeId initiator = 0;
    NodeId responder = 0;
    uint64_t payload_bits = 0;
  };

  void process_slot(uint64_t slot);
  void partition_events(uint64_t slot);
  void arrivals(uint64_t slot);
  void initiations(uint64_t slot);
  void timers(uint64_t slot);
  void expiries(uint64_t slot);
  void finalize();

  bool edge_partitioned_during(Edge e, uint64_t entered, uint64_t arrival) const;
  std::set<Edge> live_edges(uint64_t slot) const;
  uint32_t edge_index(Edge e) const;
  std::string payload_for(uint64_t txn, uint64_t bytes) const;

  // Routes f from f.src toward f.dst and puts it on its first hop.
  void route_and_send(link::Frame f, uint64_t slot);
  void hop_send(InFlight env, uint64_t slot);
  void deliver(const InFlight& env, uint64_t slot);
  void apply_effect(link::Effect eff, uint64_t slot);
  void schedule_txn_timers(NodeId at, uint64_t txn, uint64_t slot);

  void oae_deliver(const link::Frame& f, NodeId at, uint64_t slot);
  void ff_deliver(const link::Frame& f, NodeId at, uint64_t slot);
  void lww_deliver(const link::Frame& f, NodeId at, uint64_t slot);
  void lww_write(const LwwWrite& w, uint64_t slot);
  void lww_gossip(uint64_t slot);

  void trace_frame(const char* kind, const InFlight& env, uint64_t slot,
                   const std::string& note = {});

  Scenario scenario_;
  RunTrace trace_;
  Metrics metrics_;

  std::map<NodeId, link::Endpoint> endpoints_;
  std::map<NodeId, causal::TensorClock> clocks_;
  causal::EventHistory history_;
  baselines::FireForgetState ff_;
  baselines::LwwState lww_;

  std::map<Edge, uint32_t> edge_index_;
  std::map<uint64_t, std::vector<InFlight>> arrivals_at_;
  std::map<uint64_t, std::vector<std::pair<NodeId, uint64_t>>> expiry_at_;
  std::map<uint64_t, std::vector<std::pair<NodeId, uint64_t>>> retransmit_at_;
  struct Initiation {
    uint64_t slot;
    NodeId from;
    NodeId to;
    uint64_t payload_bytes;
    uint64_t txn;
  };
  std::vector<Initiation> initiations_;
  std::size_t next_initiation_ = 0;
  std::map<std::pair<NodeId, NodeId>, uint64_t> link_seq_;
  std::map<uint64_t, TxnMeta> txns_;
  std::set<uint64_t> relayed_txns_;
  uint64_t next_write_id_ = 1;
  uint64_t retransmit_period_ = 1;
};

RunResult run_scenario(const Scenario& s);

}  // namespace leibniz::sim
