#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "leibniz/frame.hpp"
#include "leibniz/trace.hpp"

namespace leibniz::link {

enum class Phase : uint8_t { Idle, Tentative, Reflecting, Agreed, Aborted };
enum class Role : uint8_t { Initiator, Responder };

const char* to_string(Phase p);
const char* to_string(Role r);

inline bool is_terminal(Phase p) {
  return p == Phase::Agreed || p == Phase::Aborted;
}

// Application rows keyed by transaction. Tentative rows are visible in the
// store (that is what makes rollback meaningful); the committed view is
// what checkpoints snapshot bit-exactly.
struct AppStore {
  struct Row {
    std::string payload;
    bool committed = false;
  };
  std::map<uint64_t, Row> rows;

  std::string serialize_committed() const;
  std::string serialize_full() const;
};

struct Transaction {
  uint64_t txn_id = 0;
  NodeId initiator = 0;
  NodeId responder = 0;
  Role role = Role::Initiator;   // this endpoint's role
  std::string payload;           // sent (initiator) or received (responder)
  uint64_t digest = 0;           // digest of `payload`
  Phase phase = Phase::Idle;
  uint64_t start_slot = 0;
  uint64_t deadline = 0;         // start_slot + horizon
  std::string checkpoint;        // committed-view snapshot at stage time
  std::optional<Frame> last_emitted;
  uint32_t retries = 0;          // L2.4 counter
  // evidence flags backing the no-silent-success audit
  bool reflection_verified = false;  // initiator saw a digest-matching TYK
  bool commit_verdict_seen = false;  // responder processed TIK2(commit)
};

// What the endpoint wants the network to do after one input: frames to
// send (seq unassigned; the link layer stamps it) and trace records.
struct Effect {
  std::vector<Frame> send;
  std::vector<sim::TraceEvent> events;
};

// One bilateral endpoint: a deterministic sequential reactor over frames
// and timer expiries. The simulator serializes all inputs.
class Endpoint {
 public:
  Endpoint() = default;
  Endpoint(NodeId self, std::string name, std::set<NodeId> neighbors);

  NodeId self() const { return self_; }
  const std::string& name() const { return name_; }
  const AppStore& store() const { return store_; }
  const Transaction* txn(uint64_t id) const;
  const std::map<uint64_t, Transaction>& transactions() const { return txns_; }

  // Horizon applied to transactions this endpoint learns about as the
  // responder (its deadline starts at first sight of the TIK).
  void set_default_horizon(uint64_t h) { default_horizon_ = h; }

  // Starts a transaction: stages the payload, opens the exchange window,
  // emits TIK. txn_id must be fresh; payload non-empty; peer a neighbor.
  Effect initiate(uint64_t txn_id, NodeId peer, std::string payload,
                  uint64_t now, uint64_t horizon);

  Effect on_frame(const Frame& f, uint64_t now);

  // Horizon expiry: abort and roll back to the checkpoint. No-op when the
  // transaction is already terminal.
  Effect on_horizon_expiry(uint64_t txn_id, uint64_t now);

  // L2.4 retry: a fresh copy of the last emitted frame, or nothing if the
  // transaction is terminal.
  std::optional<Frame> retransmit(uint64_t txn_id);

 private:
  Effect respond_terminal(Transaction& t, const Frame& f, uint64_t now);
  void stage(Transaction& t, std::string payload);
  void commit_row(Transaction& t);
  void rollback(Transaction& t);
  sim::TraceEvent note(uint64_t now, std::string kind, const Transaction& t) const;

  NodeId self_ = 0;
  std::string name_;
  std::set<NodeId> neighbors_;
  uint64_t default_horizon_ = 0;
  AppStore store_;
  std::map<uint64_t, Transaction> txns_;
};

}  // namespace leibniz::link
