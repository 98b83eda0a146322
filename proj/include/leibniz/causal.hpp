#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace leibniz::causal {

using NodeId = uint32_t;
using ExchangeId = uint64_t;

// 2-bit encoding of the causal relation between two distinct events. The
// fourth cell (11) is the relation of the two endpoint events of a
// bilateral exchange whose reflecting phase has not yet committed or
// aborted: neither order holds, and they are not independent either.
enum class Relation : uint8_t {
  Concurrent = 0b00,
  Before = 0b01,
  After = 0b10,
  Indefinite = 0b11,
};

const char* to_string(Relation r);

struct EventId {
  NodeId node = 0;
  uint64_t seq = 0;  // per-node counter, starts at 1
  auto operator<=>(const EventId&) const = default;
};

enum class Direction : uint8_t { InitiatorToResponder, ResponderToInitiator };

// Per-node causal state: a vector counter plus the set of exchanges this
// clock participates in whose reflecting phase is still open. Plain value
// type; all operations are local to the values passed in.
class TensorClock {
 public:
  TensorClock() = default;
  explicit TensorClock(NodeId owner) : owner_(owner) { vector_[owner] = 0; }

  NodeId owner() const { return owner_; }
  const std::map<NodeId, uint64_t>& vector() const { return vector_; }
  const std::set<ExchangeId>& open_exchanges() const { return open_; }

  // Advances the owner's component; `node` must be the owner.
  EventId tick(NodeId node);

  friend void open_exchange(TensorClock& a, TensorClock& b, ExchangeId xid);
  friend void collapse_exchange(TensorClock& initiator, TensorClock& responder,
                                ExchangeId xid, Direction dir);
  friend void abort_exchange(TensorClock& a, TensorClock& b, ExchangeId xid);

 private:
  NodeId owner_ = 0;
  std::map<NodeId, uint64_t> vector_;
  std::set<ExchangeId> open_;
};

// Marks xid open in both clocks. xid must be fresh on both sides.
void open_exchange(TensorClock& a, TensorClock& b, ExchangeId xid);

// Commit: removes xid from both open sets, merges both vectors elementwise
// (max), then advances the component of the direction's source node once in
// the merged view. Both clocks leave with identical vectors.
void collapse_exchange(TensorClock& initiator, TensorClock& responder,
                       ExchangeId xid, Direction dir);

// Abort: removes xid from both open sets. No merge, no direction emerges.
void abort_exchange(TensorClock& a, TensorClock& b, ExchangeId xid);

// The recorded history of a run: the happened-before DAG plus the
// open-exchange registry. compare() answers from maintained vector labels;
// oracle_relation() recomputes reachability from scratch and exists as an
// independent ground truth for tests.
class EventHistory {
 public:
  // Records a new event on `node`, chained after the node's previous event.
  EventId record_event(NodeId node);
  // Same, with a caller-chosen id (seq must exceed the node's last seq).
  EventId record_event(EventId id);
  // Records the receive half of a committed plain message.
  EventId record_receive(NodeId node, EventId send_event);

  // Registers a fresh exchange; the first half added is the initiator side.
  void open_exchange(ExchangeId xid);
  EventId add_exchange_half(ExchangeId xid, NodeId node);
  EventId add_exchange_half(ExchangeId xid, EventId id);
  // Commit: inserts the direction edge between the halves. Rejects a
  // collapse that would create a causal cycle.
  void collapse_exchange(ExchangeId xid, Direction dir);
  // Abort: closes the registry entry without inserting any edge; the pair
  // falls back to plain reachability (normally Concurrent).
  void abort_exchange(ExchangeId xid);

  bool contains(EventId id) const;
  bool exchange_open(ExchangeId xid) const;
  std::size_t event_count() const { return events_.size(); }
  std::vector<EventId> all_events() const;
  std::vector<ExchangeId> open_exchange_ids() const;
  // The registered halves, initiator first (absent halves omitted).
  std::vector<EventId> exchange_halves(ExchangeId xid) const;

  Relation compare(EventId a, EventId b) const;
  Relation oracle_relation(EventId a, EventId b) const;

 private:
  struct Event {
    NodeId node;
    uint64_t seq;
    std::vector<uint32_t> preds;
    std::vector<uint32_t> succs;
  };
  struct Exchange {
    enum class State : uint8_t { Open, Committed, Aborted };
    std::optional<uint32_t> initiator_half;
    std::optional<uint32_t> responder_half;
    State state = State::Open;
  };
  using Label = std::map<NodeId, uint64_t>;  // node -> highest seq seen

  uint32_t index_of(EventId id) const;  // throws if unknown
  void add_edge(uint32_t from, uint32_t to);
  bool reaches(uint32_t from, uint32_t to) const;  // BFS over succs
  void recompute_labels() const;

  std::vector<Event> events_;
  std::map<EventId, uint32_t> by_id_;
  std::map<NodeId, uint64_t> last_seq_;
  std::map<ExchangeId, Exchange> exchanges_;
  // open exchanges with both halves present, keyed by (lo, hi) event index
  std::map<std::pair<uint32_t, uint32_t>, ExchangeId> open_pairs_;
  mutable std::vector<Label> labels_;
  mutable bool labels_dirty_ = false;
};

}  // namespace leibniz::causal
