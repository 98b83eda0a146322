#include "leibniz/causal.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace leibniz::causal {

const char* to_string(Relation r) {
  switch (r) {
    case Relation::Concurrent: return "concurrent";
    case Relation::Before: return "before";
    case Relation::After: return "after";
    case Relation::Indefinite: return "indefinite";
  }
  return "?";
}

EventId TensorClock::tick(NodeId node) {
  if (node != owner_) {
    throw std::invalid_argument("tick: node is not this clock's owner");
  }
  uint64_t next = ++vector_[owner_];
  return EventId{owner_, next};
}

void open_exchange(TensorClock& a, TensorClock& b, ExchangeId xid) {
  if (a.open_.count(xid) || b.open_.count(xid)) {
    throw std::invalid_argument("open_exchange: exchange id already open");
  }
  a.open_.insert(xid);
  b.open_.insert(xid);
}

void collapse_exchange(TensorClock& initiator, TensorClock& responder,
                       ExchangeId xid, Direction dir) {
  if (!initiator.open_.count(xid) || !responder.open_.count(xid)) {
    throw std::invalid_argument("collapse_exchange: exchange id not open");
  }
  initiator.open_.erase(xid);
  responder.open_.erase(xid);
  for (const auto& [node, n] : responder.vector_) {
    auto& slot = initiator.vector_[node];
    slot = std::max(slot, n);
  }
  // The committed direction's source pays the entropy step.
  NodeId source = dir == Direction::InitiatorToResponder ? initiator.owner()
                                                         : responder.owner();
  ++initiator.vector_[source];
  responder.vector_ = initiator.vector_;
}

void abort_exchange(TensorClock& a, TensorClock& b, ExchangeId xid) {
  if (!a.open_.count(xid) || !b.open_.count(xid)) {
    throw std::invalid_argument("abort_exchange: exchange id not open");
  }
  a.open_.erase(xid);
  b.open_.erase(xid);
}

EventId EventHistory::record_event(NodeId node) {
  return record_event(EventId{node, last_seq_[node] + 1});
}

EventId EventHistory::record_event(EventId id) {
  auto it = last_seq_.find(id.node);
  uint64_t last = it == last_seq_.end() ? 0 : it->second;
  if (id.seq <= last) {
    throw std::invalid_argument("record_event: seq not increasing for node");
  }
  uint32_t idx = static_cast<uint32_t>(events_.size());
  events_.push_back(Event{id.node, id.seq, {}, {}});
  by_id_[id] = idx;
  if (last != 0) {
    uint32_t prev = by_id_.at(EventId{id.node, last});
    add_edge(prev, idx);  // program order
  }
  last_seq_[id.node] = id.seq;
  labels_dirty_ = true;
  return id;
}

EventId EventHistory::record_receive(NodeId node, EventId send_event) {
  uint32_t from = index_of(send_event);
  EventId id = record_event(node);
  add_edge(from, by_id_.at(id));
  return id;
}

void EventHistory::open_exchange(ExchangeId xid) {
  if (exchanges_.count(xid)) {
    throw std::invalid_argument("open_exchange: exchange id already used");
  }
  exchanges_[xid] = Exchange{};
}

EventId EventHistory::add_exchange_half(ExchangeId xid, NodeId node) {
  return add_exchange_half(xid, EventId{node, last_seq_[node] + 1});
}

EventId EventHistory::add_exchange_half(ExchangeId xid, EventId id) {
  auto it = exchanges_.find(xid);
  if (it == exchanges_.end() || it->second.state != Exchange::State::Open) {
    throw std::invalid_argument("add_exchange_half: exchange not open");
  }
  if (it->second.initiator_half && it->second.responder_half) {
    throw std::invalid_argument("add_exchange_half: both halves present");
  }
  EventId e = record_event(id);
  uint32_t idx = by_id_.at(e);
  if (!it->second.initiator_half) {
    it->second.initiator_half = idx;
  } else {
    it->second.responder_half = idx;
    open_pairs_[std::minmax(*it->second.initiator_half, idx)] = xid;
  }
  return e;
}

void EventHistory::collapse_exchange(ExchangeId xid, Direction dir) {
  auto it = exchanges_.find(xid);
  if (it == exchanges_.end() || it->second.state != Exchange::State::Open) {
    throw std::invalid_argument("collapse_exchange: exchange not open");
  }
  Exchange& x = it->second;
  if (x.initiator_half && x.responder_half) {
    uint32_t from = *x.initiator_half;
    uint32_t to = *x.responder_half;
    if (dir == Direction::ResponderToInitiator) std::swap(from, to);
    if (reaches(to, from)) {
      throw std::invalid_argument(
          "collapse_exchange: direction contradicts existing causal paths");
    }
    add_edge(from, to);
    open_pairs_.erase(std::minmax(*x.initiator_half, *x.responder_half));
  }
  x.state = Exchange::State::Committed;
}

void EventHistory::abort_exchange(ExchangeId xid) {
  auto it = exchanges_.find(xid);
  if (it == exchanges_.end() || it->second.state != Exchange::State::Open) {
    throw std::invalid_argument("abort_exchange: exchange not open");
  }
  Exchange& x = it->second;
  if (x.initiator_half && x.responder_half) {
    open_pairs_.erase(std::minmax(*x.initiator_half, *x.responder_half));
  }
  x.state = Exchange::State::Aborted;
}

bool EventHistory::contains(EventId id) const { return by_id_.count(id) > 0; }

bool EventHistory::exchange_open(ExchangeId xid) const {
  auto it = exchanges_.find(xid);
  return it != exchanges_.end() && it->second.state == Exchange::State::Open;
}

std::vector<EventId> EventHistory::all_events() const {
  std::vector<EventId> out;
  out.reserve(events_.size());
  for (const auto& [id, idx] : by_id_) out.push_back(id);
  return out;
}

std::vector<ExchangeId> EventHistory::open_exchange_ids() const {
  std::vector<ExchangeId> out;
  for (const auto& [xid, x] : exchanges_) {
    if (x.state == Exchange::State::Open) out.push_back(xid);
  }
  return out;
}

std::vector<EventId> EventHistory::exchange_halves(ExchangeId xid) const {
  auto it = exchanges_.find(xid);
  if (it == exchanges_.end()) {
    throw std::invalid_argument("exchange_halves: unknown exchange");
  }
  std::vector<EventId> out;
  for (auto idx : {it->second.initiator_half, it->second.responder_half}) {
    if (idx) out.push_back(EventId{events_[*idx].node, events_[*idx].seq});
  }
  return out;
}

uint32_t EventHistory::index_of(EventId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) {
    throw std::invalid_argument("unknown event");
  }
  return it->second;
}

void EventHistory::add_edge(uint32_t from, uint32_t to) {
  events_[from].succs.push_back(to);
  events_[to].preds.push_back(from);
  labels_dirty_ = true;
}

bool EventHistory::reaches(uint32_t from, uint32_t to) const {
  if (from == to) return true;
  std::vector<char> seen(events_.size(), 0);
  std::deque<uint32_t> queue{from};
  seen[from] = 1;
  while (!queue.empty()) {
    uint32_t cur = queue.front();
    queue.pop_front();
    for (uint32_t next : events_[cur].succs) {
      if (next == to) return true;
      if (!seen[next]) {
        seen[next] = 1;
        queue.push_back(next);
      }
    }
  }
  return false;
}

void EventHistory::recompute_labels() const {
  labels_.assign(events_.size(), Label{});
  std::vector<uint32_t> indegree(events_.size(), 0);
  for (const Event& e : events_) {
    for (uint32_t s : e.succs) ++indegree[s];
  }
  std::deque<uint32_t> ready;
  for (uint32_t i = 0; i < events_.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::size_t done = 0;
  while (!ready.empty()) {
    uint32_t cur = ready.front();
    ready.pop_front();
    ++done;
    Label& label = labels_[cur];
    for (uint32_t p : events_[cur].preds) {
      for (const auto& [node, seq] : labels_[p]) {
        auto& slot = label[node];
        slot = std::max(slot, seq);
      }
    }
    auto& own = label[events_[cur].node];
    own = std::max(own, events_[cur].seq);
    for (uint32_t s : events_[cur].succs) {
      if (--indegree[s] == 0) ready.push_back(s);
    }
  }
  if (done != events_.size()) {
    throw std::logic_error("event history contains a causal cycle");
  }
  labels_dirty_ = false;
}

Relation EventHistory::compare(EventId a, EventId b) const {
  if (a == b) {
    throw std::invalid_argument("compare: relation defined on distinct events");
  }
  uint32_t ia = index_of(a);
  uint32_t ib = index_of(b);
  if (open_pairs_.count(std::minmax(ia, ib))) return Relation::Indefinite;
  if (labels_dirty_ || labels_.size() != events_.size()) recompute_labels();
  auto seen = [this](uint32_t of, EventId e) {
    const Label& label = labels_[of];
    auto it = label.find(e.node);
    return it != label.end() && it->second >= e.seq;
  };
  if (seen(ib, a)) return Relation::Before;
  if (seen(ia, b)) return Relation::After;
  return Relation::Concurrent;
}

Relation EventHistory::oracle_relation(EventId a, EventId b) const {
  if (a == b) {
    throw std::invalid_argument("compare: relation defined on distinct events");
  }
  uint32_t ia = index_of(a);
  uint32_t ib = index_of(b);
  for (const auto& [xid, x] : exchanges_) {
    if (x.state != Exchange::State::Open) continue;
    if (!x.initiator_half || !x.responder_half) continue;
    if ((*x.initiator_half == ia && *x.responder_half == ib) ||
        (*x.initiator_half == ib && *x.responder_half == ia)) {
      return Relation::Indefinite;
    }
  }
  if (reaches(ia, ib)) return Relation::Before;
  if (reaches(ib, ia)) return Relation::After;
  return Relation::Concurrent;
}

}  // namespace leibniz::causal
