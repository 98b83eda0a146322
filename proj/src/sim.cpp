#include "leibniz/sim.hpp"

#include <algorithm>
#include <tuple>
#include <stdexcept>

#include "leibniz/digest.hpp"
#include "leibniz/rng.hpp"

namespace leibniz::sim {

using link::Effect;
using link::Frame;
using link::FrameTag;
using link::Phase;
using link::Role;
using link::Verdict;

Simulator::Simulator(Scenario scenario) : scenario_(std::move(scenario)) {
  const Topology& topo = scenario_.topology;
  uint32_t idx = 0;
  for (const Edge& e : topo.edges) edge_index_[e] = idx++;

  RunHeader& h = trace_.header;
  h.protocol = to_string(scenario_.protocol);
  h.seed = scenario_.seed;
  h.duration = scenario_.duration;
  h.delay = scenario_.link.delay;
  h.loss_ppm = static_cast<uint64_t>(scenario_.link.loss_prob * 1e6 + 0.5);
  h.relay = scenario_.relay;
  h.retransmit = scenario_.retransmit;
  h.horizon = scenario_.horizon;
  switch (topo.kind) {
    case Topology::Kind::Triangle: h.topology_kind = "triangle"; break;
    case Topology::Kind::Complete: h.topology_kind = "complete"; break;
    case Topology::Kind::OctavalentGrid: h.topology_kind = "grid"; break;
  }
  h.nodes = topo.names;
  for (const Edge& e : topo.edges) h.edges.push_back(topo.edge_name(e));
  h.scenario_digest = digest_hex(scenario_.digest());

  metrics_.protocol = h.protocol;
  metrics_.scenario = scenario_.name;
  metrics_.seed = scenario_.seed;

  for (NodeId n = 0; n < topo.node_count(); ++n) {
    std::set<NodeId> neigh;
    for (NodeId m : topo.neighbors(n)) neigh.insert(m);
    endpoints_.emplace(n, link::Endpoint(n, topo.names[n], neigh));
    endpoints_.at(n).set_default_horizon(scenario_.horizon);
    clocks_.emplace(n, causal::TensorClock(n));
    if (scenario_.protocol == Protocol::Lww) {
      lww_.replicas[n] = baselines::LwwReplica{};
    }
  }

  // workload schedule, transaction ids in deterministic order
  if (scenario_.protocol != Protocol::Lww) {
    for (std::size_t fi = 0; fi < scenario_.flows.size(); ++fi) {
      const Flow& f = scenario_.flows[fi];
      for (uint64_t k = 0; k < f.count; ++k) {
        initiations_.push_back(
            Initiation{f.start + k * f.period, f.from, f.to, f.payload_bytes, 0});
      }
    }
    std::stable_sort(initiations_.begin(), initiations_.end(),
                     [](const Initiation& a, const Initiation& b) {
                       return std::tie(a.slot, a.from, a.to) <
                              std::tie(b.slot, b.from, b.to);
                     });
    uint64_t next_txn = 1;
    for (auto& ini : initiations_) ini.txn = next_txn++;
  }

  retransmit_period_ = std::max<uint64_t>(1, (scenario_.horizon + 3) / 4);
}

uint32_t Simulator::edge_index(Edge e) const { return edge_index_.at(e); }

std::string Simulator::payload_for(uint64_t txn, uint64_t bytes) const {
  std::string out;
  out.reserve(bytes);
  for (uint64_t i = 0; i < bytes; ++i) {
    uint64_t word = hash_keys({0x70617964ULL, scenario_.seed, txn, i / 8});
    out.push_back(static_cast<char>((word >> (8 * (i % 8))) & 0xff));
  }
  return out;
}

bool Simulator::edge_partitioned_during(Edge e, uint64_t entered,
                                        uint64_t arrival) const {
  // the frame occupies the edge during [entered, arrival); windows are
  // [start, end) as well
  for (const PartitionWindow& w : scenario_.link.partitions) {
    if (w.edge != e) continue;
    uint64_t w_end = w.end.value_or(UINT64_MAX);
    if (entered < w_end && w.start < arrival) return true;
  }
  return false;
}

std::set<Edge> Simulator::live_edges(uint64_t slot) const {
  std::set<Edge> live = scenario_.topology.edges;
  for (const PartitionWindow& w : scenario_.link.partitions) {
    uint64_t w_end = w.end.value_or(UINT64_MAX);
    if (w.start <= slot && slot < w_end) live.erase(w.edge);
  }
  return live;
}

void Simulator::trace_frame(const char* kind, const InFlight& env,
                            uint64_t slot, const std::string& note) {
  const Topology& topo = scenario_.topology;
  TraceEvent ev;
  ev.slot = slot;
  ev.kind = kind;
  if (env.frame.txn_id != 0) ev.txn = env.frame.txn_id;
  Edge e = make_edge(env.path[env.hop], env.path[env.hop + 1]);
  ev.edge = topo.edge_name(e);
  ev.node = std::string(kind) == std::string("frame-sent")
                ? topo.names[env.path[env.hop]]
                : topo.names[env.path[env.hop + 1]];
  ev.bits = env.frame.payload.size() * 8;
  ev.tag = std::string(to_string(env.frame.tag));
  if (env.frame.verdict != Verdict::None) {
    ev.verdict = std::string(to_string(env.frame.verdict));
  }
  if (env.frame.reflection_digest) {
    ev.digest = digest_hex(*env.frame.reflection_digest);
  } else if (!env.frame.payload.empty()) {
    ev.digest = digest_hex(digest64(env.frame.payload));
  }
  ev.src = topo.names[env.frame.src];
  ev.dst = topo.names[env.frame.dst];
  if (!note.empty()) ev.note = note;
  trace_.events.push_back(std::move(ev));
}

void Simulator::route_and_send(Frame f, uint64_t slot) {
  const Topology& topo = scenario_.topology;
  std::vector<NodeId> path{f.src, f.dst};
  bool relayed = false;
  bool use_relay =
      scenario_.relay && scenario_.protocol == Protocol::Oae;
  if (use_relay) {
    auto route = relay_route(topo, live_edges(slot), f.src, f.dst);
    if (route && route->size() > 2) {
      path = *route;
      relayed = true;
    }
    // with no live path at all, fall back to the direct edge and let the
    // partition account for the loss
  }
  InFlight env;
  env.frame = std::move(f);
  env.path = std::move(path);
  env.hop = 0;
  env.sent_slot = slot;
  if (relayed && env.frame.txn_id != 0 &&
      relayed_txns_.insert(env.frame.txn_id).second) {
    TraceEvent ev;
    ev.slot = slot;
    ev.kind = "relay-used";
    ev.txn = env.frame.txn_id;
    ev.node = scenario_.topology.names[env.frame.src];
    std::string p;
    for (std::size_t i = 0; i < env.path.size(); ++i) {
      if (i) p += '>';
      p += scenario_.topology.names[env.path[i]];
    }
    ev.path = p;
    trace_.events.push_back(std::move(ev));
    ++metrics_.relay_uses;
  }
  hop_send(std::move(env), slot);
}

void Simulator::hop_send(InFlight env, uint64_t slot) {
  NodeId from = env.path[env.hop];
  NodeId to = env.path[env.hop + 1];
  env.frame.seq = ++link_seq_[{from, to}];
  env.sent_slot = slot;
  trace_frame("frame-sent", env, slot);
  arrivals_at_[slot + scenario_.link.delay].push_back(std::move(env));
}

void Simulator::deliver(const InFlight& env, uint64_t slot) {
  NodeId from = env.path[env.hop];
  NodeId to = env.path[env.hop + 1];
  Edge e = make_edge(from, to);
  if (edge_partitioned_during(e, env.sent_slot, slot)) {
    trace_frame("frame-dropped", env, slot, "partitioned");
    return;
  }
  double draw = unit_draw({scenario_.seed, edge_index(e), env.sent_slot,
                           env.frame.seq, from});
  if (draw < scenario_.link.loss_prob) {
    trace_frame("frame-dropped", env, slot, "loss");
    return;
  }
  trace_frame("frame-delivered", env, slot);
  if (to != env.frame.dst) {
    // relay: forward on the next hop within the same slot
    InFlight next = env;
    next.hop += 1;
    hop_send(std::move(next), slot);
    return;
  }
  switch (scenario_.protocol) {
    case Protocol::Oae: oae_deliver(env.frame, to, slot); break;
    case Protocol::FireForget: ff_deliver(env.frame, to, slot); break;
    case Protocol::Lww: lww_deliver(env.frame, to, slot); break;
  }
}

void Simulator::schedule_txn_timers(NodeId at, uint64_t txn, uint64_t slot) {
  const link::Transaction* t = endpoints_.at(at).txn(txn);
  if (!t) return;
  expiry_at_[t->deadline].push_back({at, txn});
  if (scenario_.retransmit) {
    retransmit_at_[slot + retransmit_period_].push_back({at, txn});
  }
}

void Simulator::apply_effect(Effect eff, uint64_t slot) {
  for (auto& ev : eff.events) {
    bool commit = ev.kind == "commit";
    bool abort = ev.kind == "abort";
    trace_.events.push_back(ev);
    if (!ev.txn) continue;
    uint64_t txn = *ev.txn;
    if (commit && ev.role && *ev.role == "initiator") {
      // the initiator's commit collapses the exchange: the direction of
      // time on this link is now definite
      if (history_.exchange_open(txn)) {
        history_.collapse_exchange(txn, causal::Direction::InitiatorToResponder);
        auto& meta = txns_.at(txn);
        collapse_exchange(clocks_.at(meta.initiator), clocks_.at(meta.responder),
                          txn, causal::Direction::InitiatorToResponder);
      }
    } else if (abort) {
      if (history_.exchange_open(txn)) {
        history_.abort_exchange(txn);
        auto& meta = txns_.at(txn);
        abort_exchange(clocks_.at(meta.initiator), clocks_.at(meta.responder),
                       txn);
      }
    }
  }
  for (Frame& f : eff.send) {
    route_and_send(std::move(f), slot);
  }
}

void Simulator::oae_deliver(const Frame& f, NodeId at, uint64_t slot) {
  link::Endpoint& ep = endpoints_.at(at);
  bool first_sight = f.tag == FrameTag::Tik && ep.txn(f.txn_id) == nullptr;
  Effect eff = ep.on_frame(f, slot);
  if (first_sight && ep.txn(f.txn_id) != nullptr) {
    // the responder's receive half of the exchange
    auto ev = clocks_.at(at).tick(at);
    history_.add_exchange_half(f.txn_id, ev);
    schedule_txn_timers(at, f.txn_id, slot);
  }
  apply_effect(std::move(eff), slot);
}

void Simulator::ff_deliver(const Frame& f, NodeId at, uint64_t slot) {
  if (f.tag != FrameTag::Data) return;
  if (!ff_.applied.insert(f.txn_id).second) return;
  TraceEvent ev;
  ev.slot = slot;
  ev.kind = "commit";
  ev.txn = f.txn_id;
  ev.node = scenario_.topology.names[at];
  ev.bits = f.payload.size() * 8;
  ev.note = "applied";
  trace_.events.push_back(std::move(ev));
}

void Simulator::lww_deliver(const Frame& f, NodeId at, uint64_t slot) {
  if (f.tag != FrameTag::Gossip) return;
  auto& replica = lww_.replicas.at(at);
  for (auto& [key, entry] : baselines::parse_store(f.payload)) {
    uint64_t discarded = baselines::lww_merge(replica, key, entry);
    if (discarded != 0) {
      TraceEvent ev;
      ev.slot = slot;
      ev.kind = "phase-change";
      ev.txn = discarded;
      ev.node = scenario_.topology.names[at];
      ev.key = key;
      ev.phase = "discarded";
      trace_.events.push_back(std::move(ev));
    }
  }
}

void Simulator::lww_write(const LwwWrite& w, uint64_t slot) {
  auto& replica = lww_.replicas.at(w.node);
  int64_t skew = 0;
  if (auto it = scenario_.lww.skew.find(w.node); it != scenario_.lww.skew.end()) {
    skew = it->second;
  }
  baselines::LwwEntry e;
  e.value = w.value;
  e.ts = static_cast<uint64_t>(static_cast<int64_t>(slot) + skew);
  e.writer = w.node;
  e.write_id = next_write_id_++;
  e.past = replica.seen[w.key];

  TraceEvent ev;
  ev.slot = slot;
  ev.kind = "commit";
  ev.txn = e.write_id;
  ev.node = scenario_.topology.names[w.node];
  ev.key = w.key;
  ev.writer = scenario_.topology.names[w.node];
  ev.ts = e.ts;
  ev.bits = e.value.size() * 8;
  std::string seen_csv;
  for (uint64_t p : e.past) {
    if (!seen_csv.empty()) seen_csv += ',';
    seen_csv += std::to_string(p);
  }
  ev.seen = seen_csv.empty() ? "-" : seen_csv;
  trace_.events.push_back(std::move(ev));

  lww_.write_key[e.write_id] = w.key;
  lww_.all_writes.push_back(e);
  baselines::lww_merge(replica, w.key, std::move(e));
  ++metrics_.txns;
  ++metrics_.commits;  // FITO: the write reports success immediately
}

void Simulator::lww_gossip(uint64_t slot) {
  const Topology& topo = scenario_.topology;
  for (auto& [n, replica] : lww_.replicas) {
    if (replica.store.empty()) continue;
    std::string payload = baselines::serialize_store(replica);
    for (NodeId peer : topo.neighbors(n)) {
      Frame f;
      f.src = n;
      f.dst = peer;
      f.tag = FrameTag::Gossip;
      f.payload = payload;
      route_and_send(std::move(f), slot);
    }
  }
}

void Simulator::partition_events(uint64_t slot) {
  for (const PartitionWindow& w : scenario_.link.partitions) {
    if (w.start == slot) {
      TraceEvent ev;
      ev.slot = slot;
      ev.kind = "partition-start";
      ev.edge = scenario_.topology.edge_name(w.edge);
      trace_.events.push_back(std::move(ev));
    }
    if (w.end && *w.end == slot) {
      TraceEvent ev;
      ev.slot = slot;
      ev.kind = "partition-end";
      ev.edge = scenario_.topology.edge_name(w.edge);
      trace_.events.push_back(std::move(ev));
    }
  }
}

void Simulator::arrivals(uint64_t slot) {
  auto it = arrivals_at_.find(slot);
  if (it == arrivals_at_.end()) return;
  // relay forwards re-enter an edge in the same slot but arrive at least
  // one delay later, so this batch is complete
  std::vector<InFlight> batch = std::move(it->second);
  arrivals_at_.erase(it);
  for (const InFlight& env : batch) deliver(env, slot);
}

void Simulator::initiations(uint64_t slot) {
  if (scenario_.protocol == Protocol::Lww) {
    for (const LwwWrite& w : scenario_.lww.writes) {
      if (w.slot == slot) lww_write(w, slot);
    }
    return;
  }
  while (next_initiation_ < initiations_.size() &&
         initiations_[next_initiation_].slot == slot) {
    const Initiation& ini = initiations_[next_initiation_];
    std::string payload = payload_for(ini.txn, ini.payload_bytes);
    txns_[ini.txn] = TxnMeta{ini.from, ini.to, ini.payload_bytes * 8};
    ++metrics_.txns;
    if (scenario_.protocol == Protocol::Oae) {
      link::Endpoint& ep = endpoints_.at(ini.from);
      Effect eff =
          ep.initiate(ini.txn, ini.to, payload, slot, scenario_.horizon);
      // the send half of the exchange; the pair stays indefinite in flight
      auto ev = clocks_.at(ini.from).tick(ini.from);
      history_.open_exchange(ini.txn);
      history_.add_exchange_half(ini.txn, ev);
      open_exchange(clocks_.at(ini.from), clocks_.at(ini.to), ini.txn);
      schedule_txn_timers(ini.from, ini.txn, slot);
      apply_effect(std::move(eff), slot);
    } else {  // fire-and-forget: success is claimed at emission
      ff_.claimed.insert(ini.txn);
      ff_.payload_bits[ini.txn] = ini.payload_bytes * 8;
      TraceEvent ev;
      ev.slot = slot;
      ev.kind = "commit";
      ev.txn = ini.txn;
      ev.node = scenario_.topology.names[ini.from];
      ev.bits = ini.payload_bytes * 8;
      ev.note = "claimed-at-send";
      trace_.events.push_back(std::move(ev));
      Frame f;
      f.src = ini.from;
      f.dst = ini.to;
      f.tag = FrameTag::Data;
      f.txn_id = ini.txn;
      f.payload = payload;
      route_and_send(std::move(f), slot);
    }
    ++next_initiation_;
  }
}

void Simulator::timers(uint64_t slot) {
  if (scenario_.protocol == Protocol::Lww) {
    if (slot > 0 && slot % scenario_.lww.gossip_period == 0) lww_gossip(slot);
    return;
  }
  if (!scenario_.retransmit) return;
  auto it = retransmit_at_.find(slot);
  if (it == retransmit_at_.end()) return;
  auto due = std::move(it->second);
  retransmit_at_.erase(it);
  for (auto& [node, txn] : due) {
    auto frame = endpoints_.at(node).retransmit(txn);
    if (!frame) continue;  // terminal, retry chain ends
    route_and_send(std::move(*frame), slot);
    retransmit_at_[slot + retransmit_period_].push_back({node, txn});
  }
}

void Simulator::expiries(uint64_t slot) {
  auto it = expiry_at_.find(slot);
  if (it == expiry_at_.end()) return;
  auto due = std::move(it->second);
  expiry_at_.erase(it);
  for (auto& [node, txn] : due) {
    Effect eff = endpoints_.at(node).on_horizon_expiry(txn, slot);
    apply_effect(std::move(eff), slot);
  }
}

void Simulator::process_slot(uint64_t slot) {
  partition_events(slot);
  arrivals(slot);
  initiations(slot);
  timers(slot);
  expiries(slot);
}

void Simulator::finalize() {
  uint64_t slot = scenario_.duration;
  RunFooter& f = trace_.footer;
  f.slot = slot;

  if (scenario_.protocol == Protocol::Oae) {
    // A responder that first saw its TIK late may still be inside its own
    // horizon when the run ends; the end of the run is its horizon.
    for (const auto& [txn, meta] : txns_) {
      for (NodeId n : {meta.initiator, meta.responder}) {
        const link::Transaction* t = endpoints_.at(n).txn(txn);
        if (t && !link::is_terminal(t->phase)) {
          apply_effect(endpoints_.at(n).on_horizon_expiry(txn, slot), slot);
        }
      }
    }
    for (const auto& [txn, meta] : txns_) {
      const link::Transaction* ti = endpoints_.at(meta.initiator).txn(txn);
      const link::Transaction* tr = endpoints_.at(meta.responder).txn(txn);
      if (!ti || !link::is_terminal(ti->phase) ||
          (tr && !link::is_terminal(tr->phase))) {
        throw std::logic_error("run ended with a non-terminal transaction");
      }
      bool i_agreed = ti->phase == Phase::Agreed;
      bool r_agreed = tr && tr->phase == Phase::Agreed;
      if (i_agreed && r_agreed) {
        if (ti->digest != tr->digest) {
          throw std::logic_error("agreement safety violated: digest mismatch");
        }
        ++metrics_.commits;
      } else if (i_agreed != r_agreed) {
        ++metrics_.detected_divergences;
        TraceEvent ev;
        ev.slot = slot;
        ev.kind = "divergence-detected";
        ev.txn = txn;
        ev.node = scenario_.topology
                      .names[i_agreed ? meta.responder : meta.initiator];
        ev.note = i_agreed ? "responder-aborted" : "initiator-aborted";
        trace_.events.push_back(std::move(ev));
      } else {
        ++metrics_.aborts;
      }
      // no silent success
      if (i_agreed && !(ti->reflection_verified)) {
        throw std::logic_error("initiator agreed without verified reflection");
      }
      if (r_agreed && !(tr->commit_verdict_seen)) {
        throw std::logic_error("responder agreed without a commit verdict");
      }
      // informational deficit: zero only when the reflection verified the
      // assertion; the payload-weighted sum is the run's entropy output
      bool confirmed = ti->reflection_verified;
      if (!confirmed) metrics_.entropy_produced_bits += meta.payload_bits;
      // committed exchanges must carry a definite direction now
      if (i_agreed && r_agreed) {
        auto halves = history_.exchange_halves(txn);
        if (halves.size() == 2 &&
            history_.compare(halves[0], halves[1]) !=
                causal::Relation::Before) {
          throw std::logic_error("committed exchange not ordered before");
        }
      }
    }
    if (metrics_.commits + metrics_.aborts + metrics_.detected_divergences !=
        metrics_.txns) {
      throw std::logic_error("transaction accounting does not add up");
    }
  } else if (scenario_.protocol == Protocol::FireForget) {
    metrics_.commits = ff_.applied.size();
    for (uint64_t txn : ff_.claimed) {
      if (ff_.applied.count(txn)) continue;
      ++metrics_.silent_corruptions;
      metrics_.entropy_produced_bits += ff_.payload_bits.at(txn);
      TraceEvent ev;
      ev.slot = slot;
      ev.kind = "corruption-detected";
      ev.txn = txn;
      ev.note = "claimed-never-applied";
      trace_.events.push_back(std::move(ev));
    }
  } else {  // lww
    // global winner per key; every losing write the winner does not
    // causally dominate is silent corruption
    std::map<std::string, const baselines::LwwEntry*> winner;
    for (const auto& w : lww_.all_writes) {
      const std::string& key = lww_.write_key.at(w.write_id);
      auto [it, fresh] = winner.emplace(key, &w);
      if (!fresh && baselines::lww_wins(w, *it->second)) it->second = &w;
    }
    for (const auto& w : lww_.all_writes) {
      const std::string& key = lww_.write_key.at(w.write_id);
      const baselines::LwwEntry* win = winner.at(key);
      if (win->write_id == w.write_id) continue;
      if (!win->past.count(w.write_id)) {
        ++metrics_.silent_corruptions;
        metrics_.entropy_produced_bits += w.value.size() * 8;
        TraceEvent ev;
        ev.slot = slot;
        ev.kind = "corruption-detected";
        ev.txn = w.write_id;
        ev.key = key;
        ev.note = "concurrent-write-discarded";
        trace_.events.push_back(std::move(ev));
      }
    }
  }

  f.txns = metrics_.txns;
  f.commits = metrics_.commits;
  f.aborts = metrics_.aborts;
  f.divergences = metrics_.detected_divergences;
  f.silent_corruptions = metrics_.silent_corruptions;
  f.relay_uses = metrics_.relay_uses;
  f.entropy_bits = metrics_.entropy_produced_bits;
}

RunResult Simulator::run() {
  for (uint64_t slot = 0; slot < scenario_.duration; ++slot) {
    process_slot(slot);
  }
  finalize();
  RunResult result;
  result.trace = std::move(trace_);
  result.metrics = metrics_;
  result.endpoints = std::move(endpoints_);
  result.fireforget = std::move(ff_);
  result.lww = std::move(lww_);
  result.history = std::move(history_);
  return result;
}

RunResult run_scenario(const Scenario& s) { return Simulator(s).run(); }

}  // namespace leibniz::sim
