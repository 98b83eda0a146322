#include "leibniz/audit.hpp"

#include <algorithm>
#include <stdexcept>

namespace leibniz::audit {

uint64_t frame_potential(const link::Frame& f, PotentialModel model) {
  if (model != PotentialModel::SurprisalUniform) {
    throw std::invalid_argument("frame_potential: unsupported potential model");
  }
  return f.payload.size() * 8;
}

FluxLedger::FluxLedger(const RunTrace& trace) {
  nodes_ = trace.header.nodes;
  duration_ = trace.header.duration;
  for (const std::string& n : nodes_) flux_[n];
  for (const auto& ev : trace.events) {
    if (!ev.bits || *ev.bits == 0) continue;
    if (ev.kind == "frame-sent") {
      PerSlot& ps = flux_[ev.node][ev.slot];
      ps.out += *ev.bits;
      if (ev.src && *ev.src == ev.node) ps.source += *ev.bits;
      edge_entered_[ev.edge] += *ev.bits;
    } else if (ev.kind == "frame-delivered") {
      PerSlot& ps = flux_[ev.node][ev.slot];
      ps.in += *ev.bits;
      if (ev.dst && *ev.dst == ev.node) ps.sink += *ev.bits;
      edge_exited_[ev.edge] += *ev.bits;
    }
  }
}

int64_t FluxLedger::node_residual(const std::string& node,
                                  uint64_t slot) const {
  auto it = flux_.find(node);
  if (it == flux_.end()) {
    throw std::invalid_argument("node_residual: unknown node " + node);
  }
  if (slot >= duration_) {
    throw std::invalid_argument("node_residual: slot beyond the run");
  }
  auto ps = it->second.find(slot);
  if (ps == it->second.end()) return 0;
  const PerSlot& f = ps->second;
  return static_cast<int64_t>(f.in + f.source) -
         static_cast<int64_t>(f.out + f.sink);
}

uint64_t FluxLedger::edge_flux_deficit(const std::string& edge) const {
  auto in = edge_entered_.find(edge);
  if (in == edge_entered_.end()) return 0;
  auto out = edge_exited_.find(edge);
  uint64_t exited = out == edge_exited_.end() ? 0 : out->second;
  return in->second - exited;
}

std::map<uint64_t, TxnAudit> collect_transactions(const RunTrace& trace) {
  std::map<uint64_t, TxnAudit> txns;
  for (const auto& ev : trace.events) {
    if (!ev.txn) continue;
    if (ev.kind == "frame-sent" && ev.tag && *ev.tag == "TIK" && ev.src &&
        ev.dst) {
      TxnAudit& t = txns[*ev.txn];
      if (t.txn == 0) {
        t.txn = *ev.txn;
        t.initiator = *ev.src;
        t.responder = *ev.dst;
        t.edge = *ev.src < *ev.dst ? *ev.src + "-" + *ev.dst
                                   : *ev.dst + "-" + *ev.src;
        t.payload_bits = ev.bits.value_or(0);
        t.asserted_slot = ev.slot;
      }
    } else if (ev.kind == "phase-change" && ev.phase &&
               *ev.phase == "reflecting" && ev.role &&
               *ev.role == "initiator") {
      txns[*ev.txn].reflection_confirmed = true;
    } else if ((ev.kind == "commit" || ev.kind == "abort") && ev.role &&
               *ev.role == "initiator") {
      txns[*ev.txn].initiator_terminal = true;
    }
  }
  // committed = both sides reported commit
  std::map<uint64_t, int> commit_sides;
  for (const auto& ev : trace.events) {
    if (ev.kind == "commit" && ev.txn && ev.role) ++commit_sides[*ev.txn];
  }
  for (auto& [id, t] : txns) {
    auto it = commit_sides.find(id);
    t.committed = it != commit_sides.end() && it->second >= 2;
  }
  return txns;
}

double exchange_deficit(const TxnAudit& txn) {
  if (!txn.initiator_terminal) {
    throw std::invalid_argument("exchange_deficit: transaction not terminal");
  }
  return txn.reflection_confirmed ? 0.0 : 1.0;
}

double exchange_deficit(const RunTrace& trace, uint64_t txn_id) {
  auto txns = collect_transactions(trace);
  auto it = txns.find(txn_id);
  if (it == txns.end()) {
    throw std::invalid_argument("exchange_deficit: unknown transaction");
  }
  return exchange_deficit(it->second);
}

uint64_t entropy_produced(const RunTrace& trace) {
  uint64_t bits = 0;
  for (const auto& [id, t] : collect_transactions(trace)) {
    if (exchange_deficit(t) > 0.0) bits += t.payload_bits;
  }
  return bits;
}

int64_t loop_residual(const RunTrace& trace,
                      const std::vector<std::string>& cycle,
                      uint64_t window_start, uint64_t window_end) {
  if (cycle.size() < 3) {
    throw std::invalid_argument("loop_residual: cycle needs at least 3 edges");
  }
  // closed walk: consecutive edges share a node, last shares with first
  auto split = [](const std::string& e) -> std::pair<std::string, std::string> {
    auto dash = e.find('-');
    if (dash == std::string::npos) {
      throw std::invalid_argument("loop_residual: bad edge name " + e);
    }
    return {e.substr(0, dash), e.substr(dash + 1)};
  };
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    auto [a1, a2] = split(cycle[i]);
    auto [b1, b2] = split(cycle[(i + 1) % cycle.size()]);
    if (a1 != b1 && a1 != b2 && a2 != b1 && a2 != b2) {
      throw std::invalid_argument("loop_residual: cycle is not closed at " +
                                  cycle[i]);
    }
  }
  std::set<std::string> cycle_edges(cycle.begin(), cycle.end());
  int64_t residual = 0;
  for (const auto& [id, t] : collect_transactions(trace)) {
    if (!cycle_edges.count(t.edge)) continue;
    if (t.asserted_slot < window_start || t.asserted_slot >= window_end) {
      continue;
    }
    residual += static_cast<int64_t>(t.payload_bits);
    if (t.reflection_confirmed) residual -= static_cast<int64_t>(t.payload_bits);
  }
  return residual;
}

PifThroughput pif_throughput(const RunTrace& trace, const std::string& edge) {
  PifThroughput out;
  auto txns = collect_transactions(trace);
  // the two sides of the identity come from different event streams:
  // forward payload bits from initiator commits, confirmation bits from
  // responder commits
  uint64_t forward = 0;
  uint64_t confirmation = 0;
  std::map<std::string, uint64_t> asserted_by_direction;
  for (const auto& ev : trace.events) {
    if (ev.kind != "commit" || !ev.txn || !ev.role || !ev.bits) continue;
    auto it = txns.find(*ev.txn);
    if (it == txns.end() || it->second.edge != edge) continue;
    if (!it->second.committed) continue;
    if (*ev.role == "initiator") forward += *ev.bits;
    if (*ev.role == "responder") confirmation += *ev.bits;
  }
  for (const auto& [id, t] : txns) {
    if (t.edge == edge) asserted_by_direction[t.initiator] += t.payload_bits;
  }
  out.one_way_bits = forward;
  out.bilateral_bits = forward + confirmation;
  uint64_t slots = trace.header.duration;
  if (slots > 0) {
    out.one_way_bits_per_slot = static_cast<double>(out.one_way_bits) / slots;
    out.bilateral_bits_per_slot =
        static_cast<double>(out.bilateral_bits) / slots;
  }
  if (asserted_by_direction.size() == 2) {
    auto a = asserted_by_direction.begin();
    auto b = std::next(a);
    out.symmetric = a->second == b->second;
  } else {
    out.symmetric = asserted_by_direction.empty();
  }
  return out;
}

ConservationReport check_conservation(const RunTrace& trace) {
  ConservationReport report;
  FluxLedger ledger(trace);

  // node law, every node, every slot
  std::set<uint64_t> active_slots;
  for (const auto& ev : trace.events) active_slots.insert(ev.slot);
  for (const std::string& node : ledger.nodes()) {
    for (uint64_t slot : active_slots) {
      if (slot >= ledger.duration()) continue;
      int64_t r = ledger.node_residual(node, slot);
      ++report.node_slot_checks;
      if (r != 0) {
        report.violations.push_back("node law: residual " + std::to_string(r) +
                                    " at node " + node + " slot " +
                                    std::to_string(slot));
      }
    }
  }

  bool oae = trace.header.protocol == "oae";
  bool lossless = trace.header.loss_ppm == 0;
  for (const auto& ev : trace.events) {
    if (ev.kind == "partition-start") lossless = false;
  }

  if (oae) {
    report.entropy_recomputed = entropy_produced(trace);
    if (report.entropy_recomputed != trace.footer.entropy_bits) {
      report.violations.push_back(
          "deficit reconciliation: recomputed entropy " +
          std::to_string(report.entropy_recomputed) + " bits, footer claims " +
          std::to_string(trace.footer.entropy_bits));
    }
    if (lossless) {
      report.lossless_claims_checked = true;
      if (report.entropy_recomputed != 0) {
        report.violations.push_back("lossless run produced entropy " +
                                    std::to_string(report.entropy_recomputed));
      }
      // loop law on every triangle of the topology
      std::vector<std::string> names = trace.header.nodes;
      std::set<std::string> edges(trace.header.edges.begin(),
                                  trace.header.edges.end());
      auto edge_name = [](const std::string& a, const std::string& b) {
        return a < b ? a + "-" + b : b + "-" + a;
      };
      for (std::size_t i = 0; i < names.size(); ++i) {
        for (std::size_t j = i + 1; j < names.size(); ++j) {
          for (std::size_t k = j + 1; k < names.size(); ++k) {
            std::string ab = edge_name(names[i], names[j]);
            std::string bc = edge_name(names[j], names[k]);
            std::string ca = edge_name(names[k], names[i]);
            if (!edges.count(ab) || !edges.count(bc) || !edges.count(ca)) {
              continue;
            }
            int64_t r = loop_residual(trace, {ab, bc, ca}, 0,
                                      trace.header.duration);
            if (r != 0) {
              report.violations.push_back(
                  "loop law: residual " + std::to_string(r) +
                  " bits around " + ab + "," + bc + "," + ca);
            }
          }
        }
      }
    }
  }
  return report;
}

}  // namespace leibniz::audit
