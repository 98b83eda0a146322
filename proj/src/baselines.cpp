#include "leibniz/baselines.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace leibniz::baselines {

std::string serialize_store(const LwwReplica& r) {
  // line per entry: key ts writer write_id value past_csv
  std::string out;
  for (const auto& [key, e] : r.store) {
    out += key;
    out += ' ';
    out += std::to_string(e.ts);
    out += ' ';
    out += std::to_string(e.writer);
    out += ' ';
    out += std::to_string(e.write_id);
    out += ' ';
    out += e.value;
    out += ' ';
    bool first = true;
    for (uint64_t p : e.past) {
      if (!first) out += ',';
      out += std::to_string(p);
      first = false;
    }
    if (first) out += '-';
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, LwwEntry>> parse_store(
    const std::string& payload) {
  std::vector<std::pair<std::string, LwwEntry>> out;
  std::istringstream in(payload);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key, past_csv;
    LwwEntry e;
    if (!(ls >> key >> e.ts >> e.writer >> e.write_id >> e.value >> past_csv)) {
      throw std::runtime_error("malformed gossip entry: " + line);
    }
    if (past_csv != "-") {
      std::istringstream ps(past_csv);
      std::string tok;
      while (std::getline(ps, tok, ',')) e.past.insert(std::stoull(tok));
    }
    out.emplace_back(key, std::move(e));
  }
  return out;
}

uint64_t lww_merge(LwwReplica& r, const std::string& key, LwwEntry incoming) {
  auto& seen = r.seen[key];
  bool first_sight = seen.insert(incoming.write_id).second;
  seen.insert(incoming.past.begin(), incoming.past.end());
  auto it = r.store.find(key);
  if (it == r.store.end()) {
    r.store.emplace(key, std::move(incoming));
    return 0;
  }
  LwwEntry& cur = it->second;
  if (cur.write_id == incoming.write_id) return 0;
  if (lww_wins(incoming, cur)) {
    uint64_t discarded = cur.write_id;
    cur = std::move(incoming);
    return discarded;
  }
  // incoming loses; only its first arrival at this replica is a discard
  return first_sight ? incoming.write_id : 0;
}

namespace {

uint64_t audit_fireforget(const sim::RunTrace& trace) {
  std::set<uint64_t> claimed;
  std::set<uint64_t> applied;
  for (const auto& ev : trace.events) {
    if (ev.kind != "commit" || !ev.txn || !ev.note) continue;
    if (*ev.note == "claimed-at-send") claimed.insert(*ev.txn);
    if (*ev.note == "applied") applied.insert(*ev.txn);
  }
  uint64_t count = 0;
  for (uint64_t txn : claimed) {
    if (!applied.count(txn)) ++count;
  }
  return count;
}

uint64_t audit_lww(const sim::RunTrace& trace) {
  // Reconstruct all writes from commit events, then flag every write the
  // global winner of its key does not causally dominate.
  struct W {
    uint64_t id;
    uint64_t ts;
    std::string writer;
    std::set<uint64_t> past;
  };
  std::map<std::string, std::vector<W>> per_key;
  for (const auto& ev : trace.events) {
    if (ev.kind != "commit" || !ev.txn || !ev.key || !ev.ts || !ev.writer) {
      continue;
    }
    W w;
    w.id = *ev.txn;
    w.ts = *ev.ts;
    w.writer = *ev.writer;
    if (ev.seen && *ev.seen != "-") {
      std::istringstream ps(*ev.seen);
      std::string tok;
      while (std::getline(ps, tok, ',')) w.past.insert(std::stoull(tok));
    }
    per_key[*ev.key].push_back(std::move(w));
  }
  auto writer_rank = [&trace](const std::string& name) {
    for (std::size_t i = 0; i < trace.header.nodes.size(); ++i) {
      if (trace.header.nodes[i] == name) return i;
    }
    return trace.header.nodes.size();
  };
  uint64_t count = 0;
  for (auto& [key, writes] : per_key) {
    if (writes.size() < 2) continue;
    const W* winner = &writes.front();
    for (const W& w : writes) {
      if (w.ts > winner->ts ||
          (w.ts == winner->ts && writer_rank(w.writer) > writer_rank(winner->writer))) {
        winner = &w;
      }
    }
    for (const W& w : writes) {
      if (w.id == winner->id) continue;
      if (!winner->past.count(w.id)) ++count;
    }
  }
  return count;
}

uint64_t audit_oae(const sim::RunTrace& trace) {
  // A commit may only follow the evidence the state table demands:
  //   initiator: a delivered digest-matching TYK (visible as its
  //     phase-change to reflecting) and a delivered TYK2.
  //   responder: a delivered TIK2 carrying a commit verdict.
  struct Seen {
    bool reflecting = false;
    bool tyk2 = false;
    bool tik2_commit = false;
  };
  std::map<std::pair<uint64_t, std::string>, Seen> seen;  // (txn, node)
  uint64_t violations = 0;
  for (const auto& ev : trace.events) {
    if (!ev.txn) continue;
    auto key = std::make_pair(*ev.txn, ev.node);
    if (ev.kind == "frame-delivered" && ev.tag) {
      if (*ev.tag == "TYK2") seen[key].tyk2 = true;
      if (*ev.tag == "TIK2" && ev.verdict && *ev.verdict == "commit") {
        seen[key].tik2_commit = true;
      }
    } else if (ev.kind == "phase-change" && ev.phase &&
               *ev.phase == "reflecting" && ev.role &&
               *ev.role == "initiator") {
      seen[key].reflecting = true;
    } else if (ev.kind == "commit" && ev.role) {
      const Seen& s = seen[key];
      if (*ev.role == "initiator") {
        if (!s.reflecting || !s.tyk2) ++violations;
      } else if (*ev.role == "responder") {
        if (!s.tik2_commit) ++violations;
      }
    }
  }
  return violations;
}

}  // namespace

uint64_t corruption_audit(const sim::RunTrace& trace, sim::Protocol protocol) {
  switch (protocol) {
    case sim::Protocol::FireForget: return audit_fireforget(trace);
    case sim::Protocol::Lww: return audit_lww(trace);
    case sim::Protocol::Oae: return audit_oae(trace);
  }
  throw std::invalid_argument("corruption_audit: unknown protocol");
}

}  // namespace leibniz::baselines
