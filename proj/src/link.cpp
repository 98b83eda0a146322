#include "leibniz/link.hpp"

#include <stdexcept>

#include "leibniz/digest.hpp"

namespace leibniz::link {

const char* to_string(FrameTag t) {
  switch (t) {
    case FrameTag::Tik: return "TIK";
    case FrameTag::Tyk: return "TYK";
    case FrameTag::Tik2: return "TIK2";
    case FrameTag::Tyk2: return "TYK2";
    case FrameTag::Data: return "DATA";
    case FrameTag::Gossip: return "GOSSIP";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::None: return "none";
    case Verdict::Commit: return "commit";
    case Verdict::Abort: return "abort";
  }
  return "?";
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "idle";
    case Phase::Tentative: return "tentative";
    case Phase::Reflecting: return "reflecting";
    case Phase::Agreed: return "agreed";
    case Phase::Aborted: return "aborted";
  }
  return "?";
}

const char* to_string(Role r) {
  return r == Role::Initiator ? "initiator" : "responder";
}

bool frame_well_formed(const Frame& f) {
  switch (f.tag) {
    case FrameTag::Tik:
      return !f.payload.empty() && !f.reflection_digest &&
             f.verdict == Verdict::None;
    case FrameTag::Tyk:
      return f.payload.empty() && f.reflection_digest.has_value() &&
             f.verdict == Verdict::None;
    case FrameTag::Tik2:
    case FrameTag::Tyk2:
      return f.payload.empty() && !f.reflection_digest &&
             f.verdict != Verdict::None;
    case FrameTag::Data:
      return !f.payload.empty();
    case FrameTag::Gossip:
      return true;
  }
  return false;
}

std::string AppStore::serialize_committed() const {
  std::string out;
  for (const auto& [txn, row] : rows) {
    if (!row.committed) continue;
    out += std::to_string(txn);
    out += '=';
    out += row.payload;
    out += ';';
  }
  return out;
}

std::string AppStore::serialize_full() const {
  std::string out;
  for (const auto& [txn, row] : rows) {
    out += std::to_string(txn);
    out += row.committed ? '!' : '?';
    out += row.payload;
    out += ';';
  }
  return out;
}

Endpoint::Endpoint(NodeId self, std::string name, std::set<NodeId> neighbors)
    : self_(self), name_(std::move(name)), neighbors_(std::move(neighbors)) {}

const Transaction* Endpoint::txn(uint64_t id) const {
  auto it = txns_.find(id);
  return it == txns_.end() ? nullptr : &it->second;
}

sim::TraceEvent Endpoint::note(uint64_t now, std::string kind,
                               const Transaction& t) const {
  sim::TraceEvent ev;
  ev.slot = now;
  ev.kind = std::move(kind);
  ev.txn = t.txn_id;
  ev.node = name_;
  ev.role = std::string(to_string(t.role));
  return ev;
}

void Endpoint::stage(Transaction& t, std::string payload) {
  t.checkpoint = store_.serialize_committed();
  t.payload = std::move(payload);
  t.digest = digest64(t.payload);
  store_.rows[t.txn_id] = AppStore::Row{t.payload, false};
}

void Endpoint::commit_row(Transaction& t) {
  store_.rows.at(t.txn_id).committed = true;
}

void Endpoint::rollback(Transaction& t) { store_.rows.erase(t.txn_id); }

Effect Endpoint::initiate(uint64_t txn_id, NodeId peer, std::string payload,
                          uint64_t now, uint64_t horizon) {
  if (!neighbors_.count(peer)) {
    throw std::invalid_argument("initiate: no link to peer");
  }
  if (payload.empty()) {
    throw std::invalid_argument("initiate: empty payload");
  }
  if (txns_.count(txn_id)) {
    throw std::invalid_argument("initiate: transaction id already used");
  }
  Transaction t;
  t.txn_id = txn_id;
  t.initiator = self_;
  t.responder = peer;
  t.role = Role::Initiator;
  t.phase = Phase::Tentative;
  t.start_slot = now;
  t.deadline = now + horizon;
  stage(t, std::move(payload));

  Frame tik;
  tik.src = self_;
  tik.dst = peer;
  tik.tag = FrameTag::Tik;
  tik.txn_id = txn_id;
  tik.payload = t.payload;
  t.last_emitted = tik;

  Effect eff;
  auto ph = note(now, "phase-change", t);
  ph.phase = std::string(to_string(Phase::Tentative));
  ph.digest = digest_hex(t.digest);
  ph.bits = t.payload.size() * 8;
  eff.events.push_back(std::move(ph));
  eff.send.push_back(tik);
  txns_[txn_id] = std::move(t);
  return eff;
}

Effect Endpoint::respond_terminal(Transaction& t, const Frame& f,
                                  uint64_t now) {
  (void)now;
  Effect eff;
  // Only frames that expect an answer get the terminal verdict re-emitted;
  // anything else would ping-pong between two terminal endpoints.
  if (f.tag == FrameTag::Tik || f.tag == FrameTag::Tyk ||
      f.tag == FrameTag::Tik2) {
    if (t.last_emitted) {
      Frame again = *t.last_emitted;
      again.retransmit_count = ++t.retries;
      eff.send.push_back(again);
    }
  }
  return eff;
}

Effect Endpoint::on_frame(const Frame& f, uint64_t now) {
  Effect eff;
  if (f.dst != self_) {
    throw std::invalid_argument("on_frame: frame not addressed to endpoint");
  }
  if (!frame_well_formed(f)) {
    sim::TraceEvent ev;
    ev.slot = now;
    ev.kind = "frame-dropped";
    ev.txn = f.txn_id;
    ev.node = name_;
    ev.note = "malformed";
    eff.events.push_back(std::move(ev));
    return eff;
  }

  auto it = txns_.find(f.txn_id);
  if (it == txns_.end()) {
    if (f.tag == FrameTag::Tik) {
      // responder's first sight of the transaction
      Transaction t;
      t.txn_id = f.txn_id;
      t.initiator = f.src;
      t.responder = self_;
      t.role = Role::Responder;
      t.phase = Phase::Reflecting;
      t.start_slot = now;
      t.deadline = now + default_horizon_;
      stage(t, f.payload);

      Frame tyk;
      tyk.src = self_;
      tyk.dst = f.src;
      tyk.tag = FrameTag::Tyk;
      tyk.txn_id = f.txn_id;
      tyk.reflection_digest = t.digest;
      t.last_emitted = tyk;

      auto ph = note(now, "phase-change", t);
      ph.phase = std::string(to_string(Phase::Reflecting));
      ph.digest = digest_hex(t.digest);
      ph.bits = t.payload.size() * 8;
      eff.events.push_back(std::move(ph));
      eff.send.push_back(tyk);
      txns_[f.txn_id] = std::move(t);
      return eff;
    }
    // stray control frame for a transaction this endpoint never started
    sim::TraceEvent ev;
    ev.slot = now;
    ev.kind = "frame-dropped";
    ev.txn = f.txn_id;
    ev.node = name_;
    ev.note = "unknown-transaction";
    eff.events.push_back(std::move(ev));
    return eff;
  }

  Transaction& t = it->second;
  if (is_terminal(t.phase)) {
    return respond_terminal(t, f, now);
  }

  switch (f.tag) {
    case FrameTag::Tik: {
      // duplicate of the opening frame: re-emit the reflection
      if (t.role == Role::Responder && t.last_emitted) {
        Frame again = *t.last_emitted;
        again.retransmit_count = ++t.retries;
        eff.send.push_back(again);
      }
      return eff;
    }
    case FrameTag::Tyk: {
      if (t.role != Role::Initiator) return eff;
      if (t.phase == Phase::Reflecting) {
        // duplicate reflection: re-emit the verdict
        if (t.last_emitted) {
          Frame again = *t.last_emitted;
          again.retransmit_count = ++t.retries;
          eff.send.push_back(again);
        }
        return eff;
      }
      // Tentative: verify the reflection against what was asserted
      bool match = f.reflection_digest && *f.reflection_digest == t.digest;
      Frame tik2;
      tik2.src = self_;
      tik2.dst = t.responder;
      tik2.tag = FrameTag::Tik2;
      tik2.txn_id = t.txn_id;
      tik2.verdict = match ? Verdict::Commit : Verdict::Abort;
      t.last_emitted = tik2;
      if (match) {
        t.reflection_verified = true;
        t.phase = Phase::Reflecting;
        auto ph = note(now, "phase-change", t);
        ph.phase = std::string(to_string(Phase::Reflecting));
        ph.digest = digest_hex(t.digest);
        eff.events.push_back(std::move(ph));
      } else {
        t.phase = Phase::Aborted;
        rollback(t);
        auto ab = note(now, "abort", t);
        ab.note = "reflection-mismatch";
        ab.digest = f.reflection_digest ? digest_hex(*f.reflection_digest)
                                        : std::string("absent");
        eff.events.push_back(std::move(ab));
      }
      eff.send.push_back(tik2);
      return eff;
    }
    case FrameTag::Tik2: {
      if (t.role != Role::Responder || t.phase != Phase::Reflecting) {
        return eff;
      }
      Frame tyk2;
      tyk2.src = self_;
      tyk2.dst = t.initiator;
      tyk2.tag = FrameTag::Tyk2;
      tyk2.txn_id = t.txn_id;
      tyk2.verdict = f.verdict;
      t.last_emitted = tyk2;
      if (f.verdict == Verdict::Commit) {
        t.commit_verdict_seen = true;
        t.phase = Phase::Agreed;
        commit_row(t);
        auto cm = note(now, "commit", t);
        cm.digest = digest_hex(t.digest);
        cm.bits = t.payload.size() * 8;
        eff.events.push_back(std::move(cm));
      } else {
        t.phase = Phase::Aborted;
        rollback(t);
        auto ab = note(now, "abort", t);
        ab.note = "verdict-abort";
        eff.events.push_back(std::move(ab));
      }
      eff.send.push_back(tyk2);
      return eff;
    }
    case FrameTag::Tyk2: {
      if (t.role != Role::Initiator || t.phase != Phase::Reflecting) {
        return eff;
      }
      if (f.verdict != Verdict::Commit) return eff;
      t.phase = Phase::Agreed;
      commit_row(t);
      auto cm = note(now, "commit", t);
      cm.digest = digest_hex(t.digest);
      cm.bits = t.payload.size() * 8;
      eff.events.push_back(std::move(cm));
      return eff;
    }
    case FrameTag::Data:
    case FrameTag::Gossip: {
      sim::TraceEvent ev;
      ev.slot = now;
      ev.kind = "frame-dropped";
      ev.txn = f.txn_id;
      ev.node = name_;
      ev.note = "wrong-protocol";
      eff.events.push_back(std::move(ev));
      return eff;
    }
  }
  return eff;
}

Effect Endpoint::on_horizon_expiry(uint64_t txn_id, uint64_t now) {
  auto it = txns_.find(txn_id);
  if (it == txns_.end()) {
    throw std::invalid_argument("on_horizon_expiry: unknown transaction");
  }
  Transaction& t = it->second;
  Effect eff;
  if (is_terminal(t.phase)) return eff;  // expiry on terminal phase: no-op
  t.phase = Phase::Aborted;
  rollback(t);
  auto ab = note(now, "abort", t);
  ab.note = "horizon-expired";
  eff.events.push_back(std::move(ab));
  return eff;
}

std::optional<Frame> Endpoint::retransmit(uint64_t txn_id) {
  auto it = txns_.find(txn_id);
  if (it == txns_.end()) return std::nullopt;
  Transaction& t = it->second;
  if (is_terminal(t.phase) || !t.last_emitted) return std::nullopt;
  Frame again = *t.last_emitted;
  again.retransmit_count = ++t.retries;
  return again;
}

}  // namespace leibniz::link
