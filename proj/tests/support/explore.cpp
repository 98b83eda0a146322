#include "support/explore.hpp"

#include <deque>
#include <map>
#include <optional>
#include <set>

#include "leibniz/digest.hpp"
#include "leibniz/link.hpp"

namespace leibniz::testsupport {

namespace {

using namespace leibniz::link;

constexpr uint64_t kTxn = 1;
constexpr uint64_t kHorizon = 1000;

struct WireFrame {
  Frame frame;
  bool can_dup = true;
  bool can_reorder = true;
};

struct World {
  Endpoint initiator{0, "i", {1}};
  Endpoint responder{1, "r", {0}};
  std::vector<WireFrame> to_responder;  // 0 -> 1, FIFO
  std::vector<WireFrame> to_initiator;  // 1 -> 0, FIFO
  bool corruption_left = false;
  uint8_t emitted_mask = 0;  // tags already sent as protocol messages
};

// The first emission of each of the four messages carries its own fault
// budget; idempotent re-emissions do not earn fresh duplication budget.
void push_sends(World& w, std::vector<Frame> frames) {
  for (Frame& f : frames) {
    uint8_t bit = static_cast<uint8_t>(1u << static_cast<int>(f.tag));
    WireFrame wf;
    wf.frame = std::move(f);
    wf.can_dup = (w.emitted_mask & bit) == 0;
    w.emitted_mask |= bit;
    auto& queue = wf.frame.dst == 1 ? w.to_responder : w.to_initiator;
    queue.push_back(std::move(wf));
  }
}

std::string phase_key(const Endpoint& ep) {
  const Transaction* t = ep.txn(kTxn);
  if (!t) return "-";
  std::string out;
  out += std::to_string(static_cast<int>(t->phase));
  out += t->reflection_verified ? 'v' : '.';
  out += t->commit_verdict_seen ? 'c' : '.';
  out += '[';
  out += ep.store().serialize_full();
  out += ']';
  out += leibniz::digest_hex(t->digest);
  return out;
}

std::string wire_key(const std::vector<WireFrame>& q) {
  std::string out;
  for (const WireFrame& wf : q) {
    out += to_string(wf.frame.tag);
    out += to_string(wf.frame.verdict);
    out += wf.frame.reflection_digest
               ? leibniz::digest_hex(*wf.frame.reflection_digest)
               : std::string("-");
    out += wf.frame.payload;
    out += wf.can_dup ? 'D' : '.';
    out += wf.can_reorder ? 'R' : '.';
    out += '|';
  }
  return out;
}

std::string canonical(const World& w) {
  std::string out = phase_key(w.initiator);
  out += '/';
  out += phase_key(w.responder);
  out += '/';
  out += wire_key(w.to_responder);
  out += '/';
  out += wire_key(w.to_initiator);
  out += w.corruption_left ? "C" : "-";
  out += static_cast<char>('0' + w.emitted_mask);
  return out;
}

Phase phase_of(const Endpoint& ep) {
  const Transaction* t = ep.txn(kTxn);
  return t ? t->phase : Phase::Idle;
}

void check_state(const World& w, ExploreResult& res) {
  const Transaction* ti = w.initiator.txn(kTxn);
  const Transaction* tr = w.responder.txn(kTxn);
  Phase pi = phase_of(w.initiator);
  Phase pr = phase_of(w.responder);

  if (pi == Phase::Agreed && pr == Phase::Agreed) {
    if (ti->digest != tr->digest) {
      res.violations.push_back("both agreed on unequal digests");
    }
    const auto& ri = w.initiator.store().rows;
    const auto& rr = w.responder.store().rows;
    if (!ri.count(kTxn) || !ri.at(kTxn).committed || !rr.count(kTxn) ||
        !rr.at(kTxn).committed || ri.at(kTxn).payload != rr.at(kTxn).payload) {
      res.violations.push_back("agreement without matching committed rows");
    }
  }
  if (pi == Phase::Agreed && !(ti->reflection_verified)) {
    res.violations.push_back("initiator agreed without verified reflection");
  }
  if (pr == Phase::Agreed && !(tr->commit_verdict_seen)) {
    res.violations.push_back("responder agreed without a commit verdict");
  }
  if (pi == Phase::Agreed && pr == Phase::Aborted) {
    res.violations.push_back(
        "initiator agreed while responder aborted");
  }
  // aborted endpoints must have rolled their row back
  if (pi == Phase::Aborted && w.initiator.store().rows.count(kTxn)) {
    res.violations.push_back("initiator aborted but kept its row");
  }
  if (pr == Phase::Aborted && w.responder.store().rows.count(kTxn)) {
    res.violations.push_back("responder aborted but kept its row");
  }

  bool quiescent = w.to_responder.empty() && w.to_initiator.empty();
  if (quiescent) {
    if (pi == Phase::Agreed && pr == Phase::Agreed) ++res.both_agreed;
    if (pi == Phase::Aborted && (pr == Phase::Aborted || !tr)) {
      ++res.both_aborted;
    }
    if (pi == Phase::Aborted && pr == Phase::Agreed) {
      ++res.initiator_aborted_responder_agreed;
    }
  }
}

}  // namespace

ExploreResult explore_exchange(bool with_corruption) {
  ExploreResult res;
  World init;
  init.corruption_left = with_corruption;
  Effect start = init.initiator.initiate(kTxn, 1, "x", 0, kHorizon);
  push_sends(init, std::move(start.send));

  std::set<std::string> visited;
  std::deque<World> frontier;
  visited.insert(canonical(init));
  frontier.push_back(std::move(init));

  while (!frontier.empty()) {
    World w = std::move(frontier.front());
    frontier.pop_front();
    ++res.states;
    check_state(w, res);
    if (!res.violations.empty()) return res;

    auto visit = [&](World next) {
      ++res.transitions;
      std::string key = canonical(next);
      if (visited.insert(key).second) frontier.push_back(std::move(next));
    };

    for (int dir = 0; dir < 2; ++dir) {
      auto queue_of = [dir](World& world) -> std::vector<WireFrame>& {
        return dir == 0 ? world.to_responder : world.to_initiator;
      };
      const auto& queue = dir == 0 ? w.to_responder : w.to_initiator;
      if (!queue.empty()) {
        // deliver the head frame
        {
          World next = w;
          auto& q = queue_of(next);
          WireFrame head = std::move(q.front());
          q.erase(q.begin());
          Endpoint& target = dir == 0 ? next.responder : next.initiator;
          Effect eff = target.on_frame(head.frame, 0);
          push_sends(next, std::move(eff.send));
          visit(std::move(next));
        }
        // lose the head frame
        {
          World next = w;
          auto& q = queue_of(next);
          q.erase(q.begin());
          visit(std::move(next));
        }
        // duplicate any frame with budget
        for (std::size_t i = 0; i < queue.size(); ++i) {
          if (!queue[i].can_dup) continue;
          World next = w;
          auto& q = queue_of(next);
          WireFrame copy = q[i];
          copy.can_dup = false;
          q[i].can_dup = false;
          q.insert(q.begin() + static_cast<long>(i) + 1, std::move(copy));
          visit(std::move(next));
        }
        // reorder: an overtaken frame spends its budget
        for (std::size_t i = 0; i + 1 < queue.size(); ++i) {
          if (!queue[i].can_reorder) continue;
          World next = w;
          auto& q = queue_of(next);
          q[i].can_reorder = false;
          std::swap(q[i], q[i + 1]);
          visit(std::move(next));
        }
        // corrupt any payload-bearing frame in flight
        for (std::size_t i = 0; i < queue.size(); ++i) {
          if (!w.corruption_left) break;
          if (queue[i].frame.tag != FrameTag::Tik) continue;
          World next = w;
          next.corruption_left = false;
          auto& q = queue_of(next);
          q[i].frame.payload[0] =
              static_cast<char>(q[i].frame.payload[0] ^ 0x01);
          visit(std::move(next));
        }
      }
    }
    // horizon expiry may fire at any point while an endpoint is live
    for (int side = 0; side < 2; ++side) {
      Endpoint& ep = side == 0 ? w.initiator : w.responder;
      const Transaction* t = ep.txn(kTxn);
      if (!t || is_terminal(t->phase)) continue;
      World next = w;
      Endpoint& target = side == 0 ? next.initiator : next.responder;
      Effect eff = target.on_horizon_expiry(kTxn, kHorizon);
      push_sends(next, std::move(eff.send));
      visit(std::move(next));
    }
  }
  return res;
}

}  // namespace leibniz::testsupport
