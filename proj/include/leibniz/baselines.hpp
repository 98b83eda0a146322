#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "leibniz/scenario.hpp"
#include "leibniz/trace.hpp"

namespace leibniz::baselines {

using sim::NodeId;

// Fire-and-forget: the sender marks the transaction complete at emission
// time and never revisits it. complete-at-send is never revoked.
struct FireForgetState {
  std::set<uint64_t> claimed;  // sender: complete-at-send
  std::set<uint64_t> applied;  // receivers: actually delivered and applied
  std::map<uint64_t, uint64_t> payload_bits;  // per txn
};

// One replicated LWW entry plus the bookkeeping the auditor needs: each
// write carries the set of writes it causally dominates (what its replica
// had incorporated for that key when the write happened).
struct LwwEntry {
  std::string value;
  uint64_t ts = 0;       // writer-local slot + skew
  NodeId writer = 0;
  uint64_t write_id = 0;
  std::set<uint64_t> past;  // write ids causally dominated by this write
};

inline bool lww_wins(const LwwEntry& challenger, const LwwEntry& incumbent) {
  if (challenger.ts != incumbent.ts) return challenger.ts > incumbent.ts;
  return challenger.writer > incumbent.writer;
}

struct LwwReplica {
  std::map<std::string, LwwEntry> store;
  // every write id this replica has incorporated, per key
  std::map<std::string, std::set<uint64_t>> seen;
};

struct LwwState {
  std::map<NodeId, LwwReplica> replicas;
  std::vector<LwwEntry> all_writes;  // global ground truth, in write order
  std::map<uint64_t, std::string> write_key;
};

// Serialization of a replica store carried by one gossip frame.
std::string serialize_store(const LwwReplica& r);
std::vector<std::pair<std::string, LwwEntry>> parse_store(
    const std::string& payload);

// Applies one incoming entry (local write or gossiped) to a replica.
// Returns the discarded entry's write id when the merge threw away a
// value, or 0 when nothing was discarded.
uint64_t lww_merge(LwwReplica& r, const std::string& key, LwwEntry incoming);

// Counts silent semantic corruption from a finished trace.
//   fireforget: transactions claimed complete at send and never applied.
//   lww: writes discarded by a survivor that does not causally dominate
//        them (true concurrency loss), counted once per losing write.
//   oae: commit events lacking the protocol evidence that must precede
//        them; zero by construction, asserted rather than assumed.
uint64_t corruption_audit(const sim::RunTrace& trace, sim::Protocol protocol);

}  // namespace leibniz::baselines
