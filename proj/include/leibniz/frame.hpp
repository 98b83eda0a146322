#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "leibniz/causal.hpp"

namespace leibniz::link {

using causal::NodeId;

// Agreement-sublayer tags of the four-message exchange, plus the two frame
// kinds the FITO baselines put on the wire (those never enter the
// agreement sublayer).
enum class FrameTag : uint8_t { Tik, Tyk, Tik2, Tyk2, Data, Gossip };
enum class Verdict : uint8_t { None, Commit, Abort };

const char* to_string(FrameTag t);
const char* to_string(Verdict v);

// The wire unit. Every field belongs to exactly one sublayer of the link
// stack; the groups below follow that decomposition.
struct Frame {
  // L2.2 link: addressing and per-link sequence number
  NodeId src = 0;
  NodeId dst = 0;
  uint64_t seq = 0;
  // L2.4 transport: retry bookkeeping
  uint32_t retransmit_count = 0;
  // L2.5 reflection: digest of what the receiver actually received
  std::optional<uint64_t> reflection_digest;
  // L2.6 agreement: exchange step and commit/abort verdict
  FrameTag tag = FrameTag::Data;
  Verdict verdict = Verdict::None;
  // L2.8 transaction: atomicity boundary
  uint64_t txn_id = 0;
  // L2.9 application: payload bytes (empty on control frames)
  std::string payload;
};

// Sublayer invariants: TIK carries payload and no digest, TYK carries the
// digest and no payload, TIK2/TYK2 carry a verdict and neither.
bool frame_well_formed(const Frame& f);

}  // namespace leibniz::link
