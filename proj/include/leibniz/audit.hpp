#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "leibniz/frame.hpp"
#include "leibniz/topology.hpp"
#include "leibniz/trace.hpp"

namespace leibniz::audit {

using sim::Edge;
using sim::RunTrace;

// Information potential model. Uniform surprisal is the only mode that
// needs no declared source distribution: a payload of n bits carries n
// bits of potential. Log-likelihood-ratio potentials are a declared
// extension point, not implemented.
enum class PotentialModel : uint8_t { SurprisalUniform };

// Potential carried by one frame: payload length in bits. Control frames
// carry zero.
uint64_t frame_potential(const link::Frame& f,
                         PotentialModel model = PotentialModel::SurprisalUniform);

// Per-node, per-slot information flux extracted from a trace. Application
// sources and sinks are explicit virtual edges so the node law holds
// unconditionally: bits enter the graph only at their origin node and
// leave only at their final destination.
class FluxLedger {
 public:
  explicit FluxLedger(const RunTrace& trace);

  // (inflow + virtual source) - (outflow + virtual sink); 0 everywhere in
  // a consistent trace, loss shows up on edges instead.
  int64_t node_residual(const std::string& node, uint64_t slot) const;

  // bits that entered the edge and never left it
  uint64_t edge_flux_deficit(const std::string& edge) const;

  const std::vector<std::string>& nodes() const { return nodes_; }
  uint64_t duration() const { return duration_; }

 private:
  struct PerSlot {
    uint64_t in = 0;
    uint64_t out = 0;
    uint64_t source = 0;
    uint64_t sink = 0;
  };
  std::vector<std::string> nodes_;
  uint64_t duration_ = 0;
  std::map<std::string, std::map<uint64_t, PerSlot>> flux_;
  std::map<std::string, uint64_t> edge_entered_;
  std::map<std::string, uint64_t> edge_exited_;
};

// Summary of one transaction recovered from a trace.
struct TxnAudit {
  uint64_t txn = 0;
  std::string initiator;
  std::string responder;
  std::string edge;        // logical link, canonical name
  uint64_t payload_bits = 0;
  uint64_t asserted_slot = 0;
  bool reflection_confirmed = false;  // initiator verified a matching TYK
  bool initiator_terminal = false;
  bool committed = false;  // both sides agreed
};

std::map<uint64_t, TxnAudit> collect_transactions(const RunTrace& trace);

// Deficit of one exchange: 0 when the reflection recovered the assertion,
// 1 when the asserted payload was never confirmed. Errors on a
// transaction that never reached a terminal phase.
double exchange_deficit(const TxnAudit& txn);
double exchange_deficit(const RunTrace& trace, uint64_t txn_id);

// Payload-weighted deficit over the whole run, in bits.
uint64_t entropy_produced(const RunTrace& trace);

// Net potential bias accumulated around a closed cycle of links within
// [window_start, window_end): per edge, bits asserted forward minus bits
// confirmed by reflection. Zero for fully committed balanced operation.
// The cycle must be closed; edges are canonical "lo-hi" names.
int64_t loop_residual(const RunTrace& trace,
                      const std::vector<std::string>& cycle,
                      uint64_t window_start, uint64_t window_end);

struct PifThroughput {
  uint64_t one_way_bits = 0;        // confirmed forward payload bits
  uint64_t bilateral_bits = 0;      // payload + equal-measure confirmation
  double one_way_bits_per_slot = 0.0;
  double bilateral_bits_per_slot = 0.0;
  bool symmetric = true;  // both directions asserted at equal volume
};

// Confirmed-throughput accounting for one link. The echo of a committed
// n-bit assertion confirms n bits, counted measure-for-measure; the 2x
// relation between the two fields is an accounting identity on the
// confirmed subset, and this function computes the two sides from
// independent trace events so the identity is a real consistency check.
PifThroughput pif_throughput(const RunTrace& trace, const std::string& edge);

struct ConservationReport {
  std::vector<std::string> violations;
  uint64_t node_slot_checks = 0;
  uint64_t entropy_recomputed = 0;
  bool lossless_claims_checked = false;
  bool ok() const { return violations.empty(); }
};

// Full post-hoc audit of a trace: node law everywhere, loop law on every
// triangle (zero-residual claims apply to lossless runs), deficit/entropy
// reconciliation against the run footer.
ConservationReport check_conservation(const RunTrace& trace);

}  // namespace leibniz::audit
