#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Exhaustive exploration of one four-message exchange between two
// endpoints under an adversarial scheduler: per message up to one loss,
// one duplication and one adjacent reorder, plus (optionally) one payload
// corruption in flight and horizon expiry firing at any moment. Used by
// the protocol unit tests and the acceptance suite.
namespace leibniz::testsupport {

struct ExploreResult {
  uint64_t states = 0;
  uint64_t transitions = 0;
  // terminal-outcome coverage, for non-vacuity
  uint64_t both_agreed = 0;
  uint64_t both_aborted = 0;
  uint64_t initiator_aborted_responder_agreed = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ExploreResult explore_exchange(bool with_corruption);

}  // namespace leibniz::testsupport
