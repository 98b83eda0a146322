#pragma once

#include <cstdint>
#include <set>
#include <vector>

namespace leibniz::kbp {

// The imagined full state of a link: 2 bits per direction. Only the
// omniscient auditor ever holds one of these; no endpoint-facing operation
// takes an OnticState except project_endpoint_view, which is the auditor's
// materialization of what an endpoint is allowed to know.
struct OnticState {
  uint16_t value = 0;  // in [0, 2^(2n)) for n elementary systems
};

// An epistemic state is the set of ontic values an agent considers
// possible. The knowledge balance principle caps what any agent may pin
// down: for n elementary systems (2n ontic bits) the support may not
// shrink below 2^n values.
class EpistemicState {
 public:
  EpistemicState(std::set<uint16_t> support, uint16_t space_size);

  const std::set<uint16_t>& support() const { return support_; }
  uint16_t space_size() const { return space_size_; }

  bool operator==(const EpistemicState&) const = default;

 private:
  std::set<uint16_t> support_;
  uint16_t space_size_;
};

struct StateCounts {
  uint64_t single = 0;     // maximal states of one elementary system
  uint64_t product = 0;    // separable two-system states
  uint64_t entangled = 0;  // maximally correlated two-system states
};

// Enumerates the valid maximal-knowledge states by scanning every support
// of the ontic space. n_systems must be 1 or 2.
StateCounts enumerate_maximal_states(int n_systems);

// True iff the state claims no more than half the ontic bits. Empty
// support is contradictory knowledge and an error.
bool is_kbp_valid(const EpistemicState& state, int n_systems);
// True iff the state knows exactly half the bits.
bool is_kbp_maximal(const EpistemicState& state, int n_systems);

// Maps the support elementwise through a permutation of the ontic space.
// Reversible by construction, so knowledge balance is preserved.
EpistemicState apply_rewrite(const EpistemicState& state,
                             const std::vector<uint16_t>& perm);

enum class LinkEndpoint : uint8_t { A, B };

// What one endpoint may know about a single link: its own direction's two
// bits pinned, the peer direction fully unknown.
struct EndpointRegister {
  EpistemicState epi;
  LinkEndpoint direction;
};

// Layout of the 4-bit link ontic value: A's TX direction in the high two
// bits, B's TX direction in the low two.
EndpointRegister project_endpoint_view(OnticState link_state, LinkEndpoint ep);

}  // namespace leibniz::kbp
