#include "leibniz/kbp.hpp"

#include <bit>
#include <stdexcept>

namespace leibniz::kbp {

namespace {

constexpr uint32_t kSingleSpace = 4;    // 2 ontic bits
constexpr uint32_t kPairSpace = 16;     // 4 ontic bits, value = (o1 << 2) | o2

// Classification of a 4-element support over the 16-value pair space.
enum class PairClass { Invalid, Product, Entangled };

PairClass classify_pair_support(uint32_t mask) {
  uint32_t marg1 = 0, marg2 = 0;
  int per_o1[4] = {0, 0, 0, 0};
  for (uint32_t v = 0; v < kPairSpace; ++v) {
    if (!(mask & (1u << v))) continue;
    uint32_t o1 = v >> 2, o2 = v & 3;
    marg1 |= 1u << o1;
    marg2 |= 1u << o2;
    ++per_o1[o1];
  }
  int m1 = std::popcount(marg1);
  int m2 = std::popcount(marg2);
  if (m1 == 2 && m2 == 2) {
    // product iff the support is exactly the rectangle of its marginals
    uint32_t rect = 0;
    for (uint32_t o1 = 0; o1 < 4; ++o1) {
      if (!(marg1 & (1u << o1))) continue;
      for (uint32_t o2 = 0; o2 < 4; ++o2) {
        if (marg2 & (1u << o2)) rect |= 1u << ((o1 << 2) | o2);
      }
    }
    return rect == mask ? PairClass::Product : PairClass::Invalid;
  }
  if (m1 == 4 && m2 == 4) {
    // entangled iff the support is the graph of a bijection
    for (int c : per_o1) {
      if (c != 1) return PairClass::Invalid;
    }
    return PairClass::Entangled;
  }
  return PairClass::Invalid;
}

}  // namespace

EpistemicState::EpistemicState(std::set<uint16_t> support, uint16_t space_size)
    : support_(std::move(support)), space_size_(space_size) {
  for (uint16_t v : support_) {
    if (v >= space_size_) {
      throw std::invalid_argument("EpistemicState: value outside ontic space");
    }
  }
}

StateCounts enumerate_maximal_states(int n_systems) {
  if (n_systems != 1 && n_systems != 2) {
    throw std::invalid_argument("enumerate_maximal_states: n_systems must be 1 or 2");
  }
  StateCounts counts;
  // One elementary system: every 2-element support of the 4 ontic values is
  // a consistent maximal state.
  for (uint32_t mask = 0; mask < (1u << kSingleSpace); ++mask) {
    if (std::popcount(mask) == 2) ++counts.single;
  }
  if (n_systems == 1) return counts;
  // Two systems: scan every 4-element support of the 16 pair values.
  for (uint32_t mask = 0; mask < (1u << kPairSpace); ++mask) {
    if (std::popcount(mask) != 4) continue;
    switch (classify_pair_support(mask)) {
      case PairClass::Product: ++counts.product; break;
      case PairClass::Entangled: ++counts.entangled; break;
      case PairClass::Invalid: break;
    }
  }
  return counts;
}

bool is_kbp_valid(const EpistemicState& state, int n_systems) {
  if (n_systems != 1 && n_systems != 2) {
    throw std::invalid_argument("is_kbp_valid: n_systems must be 1 or 2");
  }
  if (state.support().empty()) {
    throw std::invalid_argument("is_kbp_valid: empty support is contradictory");
  }
  return state.support().size() >= (1u << n_systems);
}

bool is_kbp_maximal(const EpistemicState& state, int n_systems) {
  return is_kbp_valid(state, n_systems) &&
         state.support().size() == (1u << n_systems);
}

EpistemicState apply_rewrite(const EpistemicState& state,
                             const std::vector<uint16_t>& perm) {
  if (perm.size() != state.space_size()) {
    throw std::invalid_argument("apply_rewrite: permutation size mismatch");
  }
  std::set<uint16_t> image_check(perm.begin(), perm.end());
  if (image_check.size() != perm.size() ||
      *image_check.rbegin() != perm.size() - 1) {
    throw std::invalid_argument("apply_rewrite: map is not a bijection");
  }
  std::set<uint16_t> mapped;
  for (uint16_t v : state.support()) mapped.insert(perm[v]);
  return EpistemicState(std::move(mapped), state.space_size());
}

EndpointRegister project_endpoint_view(OnticState link_state, LinkEndpoint ep) {
  if (link_state.value >= kPairSpace) {
    throw std::invalid_argument("project_endpoint_view: not a 4-bit link state");
  }
  std::set<uint16_t> support;
  if (ep == LinkEndpoint::A) {
    uint16_t own = static_cast<uint16_t>(link_state.value & 0b1100);
    for (uint16_t other = 0; other < 4; ++other) {
      support.insert(static_cast<uint16_t>(own | other));
    }
  } else {
    uint16_t own = static_cast<uint16_t>(link_state.value & 0b0011);
    for (uint16_t other = 0; other < 4; ++other) {
      support.insert(static_cast<uint16_t>(own | (other << 2)));
    }
  }
  return EndpointRegister{EpistemicState(std::move(support), kPairSpace), ep};
}

}  // namespace leibniz::kbp
