#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "leibniz/causal.hpp"

namespace leibniz::sim {

using causal::NodeId;
using Edge = std::pair<NodeId, NodeId>;  // canonical: first < second

inline Edge make_edge(NodeId a, NodeId b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

struct Topology {
  enum class Kind { Triangle, Complete, OctavalentGrid };

  Kind kind = Kind::Triangle;
  uint32_t width = 0;   // grid only
  uint32_t height = 0;  // grid only
  bool wrap = true;     // grid boundary policy: torus by default
  std::vector<std::string> names;  // index = NodeId
  std::set<Edge> edges;

  std::size_t node_count() const { return names.size(); }
  bool adjacent(NodeId a, NodeId b) const { return edges.count(make_edge(a, b)) > 0; }
  std::vector<NodeId> neighbors(NodeId n) const;
  std::optional<NodeId> id_of(const std::string& name) const;
  std::string edge_name(Edge e) const;
  std::optional<Edge> edge_by_name(const std::string& name) const;

  static Topology triangle();
  static Topology complete(uint32_t n);           // n >= 3
  static Topology grid(uint32_t w, uint32_t h, bool wrap = true);  // w,h >= 2

  // Grid coordinates; nodes are named c<x>_<y>, row-major ids.
  NodeId grid_id(uint32_t x, uint32_t y) const;
};

// Shortest live path from src to dst, ties broken toward the lowest node
// id at every hop. Returns the direct edge when live, a two-hop triangle
// detour when not, longer paths when those are also down, and nullopt when
// nothing is left. The path includes both terminals.
std::optional<std::vector<NodeId>> relay_route(const Topology& topo,
                                               const std::set<Edge>& live,
                                               NodeId src, NodeId dst);

// Compass ports of an octavalent cell, clockwise from north.
enum class Port : uint8_t { N, NE, E, SE, S, SW, W, NW };
constexpr int kPortCount = 8;
const char* to_string(Port p);

// Offset of a port in (dx, dy), y growing south.
std::pair<int, int> port_offset(Port p);

// The cell one hop away through `p` on a toroidal grid.
NodeId grid_port_neighbor(const Topology& grid, NodeId node, Port p);

struct PortDag {
  // preference[p] = relay ports for port p, best first: the direct port
  // while it is live, then the adjacent diagonal ports whose far cell
  // shares a triangle with the direct neighbor.
  std::array<std::vector<Port>, kPortCount> preference;
  // every involved link oriented by global (node id, port index) priority;
  // the union of these over all cells stays acyclic
  std::vector<std::pair<NodeId, NodeId>> oriented_edges;
};

// Local healing structure for one cell. Inputs are strictly one-hop
// knowledge: this cell's own port liveness and the liveness each direct
// neighbor advertises for its own ports.
PortDag heal_port_dag(const Topology& grid, NodeId node,
                      const std::array<bool, kPortCount>& own_live,
                      const std::map<NodeId, std::array<bool, kPortCount>>&
                          neighbor_advertised);

}  // namespace leibniz::sim
