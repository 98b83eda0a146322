#include "leibniz/topology.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace leibniz::sim {

std::vector<NodeId> Topology::neighbors(NodeId n) const {
  std::vector<NodeId> out;
  for (const Edge& e : edges) {
    if (e.first == n) out.push_back(e.second);
    if (e.second == n) out.push_back(e.first);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<NodeId> Topology::id_of(const std::string& name) const {
  for (NodeId i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

std::string Topology::edge_name(Edge e) const {
  return names.at(e.first) + "-" + names.at(e.second);
}

std::optional<Edge> Topology::edge_by_name(const std::string& name) const {
  auto dash = name.find('-');
  if (dash == std::string::npos) return std::nullopt;
  auto a = id_of(name.substr(0, dash));
  auto b = id_of(name.substr(dash + 1));
  if (!a || !b) return std::nullopt;
  Edge e = make_edge(*a, *b);
  if (!edges.count(e)) return std::nullopt;
  return e;
}

Topology Topology::triangle() {
  Topology t;
  t.kind = Kind::Triangle;
  t.names = {"a", "b", "c"};
  t.edges = {{0, 1}, {0, 2}, {1, 2}};
  return t;
}

Topology Topology::complete(uint32_t n) {
  if (n < 3) throw std::invalid_argument("complete: need at least 3 nodes");
  Topology t;
  t.kind = Kind::Complete;
  for (uint32_t i = 0; i < n; ++i) t.names.push_back("n" + std::to_string(i));
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) t.edges.insert({a, b});
  }
  return t;
}

NodeId Topology::grid_id(uint32_t x, uint32_t y) const {
  return y * width + x;
}

Topology Topology::grid(uint32_t w, uint32_t h, bool wrap) {
  if (w < 2 || h < 2) {
    throw std::invalid_argument("grid: width and height must be at least 2");
  }
  Topology t;
  t.kind = Kind::OctavalentGrid;
  t.width = w;
  t.height = h;
  t.wrap = wrap;
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      t.names.push_back("c" + std::to_string(x) + "_" + std::to_string(y));
    }
  }
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      for (int p = 0; p < kPortCount; ++p) {
        auto [dx, dy] = port_offset(static_cast<Port>(p));
        int64_t nx = static_cast<int64_t>(x) + dx;
        int64_t ny = static_cast<int64_t>(y) + dy;
        if (wrap) {
          nx = (nx + w) % w;
          ny = (ny + h) % h;
        } else if (nx < 0 || ny < 0 || nx >= static_cast<int64_t>(w) ||
                   ny >= static_cast<int64_t>(h)) {
          continue;
        }
        NodeId self = t.grid_id(x, y);
        NodeId other = t.grid_id(static_cast<uint32_t>(nx),
                                 static_cast<uint32_t>(ny));
        if (self != other) t.edges.insert(make_edge(self, other));
      }
    }
  }
  return t;
}

std::optional<std::vector<NodeId>> relay_route(const Topology& topo,
                                               const std::set<Edge>& live,
                                               NodeId src, NodeId dst) {
  if (src == dst) throw std::invalid_argument("relay_route: src == dst");
  if (live.count(make_edge(src, dst))) {
    return std::vector<NodeId>{src, dst};
  }
  // BFS distances from dst, then walk forward choosing the lowest node id
  // among neighbors one step closer. Yields the lexicographically least
  // shortest path, including the two-hop triangle detour when one exists.
  std::map<NodeId, uint32_t> dist;
  std::deque<NodeId> queue{dst};
  dist[dst] = 0;
  while (!queue.empty()) {
    NodeId cur = queue.front();
    queue.pop_front();
    for (NodeId next : topo.neighbors(cur)) {
      if (!live.count(make_edge(cur, next))) continue;
      if (dist.count(next)) continue;
      dist[next] = dist[cur] + 1;
      queue.push_back(next);
    }
  }
  if (!dist.count(src)) return std::nullopt;
  std::vector<NodeId> path{src};
  NodeId cur = src;
  while (cur != dst) {
    for (NodeId next : topo.neighbors(cur)) {  // ascending id
      if (!live.count(make_edge(cur, next))) continue;
      auto it = dist.find(next);
      if (it != dist.end() && it->second + 1 == dist.at(cur)) {
        path.push_back(next);
        cur = next;
        break;
      }
    }
  }
  return path;
}

const char* to_string(Port p) {
  switch (p) {
    case Port::N: return "N";
    case Port::NE: return "NE";
    case Port::E: return "E";
    case Port::SE: return "SE";
    case Port::S: return "S";
    case Port::SW: return "SW";
    case Port::W: return "W";
    case Port::NW: return "NW";
  }
  return "?";
}

std::pair<int, int> port_offset(Port p) {
  switch (p) {
    case Port::N: return {0, -1};
    case Port::NE: return {1, -1};
    case Port::E: return {1, 0};
    case Port::SE: return {1, 1};
    case Port::S: return {0, 1};
    case Port::SW: return {-1, 1};
    case Port::W: return {-1, 0};
    case Port::NW: return {-1, -1};
  }
  return {0, 0};
}

NodeId grid_port_neighbor(const Topology& grid, NodeId node, Port p) {
  uint32_t x = node % grid.width;
  uint32_t y = node / grid.width;
  auto [dx, dy] = port_offset(p);
  int64_t nx = (static_cast<int64_t>(x) + dx + grid.width) % grid.width;
  int64_t ny = (static_cast<int64_t>(y) + dy + grid.height) % grid.height;
  return grid.grid_id(static_cast<uint32_t>(nx), static_cast<uint32_t>(ny));
}

namespace {

// The port on `from` that points at `to`, if they are compass neighbors.
std::optional<Port> port_toward(const Topology& grid, NodeId from, NodeId to) {
  for (int p = 0; p < kPortCount; ++p) {
    if (grid_port_neighbor(grid, from, static_cast<Port>(p)) == to) {
      return static_cast<Port>(p);
    }
  }
  return std::nullopt;
}

}  // namespace

PortDag heal_port_dag(
    const Topology& grid, NodeId node,
    const std::array<bool, kPortCount>& own_live,
    const std::map<NodeId, std::array<bool, kPortCount>>& neighbor_advertised) {
  if (grid.kind != Topology::Kind::OctavalentGrid || !grid.wrap) {
    throw std::invalid_argument("heal_port_dag: needs a toroidal grid");
  }
  PortDag dag;
  std::set<std::pair<NodeId, NodeId>> oriented;
  for (int p = 0; p < kPortCount; ++p) {
    Port port = static_cast<Port>(p);
    NodeId direct = grid_port_neighbor(grid, node, port);
    auto consider = [&](Port candidate) {
      if (!own_live[static_cast<int>(candidate)]) return;
      NodeId via = grid_port_neighbor(grid, node, candidate);
      if (candidate != port) {
        // the detour only helps if the far cell still reaches the direct
        // neighbor, which is one-hop knowledge: `via` advertises the
        // liveness of its own port toward `direct`
        auto adv = neighbor_advertised.find(via);
        if (adv == neighbor_advertised.end()) return;
        auto far_port = port_toward(grid, via, direct);
        if (!far_port || !adv->second[static_cast<int>(*far_port)]) return;
      }
      dag.preference[p].push_back(candidate);
      NodeId lo = std::min(node, via);
      NodeId hi = std::max(node, via);
      oriented.insert({lo, hi});
    };
    consider(port);  // direct first while live
    // then the two triangle-sharing diagonals, ascending port index
    Port diag_a = static_cast<Port>((p + kPortCount - 1) % kPortCount);
    Port diag_b = static_cast<Port>((p + 1) % kPortCount);
    if (static_cast<int>(diag_a) > static_cast<int>(diag_b)) {
      std::swap(diag_a, diag_b);
    }
    consider(diag_a);
    consider(diag_b);
  }
  dag.oriented_edges.assign(oriented.begin(), oriented.end());
  return dag;
}

}  // namespace leibniz::sim
