#include "leibniz/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "leibniz/digest.hpp"

namespace leibniz::sim {

using nlohmann::json;

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::Oae: return "oae";
    case Protocol::FireForget: return "fireforget";
    case Protocol::Lww: return "lww";
  }
  return "?";
}

std::optional<Protocol> protocol_from_string(const std::string& s) {
  if (s == "oae") return Protocol::Oae;
  if (s == "fireforget") return Protocol::FireForget;
  if (s == "lww") return Protocol::Lww;
  return std::nullopt;
}

uint64_t Scenario::digest() const {
  std::string canon = name;
  canon += '|';
  canon += to_string(protocol);
  canon += '|';
  for (const auto& n : topology.names) canon += n + ",";
  for (const auto& e : topology.edges) canon += topology.edge_name(e) + ",";
  canon += '|';
  canon += std::to_string(link.delay) + "," +
           std::to_string(static_cast<uint64_t>(link.loss_prob * 1e6));
  for (const auto& p : link.partitions) {
    canon += ";" + topology.edge_name(p.edge) + ":" + std::to_string(p.start) +
             "-" + (p.end ? std::to_string(*p.end) : "inf");
  }
  canon += '|';
  canon += std::to_string(seed) + "," + std::to_string(duration) + "," +
           std::to_string(horizon) + "," + (relay ? "r" : "-") +
           (retransmit ? "t" : "-");
  for (const auto& f : flows) {
    canon += ";" + std::to_string(f.from) + ">" + std::to_string(f.to) + "x" +
             std::to_string(f.count) + "@" + std::to_string(f.period) + "+" +
             std::to_string(f.start) + "#" + std::to_string(f.payload_bytes);
  }
  canon += '|';
  canon += std::to_string(lww.gossip_period);
  for (const auto& [n, s] : lww.skew) {
    canon += ";" + std::to_string(n) + ":" + std::to_string(s);
  }
  for (const auto& w : lww.writes) {
    canon += ";" + std::to_string(w.node) + "/" + w.key + "=" + w.value + "@" +
             std::to_string(w.slot);
  }
  return digest64(canon);
}

namespace {

struct Validator {
  std::vector<ValidationError>& errors;

  void fail(const std::string& field, const std::string& message) {
    errors.push_back({field, message});
  }

  template <typename T>
  std::optional<T> want(const json& j, const std::string& path,
                        const char* key, bool required,
                        std::optional<T> fallback = std::nullopt) {
    std::string full = path.empty() ? key : path + "." + key;
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(full, "missing required key");
      return fallback;
    }
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      fail(full, "wrong type");
      return std::nullopt;
    }
  }
};

std::optional<Topology> parse_topology(const json& j, Validator& v) {
  auto kind = v.want<std::string>(j, "topology", "kind", true);
  if (!kind) return std::nullopt;
  try {
    if (*kind == "triangle") return Topology::triangle();
    if (*kind == "complete") {
      auto n = v.want<uint32_t>(j, "topology", "n", true);
      if (!n) return std::nullopt;
      return Topology::complete(*n);
    }
    if (*kind == "grid") {
      auto w = v.want<uint32_t>(j, "topology", "w", true);
      auto h = v.want<uint32_t>(j, "topology", "h", true);
      auto wrap = v.want<bool>(j, "topology", "wrap", false, true);
      if (!w || !h) return std::nullopt;
      return Topology::grid(*w, *h, wrap.value_or(true));
    }
  } catch (const std::invalid_argument& e) {
    v.fail("topology", e.what());
    return std::nullopt;
  }
  v.fail("topology.kind", "unknown kind (triangle | complete | grid)");
  return std::nullopt;
}

std::optional<NodeId> node_ref(const json& j, const char* key,
                               const std::string& path, const Topology& topo,
                               Validator& v) {
  auto name = v.want<std::string>(j, path, key, true);
  if (!name) return std::nullopt;
  auto id = topo.id_of(*name);
  if (!id) {
    v.fail(path + "." + key, "unknown node '" + *name + "'");
    return std::nullopt;
  }
  return id;
}

}  // namespace

ParseResult parse_scenario(const std::string& json_text) {
  ParseResult result;
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    result.errors.push_back({"", "document is not a JSON object"});
    return result;
  }
  Validator v{result.errors};
  Scenario s;

  if (auto name = v.want<std::string>(j, "", "name", false)) s.name = *name;

  if (!j.contains("topology") || !j["topology"].is_object()) {
    v.fail("topology", "missing required object");
  } else if (auto topo = parse_topology(j["topology"], v)) {
    s.topology = *topo;
  }
  if (!result.errors.empty() && s.topology.names.empty()) return result;

  auto proto = v.want<std::string>(j, "", "protocol", true);
  if (proto) {
    auto p = protocol_from_string(*proto);
    if (!p) {
      v.fail("protocol", "unknown protocol (oae | fireforget | lww)");
    } else {
      s.protocol = *p;
    }
  }

  if (auto seed = v.want<uint64_t>(j, "", "seed", false)) s.seed = *seed;
  if (auto dur = v.want<uint64_t>(j, "", "duration", true)) s.duration = *dur;
  if (s.duration == 0) v.fail("duration", "must be positive");

  if (j.contains("link")) {
    const json& lj = j["link"];
    if (!lj.is_object()) {
      v.fail("link", "must be an object");
    } else {
      if (auto d = v.want<uint64_t>(lj, "link", "delay", false)) {
        s.link.delay = *d;
      }
      if (s.link.delay < 1) v.fail("link.delay", "must be at least 1 slot");
      if (auto p = v.want<double>(lj, "link", "loss_prob", false)) {
        s.link.loss_prob = *p;
      }
      if (s.link.loss_prob < 0.0 || s.link.loss_prob > 1.0) {
        v.fail("link.loss_prob", "must be within [0, 1]");
      }
      if (lj.contains("partitions")) {
        if (!lj["partitions"].is_array()) {
          v.fail("link.partitions", "must be an array");
        } else {
          std::size_t i = 0;
          for (const json& pj : lj["partitions"]) {
            std::string path = "link.partitions[" + std::to_string(i) + "]";
            PartitionWindow w;
            bool ok = true;
            if (!pj.contains("edge") || !pj["edge"].is_array() ||
                pj["edge"].size() != 2) {
              v.fail(path + ".edge", "must be a [node, node] pair");
              ok = false;
            } else {
              auto a = s.topology.id_of(pj["edge"][0].get<std::string>());
              auto b = s.topology.id_of(pj["edge"][1].get<std::string>());
              if (!a || !b || !s.topology.adjacent(*a, *b)) {
                v.fail(path + ".edge", "not an edge of the topology");
                ok = false;
              } else {
                w.edge = make_edge(*a, *b);
              }
            }
            if (auto st = v.want<uint64_t>(pj, path, "start", true)) {
              w.start = *st;
            }
            if (pj.contains("end") && !pj["end"].is_null()) {
              auto en = v.want<uint64_t>(pj, path, "end", false);
              if (en) {
                w.end = *en;
                if (*en < w.start) v.fail(path + ".end", "ends before start");
              }
            }
            if (ok) s.link.partitions.push_back(w);
            ++i;
          }
        }
      }
    }
  }

  if (auto relay = v.want<bool>(j, "", "relay", false)) s.relay = *relay;
  if (auto ret = v.want<bool>(j, "", "retransmit", false)) {
    s.retransmit = *ret;
  }

  bool needs_horizon = !j.contains("protocol") || !proto ||
                       s.protocol == Protocol::Oae;
  if (j.contains("horizon")) {
    if (auto hz = v.want<uint64_t>(j, "", "horizon", false)) s.horizon = *hz;
    if (s.horizon == 0) v.fail("horizon", "must be positive");
  } else if (needs_horizon) {
    v.fail("horizon", "missing required key");
  }

  uint64_t last_initiation = 0;
  if (s.protocol != Protocol::Lww) {
    if (!j.contains("flows") || !j["flows"].is_array() || j["flows"].empty()) {
      v.fail("flows", "at least one flow is required");
    } else {
      std::size_t i = 0;
      for (const json& fj : j["flows"]) {
        std::string path = "flows[" + std::to_string(i) + "]";
        Flow f;
        bool ok = true;
        auto from = node_ref(fj, "from", path, s.topology, v);
        auto to = node_ref(fj, "to", path, s.topology, v);
        if (!from || !to) {
          ok = false;
        } else {
          f.from = *from;
          f.to = *to;
          if (*from == *to) {
            v.fail(path, "from and to must differ");
            ok = false;
          } else if (!s.topology.adjacent(*from, *to)) {
            v.fail(path, "flow endpoints must share a link");
            ok = false;
          }
        }
        if (auto c = v.want<uint64_t>(fj, path, "count", true)) f.count = *c;
        if (auto b = v.want<uint64_t>(fj, path, "payload_bytes", false)) {
          f.payload_bytes = *b;
        }
        if (f.payload_bytes == 0) {
          v.fail(path + ".payload_bytes", "payload must be non-empty");
        }
        if (auto per = v.want<uint64_t>(fj, path, "period", false)) {
          f.period = *per;
        }
        if (f.period == 0) v.fail(path + ".period", "must be at least 1");
        if (auto st = v.want<uint64_t>(fj, path, "start", false)) {
          f.start = *st;
        }
        if (ok) {
          if (f.count > 0) {
            last_initiation = std::max(
                last_initiation, f.start + (f.count - 1) * f.period);
          }
          s.flows.push_back(f);
        }
        ++i;
      }
    }
    // every transaction must be able to reach a terminal phase in-run
    if (s.protocol == Protocol::Oae && s.horizon > 0 && s.duration > 0 &&
        last_initiation + s.horizon + 1 > s.duration) {
      v.fail("duration", "too short: last initiation at slot " +
                             std::to_string(last_initiation) +
                             " cannot reach its horizon before the run ends");
    }
  } else {
    if (j.contains("lww")) {
      const json& wj = j["lww"];
      if (!wj.is_object()) {
        v.fail("lww", "must be an object");
      } else {
        if (auto g = v.want<uint64_t>(wj, "lww", "gossip_period", false)) {
          s.lww.gossip_period = *g;
        }
        if (s.lww.gossip_period == 0) {
          v.fail("lww.gossip_period", "must be at least 1");
        }
        if (wj.contains("skew")) {
          if (!wj["skew"].is_object()) {
            v.fail("lww.skew", "must map node name to slots");
          } else {
            for (auto it = wj["skew"].begin(); it != wj["skew"].end(); ++it) {
              auto id = s.topology.id_of(it.key());
              if (!id) {
                v.fail("lww.skew." + it.key(), "unknown node");
              } else {
                s.lww.skew[*id] = it.value().get<int64_t>();
              }
            }
          }
        }
        if (wj.contains("writes")) {
          std::size_t i = 0;
          auto plain_token = [](const std::string& t) {
            return !t.empty() &&
                   t.find_first_of(" \t\n\r") == std::string::npos;
          };
          for (const json& ww : wj["writes"]) {
            std::string path = "lww.writes[" + std::to_string(i) + "]";
            LwwWrite w;
            bool ok = true;
            auto node = node_ref(ww, "node", path, s.topology, v);
            if (node) {
              w.node = *node;
            } else {
              ok = false;
            }
            if (auto k = v.want<std::string>(ww, path, "key", true)) {
              w.key = *k;
              if (!plain_token(w.key)) {
                v.fail(path + ".key", "must be non-empty without whitespace");
                ok = false;
              }
            } else {
              ok = false;
            }
            if (auto val = v.want<std::string>(ww, path, "value", true)) {
              w.value = *val;
              if (!plain_token(w.value)) {
                v.fail(path + ".value", "must be non-empty without whitespace");
                ok = false;
              }
            } else {
              ok = false;
            }
            if (auto sl = v.want<uint64_t>(ww, path, "slot", true)) {
              w.slot = *sl;
            }
            if (ok) s.lww.writes.push_back(w);
            ++i;
          }
        }
      }
    }
    if (s.lww.writes.empty()) {
      v.fail("lww.writes", "lww scenarios need at least one write");
    }
  }

  if (!result.errors.empty()) return result;
  result.scenario = std::move(s);
  return result;
}

ParseResult load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseResult r;
    r.errors.push_back({"", "cannot open scenario file: " + path});
    return r;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace leibniz::sim
