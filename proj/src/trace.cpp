#include "leibniz/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace leibniz::sim {

namespace {

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void field(std::string& out, const char* name, uint64_t v) {
  out += out.back() == '{' ? "\"" : ",\"";
  out += name;
  out += "\":";
  out += std::to_string(v);
}

void field(std::string& out, const char* name, const std::string& v) {
  out += out.back() == '{' ? "\"" : ",\"";
  out += name;
  out += "\":";
  append_escaped(out, v);
}

template <typename T>
void opt_field(std::string& out, const char* name, const std::optional<T>& v) {
  if (v) field(out, name, *v);
}

void string_list(std::string& out, const char* name,
                 const std::vector<std::string>& vs) {
  out += ",\"";
  out += name;
  out += "\":[";
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ',';
    append_escaped(out, vs[i]);
  }
  out += ']';
}

}  // namespace

std::string to_jsonl(const TraceEvent& ev) {
  std::string out = "{";
  field(out, "slot", ev.slot);
  field(out, "kind", ev.kind);
  opt_field(out, "txn", ev.txn);
  if (!ev.node.empty()) field(out, "node", ev.node);
  if (!ev.edge.empty()) field(out, "edge", ev.edge);
  opt_field(out, "bits", ev.bits);
  opt_field(out, "digest", ev.digest);
  opt_field(out, "src", ev.src);
  opt_field(out, "dst", ev.dst);
  opt_field(out, "tag", ev.tag);
  opt_field(out, "phase", ev.phase);
  opt_field(out, "role", ev.role);
  opt_field(out, "verdict", ev.verdict);
  opt_field(out, "path", ev.path);
  opt_field(out, "key", ev.key);
  opt_field(out, "writer", ev.writer);
  opt_field(out, "ts", ev.ts);
  opt_field(out, "seen", ev.seen);
  opt_field(out, "note", ev.note);
  out += '}';
  return out;
}

std::string to_jsonl(const RunHeader& h) {
  std::string out = "{";
  field(out, "slot", uint64_t{0});
  field(out, "kind", std::string("run-start"));
  field(out, "protocol", h.protocol);
  field(out, "seed", h.seed);
  field(out, "duration", h.duration);
  field(out, "delay", h.delay);
  field(out, "loss_ppm", h.loss_ppm);
  field(out, "relay", uint64_t{h.relay ? 1u : 0u});
  field(out, "retransmit", uint64_t{h.retransmit ? 1u : 0u});
  field(out, "horizon", h.horizon);
  field(out, "topology", h.topology_kind);
  string_list(out, "nodes", h.nodes);
  string_list(out, "edges", h.edges);
  field(out, "scenario", h.scenario_digest);
  out += '}';
  return out;
}

std::string to_jsonl(const RunFooter& f) {
  std::string out = "{";
  field(out, "slot", f.slot);
  field(out, "kind", std::string("run-end"));
  field(out, "txns", f.txns);
  field(out, "commits", f.commits);
  field(out, "aborts", f.aborts);
  field(out, "divergences", f.divergences);
  field(out, "silent_corruptions", f.silent_corruptions);
  field(out, "relay_uses", f.relay_uses);
  field(out, "entropy_bits", f.entropy_bits);
  out += '}';
  return out;
}

std::string to_jsonl(const RunTrace& trace) {
  std::string out = to_jsonl(trace.header);
  out += '\n';
  for (const TraceEvent& ev : trace.events) {
    out += to_jsonl(ev);
    out += '\n';
  }
  out += to_jsonl(trace.footer);
  out += '\n';
  return out;
}

namespace {

using nlohmann::json;

[[noreturn]] void bad_line(std::size_t line_no, const std::string& why) {
  throw std::runtime_error("trace parse error at line " +
                           std::to_string(line_no) + ": " + why);
}

template <typename T>
std::optional<T> opt_get(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) return std::nullopt;
  return it->get<T>();
}

std::string str_or_empty(const json& j, const char* name) {
  auto it = j.find(name);
  return it == j.end() ? std::string{} : it->get<std::string>();
}

}  // namespace

RunTrace parse_trace(const std::string& file_contents) {
  RunTrace out;
  std::istringstream in(file_contents);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  bool have_footer = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) bad_line(line_no, "not a JSON object");
    if (!j.contains("kind")) bad_line(line_no, "missing kind");
    std::string kind = j["kind"].get<std::string>();
    try {
      if (kind == "run-start") {
        RunHeader& h = out.header;
        h.protocol = j.at("protocol").get<std::string>();
        h.seed = j.at("seed").get<uint64_t>();
        h.duration = j.at("duration").get<uint64_t>();
        h.delay = j.at("delay").get<uint64_t>();
        h.loss_ppm = j.at("loss_ppm").get<uint64_t>();
        h.relay = j.at("relay").get<uint64_t>() != 0;
        h.retransmit = j.at("retransmit").get<uint64_t>() != 0;
        h.horizon = j.at("horizon").get<uint64_t>();
        h.topology_kind = j.at("topology").get<std::string>();
        h.nodes = j.at("nodes").get<std::vector<std::string>>();
        h.edges = j.at("edges").get<std::vector<std::string>>();
        h.scenario_digest = j.at("scenario").get<std::string>();
        have_header = true;
      } else if (kind == "run-end") {
        RunFooter& f = out.footer;
        f.slot = j.at("slot").get<uint64_t>();
        f.txns = j.at("txns").get<uint64_t>();
        f.commits = j.at("commits").get<uint64_t>();
        f.aborts = j.at("aborts").get<uint64_t>();
        f.divergences = j.at("divergences").get<uint64_t>();
        f.silent_corruptions = j.at("silent_corruptions").get<uint64_t>();
        f.relay_uses = j.at("relay_uses").get<uint64_t>();
        f.entropy_bits = j.at("entropy_bits").get<uint64_t>();
        have_footer = true;
      } else {
        TraceEvent ev;
        ev.slot = j.at("slot").get<uint64_t>();
        ev.kind = kind;
        ev.txn = opt_get<uint64_t>(j, "txn");
        ev.node = str_or_empty(j, "node");
        ev.edge = str_or_empty(j, "edge");
        ev.bits = opt_get<uint64_t>(j, "bits");
        ev.digest = opt_get<std::string>(j, "digest");
        ev.src = opt_get<std::string>(j, "src");
        ev.dst = opt_get<std::string>(j, "dst");
        ev.tag = opt_get<std::string>(j, "tag");
        ev.phase = opt_get<std::string>(j, "phase");
        ev.role = opt_get<std::string>(j, "role");
        ev.verdict = opt_get<std::string>(j, "verdict");
        ev.path = opt_get<std::string>(j, "path");
        ev.key = opt_get<std::string>(j, "key");
        ev.writer = opt_get<std::string>(j, "writer");
        ev.ts = opt_get<uint64_t>(j, "ts");
        ev.seen = opt_get<std::string>(j, "seen");
        ev.note = opt_get<std::string>(j, "note");
        out.events.push_back(std::move(ev));
      }
    } catch (const json::exception& e) {
      bad_line(line_no, e.what());
    }
  }
  if (!have_header) throw std::runtime_error("trace parse error: missing run-start line");
  if (!have_footer) throw std::runtime_error("trace parse error: missing run-end line");
  return out;
}

RunTrace load_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

}  // namespace leibniz::sim
