#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "leibniz/scenario.hpp"

using namespace leibniz::sim;

namespace {

bool has_error(const ParseResult& r, const std::string& field) {
  return std::any_of(r.errors.begin(), r.errors.end(),
                     [&](const ValidationError& e) { return e.field == field; });
}

const char* kValid = R"({
  "name": "triangle-lossless",
  "topology": {"kind": "triangle"},
  "protocol": "oae",
  "seed": 11,
  "duration": 200,
  "horizon": 16,
  "link": {"delay": 1, "loss_prob": 0.0},
  "flows": [{"from": "a", "to": "b", "count": 10, "period": 2, "payload_bytes": 8}]
})";

}  // namespace

TEST_CASE("a valid scenario parses completely") {
  auto r = parse_scenario(kValid);
  REQUIRE(r.ok());
  const Scenario& s = *r.scenario;
  CHECK(s.name == "triangle-lossless");
  CHECK(s.protocol == Protocol::Oae);
  CHECK(s.seed == 11);
  CHECK(s.horizon == 16);
  CHECK(s.topology.node_count() == 3);
  REQUIRE(s.flows.size() == 1);
  CHECK(s.flows[0].from == 0);
  CHECK(s.flows[0].to == 1);
  CHECK(s.flows[0].count == 10);
  // digest is stable
  CHECK(s.digest() == parse_scenario(kValid).scenario->digest());
}

TEST_CASE("missing horizon is reported by key") {
  std::string text = R"({
    "topology": {"kind": "triangle"},
    "protocol": "oae",
    "duration": 100,
    "flows": [{"from": "a", "to": "b", "count": 1}]
  })";
  auto r = parse_scenario(text);
  CHECK_FALSE(r.ok());
  CHECK(has_error(r, "horizon"));
}

TEST_CASE("field errors carry their dotted paths") {
  std::string text = R"({
    "topology": {"kind": "triangle"},
    "protocol": "warpdrive",
    "duration": 100,
    "horizon": 8,
    "link": {"loss_prob": 1.5, "partitions": [{"edge": ["a", "z"], "start": 0}]},
    "flows": [{"from": "a", "to": "q", "count": 1}]
  })";
  auto r = parse_scenario(text);
  CHECK_FALSE(r.ok());
  CHECK(has_error(r, "protocol"));
  CHECK(has_error(r, "link.loss_prob"));
  CHECK(has_error(r, "link.partitions[0].edge"));
  CHECK(has_error(r, "flows[0].to"));
}

TEST_CASE("flows must connect adjacent distinct nodes") {
  std::string text = R"({
    "topology": {"kind": "grid", "w": 3, "h": 3, "wrap": false},
    "protocol": "oae",
    "duration": 100,
    "horizon": 8,
    "flows": [{"from": "c0_0", "to": "c2_2", "count": 1}]
  })";
  auto r = parse_scenario(text);
  CHECK_FALSE(r.ok());
  CHECK(has_error(r, "flows[0]"));
}

TEST_CASE("duration must cover the last horizon") {
  std::string text = R"({
    "topology": {"kind": "triangle"},
    "protocol": "oae",
    "duration": 20,
    "horizon": 16,
    "flows": [{"from": "a", "to": "b", "count": 10, "period": 2}]
  })";
  auto r = parse_scenario(text);
  CHECK_FALSE(r.ok());
  CHECK(has_error(r, "duration"));
}

TEST_CASE("lww scenarios validate their writes") {
  std::string text = R"({
    "topology": {"kind": "triangle"},
    "protocol": "lww",
    "duration": 50,
    "lww": {"gossip_period": 4,
            "skew": {"b": 5},
            "writes": [{"node": "a", "key": "k", "value": "v", "slot": 3}]}
  })";
  auto r = parse_scenario(text);
  REQUIRE(r.ok());
  CHECK(r.scenario->lww.skew.at(1) == 5);
  REQUIRE(r.scenario->lww.writes.size() == 1);
  CHECK(r.scenario->lww.writes[0].node == 0);

  std::string no_writes = R"({
    "topology": {"kind": "triangle"},
    "protocol": "lww",
    "duration": 50
  })";
  auto r2 = parse_scenario(no_writes);
  CHECK_FALSE(r2.ok());
  CHECK(has_error(r2, "lww.writes"));

  // keys and values travel inside gossip frames and must stay plain tokens
  std::string spacey = R"({
    "topology": {"kind": "triangle"},
    "protocol": "lww",
    "duration": 50,
    "lww": {"writes": [{"node": "a", "key": "my key", "value": "v", "slot": 1}]}
  })";
  auto r3 = parse_scenario(spacey);
  CHECK_FALSE(r3.ok());
  CHECK(has_error(r3, "lww.writes[0].key"));
}

TEST_CASE("garbage input yields a document-level error") {
  auto r = parse_scenario("this is not json");
  CHECK_FALSE(r.ok());
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].field.empty());
}

TEST_CASE("grid topology errors surface as field errors") {
  std::string text = R"({
    "topology": {"kind": "grid", "w": 1, "h": 3},
    "protocol": "oae",
    "duration": 100,
    "horizon": 8,
    "flows": [{"from": "a", "to": "b", "count": 1}]
  })";
  auto r = parse_scenario(text);
  CHECK_FALSE(r.ok());
  CHECK(has_error(r, "topology"));
}
