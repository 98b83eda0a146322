// Acceptance suite: one binary, one pass/fail line per criterion, nonzero
// exit if anything fails. Criteria and tolerances are pinned in code here;
// run it via `ctest -R acceptance` or directly.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "leibniz/audit.hpp"
#include "leibniz/baselines.hpp"
#include "leibniz/kbp.hpp"
#include "leibniz/sim.hpp"
#include "support/explore.hpp"
#include "support/history_gen.hpp"

using namespace leibniz;
using namespace leibniz::sim;

namespace {

struct Criterion {
  int id;
  std::string what;
  bool pass = true;
  double seconds = 0.0;
  std::string detail;
};

std::vector<Criterion> g_results;

template <typename F>
void criterion(int id, const std::string& what, double budget_s, F&& body) {
  Criterion c;
  c.id = id;
  c.what = what;
  auto t0 = std::chrono::steady_clock::now();
  std::string why;
  try {
    why = body();
  } catch (const std::exception& e) {
    why = std::string("exception: ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count();
  if (!why.empty()) {
    c.pass = false;
    c.detail = why;
  } else if (budget_s > 0 && c.seconds > budget_s) {
    c.pass = false;
    c.detail = "over time budget of " + std::to_string(budget_s) + "s";
  }
  std::printf("criterion %d %s (%.2fs): %s%s%s\n", c.id,
              c.pass ? "PASS" : "FAIL", c.seconds, c.what.c_str(),
              c.detail.empty() ? "" : " -- ", c.detail.c_str());
  std::fflush(stdout);
  g_results.push_back(std::move(c));
}

Scenario triangle_scenario(Protocol proto, uint64_t seed, uint64_t duration,
                           uint64_t horizon) {
  Scenario s;
  s.name = "acceptance";
  s.topology = Topology::triangle();
  s.protocol = proto;
  s.seed = seed;
  s.duration = duration;
  s.horizon = horizon;
  return s;
}

Flow make_flow(NodeId from, NodeId to, uint64_t count, uint64_t period = 1,
               uint64_t start = 0, uint64_t bytes = 8) {
  Flow f;
  f.from = from;
  f.to = to;
  f.count = count;
  f.period = period;
  f.start = start;
  f.payload_bytes = bytes;
  return f;
}

// --- criterion bodies ------------------------------------------------

std::string check_kbp_counts() {
  auto one = kbp::enumerate_maximal_states(1);
  auto two = kbp::enumerate_maximal_states(2);
  if (one.single != 6) return "n=1 single != 6";
  if (two.product != 36) return "n=2 product != 36";
  if (two.entangled != 24) return "n=2 entangled != 24";
  return {};
}

std::string check_causal_oracle() {
  using causal::Relation;
  uint64_t pairs = 0;
  uint64_t indefinite = 0;
  for (uint64_t seed = 1; seed <= 10000; ++seed) {
    auto gen = testsupport::random_history(seed, 50, 20, 4);
    const auto& h = gen.history;
    const auto& evs = gen.events;
    for (std::size_t i = 0; i < evs.size(); ++i) {
      for (std::size_t j = i + 1; j < evs.size(); ++j) {
        Relation fast = h.compare(evs[i], evs[j]);
        Relation slow = h.oracle_relation(evs[i], evs[j]);
        ++pairs;
        if (fast != slow) {
          return "mismatch at seed " + std::to_string(seed);
        }
        if (fast == Relation::Indefinite) ++indefinite;
      }
    }
    // indefinite iff the pair's exchange is open
    uint64_t open_pairs = 0;
    for (auto xid : h.open_exchange_ids()) {
      auto halves = h.exchange_halves(xid);
      if (halves.size() != 2) continue;
      ++open_pairs;
      if (h.compare(halves[0], halves[1]) != Relation::Indefinite) {
        return "open exchange pair not indefinite at seed " +
               std::to_string(seed);
      }
    }
    uint64_t indefinite_here = 0;
    for (std::size_t i = 0; i < evs.size(); ++i) {
      for (std::size_t j = i + 1; j < evs.size(); ++j) {
        if (h.compare(evs[i], evs[j]) == Relation::Indefinite) {
          ++indefinite_here;
        }
      }
    }
    if (indefinite_here != open_pairs) {
      return "indefinite count != open exchange count at seed " +
             std::to_string(seed);
    }
  }
  if (indefinite == 0) return "indefinite never sampled";
  return {};
}

std::string triangle_consistency_at(uint64_t delay) {
  uint64_t horizon = 16 * delay;
  const Topology topo = Topology::triangle();
  for (const Edge& cut : topo.edges) {
    Scenario s = triangle_scenario(Protocol::Oae, 1,
                                   /*duration=*/100 + horizon + 10 * delay,
                                   horizon);
    s.link.delay = delay;
    s.link.partitions = {{cut, 0, std::nullopt}};
    s.flows = {make_flow(cut.first, cut.second, 100)};
    auto r = run_scenario(s);
    std::string edge = topo.edge_name(cut);
    if (r.metrics.commits != 100) {
      return "partition " + edge + ": " + std::to_string(r.metrics.commits) +
             "/100 commits";
    }
    if (r.metrics.relay_uses != 100) {
      return "partition " + edge + ": relay not used for every transaction";
    }
    // recovery must run through the third vertex
    NodeId third = 3 - cut.first - cut.second;
    std::string want = topo.names[cut.first] + ">" + topo.names[third] + ">" +
                       topo.names[cut.second];
    for (const auto& ev : r.trace.events) {
      if (ev.kind == "relay-used" && ev.path && *ev.path != want) {
        return "unexpected relay path " + *ev.path;
      }
    }
  }
  return {};
}

std::string check_bounded_exploration() {
  auto plain = testsupport::explore_exchange(false);
  if (!plain.ok()) return plain.violations.front();
  if (plain.both_agreed == 0) return "vacuous: no committed outcome reached";
  if (plain.both_aborted == 0) return "vacuous: no aborted outcome reached";
  auto corrupt = testsupport::explore_exchange(true);
  if (!corrupt.ok()) return corrupt.violations.front();
  if (corrupt.states <= plain.states) return "corruption variant unexplored";
  return {};
}

std::string conservation_at(uint64_t delay) {
  uint64_t horizon = 16 * delay;
  // lossless: node law at every (node, slot), loop law on the triangle
  {
    Scenario s = triangle_scenario(Protocol::Oae, 5,
                                   /*duration=*/160 + horizon + 10 * delay,
                                   horizon);
    s.link.delay = delay;
    s.flows = {make_flow(0, 1, 40), make_flow(1, 2, 40), make_flow(2, 0, 40)};
    auto r = run_scenario(s);
    if (r.metrics.commits != 120) return "lossless run failed to commit";
    audit::FluxLedger ledger(r.trace);
    for (const auto& node : ledger.nodes()) {
      for (uint64_t slot = 0; slot < s.duration; ++slot) {
        if (ledger.node_residual(node, slot) != 0) {
          return "node residual nonzero at " + node + "/" +
                 std::to_string(slot);
        }
      }
    }
    if (audit::loop_residual(r.trace, {"a-b", "b-c", "a-c"}, 0, s.duration) !=
        0) {
      return "lossless loop residual nonzero";
    }
    if (audit::entropy_produced(r.trace) != 0) {
      return "lossless run produced entropy";
    }
  }
  // a denser topology: the full check walks all four triangles of K4
  {
    Scenario s;
    s.name = "acceptance";
    s.topology = Topology::complete(4);
    s.protocol = Protocol::Oae;
    s.seed = 6;
    s.duration = 120 + 16 * delay + 10 * delay;
    s.horizon = 16 * delay;
    s.link.delay = delay;
    s.flows = {make_flow(0, 1, 20), make_flow(1, 2, 20), make_flow(2, 3, 20),
               make_flow(3, 0, 20)};
    auto r = run_scenario(s);
    if (r.metrics.commits != 80) return "K4 lossless run failed to commit";
    auto report = audit::check_conservation(r.trace);
    if (!report.ok()) return "K4: " + report.violations.front();
    if (!report.lossless_claims_checked) return "K4 loop claims not applied";
  }
  // lossy single-try: mean deficit = 1-(1-p)^2 = 0.19 +/- 0.02
  {
    Scenario s = triangle_scenario(Protocol::Oae, 1001,
                                   /*duration=*/10000 + horizon + 10 * delay,
                                   horizon);
    s.link.delay = delay;
    s.retransmit = false;
    s.relay = false;
    s.link.loss_prob = 0.1;
    s.flows = {make_flow(0, 1, 10000)};
    auto r = run_scenario(s);
    auto txns = audit::collect_transactions(r.trace);
    if (txns.size() != 10000) return "wrong transaction count";
    double sum = 0;
    for (const auto& [id, t] : txns) sum += audit::exchange_deficit(t);
    double mean = sum / 10000.0;
    if (std::abs(mean - 0.19) > 0.02) {
      return "mean deficit " + std::to_string(mean) + " outside 0.19 +/- 0.02";
    }
  }
  return {};
}

std::string check_pif_accounting() {
  Scenario s = triangle_scenario(Protocol::Oae, 3, 260, 16);
  s.flows = {make_flow(0, 1, 100, 2, 0), make_flow(1, 0, 100, 2, 1)};
  auto r = run_scenario(s);
  auto pif = audit::pif_throughput(r.trace, "a-b");
  if (!pif.symmetric) return "symmetric run flagged asymmetric";
  if (pif.one_way_bits == 0) return "no confirmed traffic";
  if (pif.bilateral_bits != 2 * pif.one_way_bits) {
    return "bilateral != 2 x one-way on the lossless run";
  }
  // the identity is an accounting property of the confirmed subset, so it
  // survives heavy loss with single-try exchanges
  Scenario lossy = s;
  lossy.retransmit = false;
  lossy.link.loss_prob = 0.5;
  lossy.seed = 17;
  auto rl = run_scenario(lossy);
  auto pl = audit::pif_throughput(rl.trace, "a-b");
  if (pl.one_way_bits == 0 || pl.one_way_bits >= 100 * 64) {
    return "lossy confirmed subset implausible";
  }
  if (pl.bilateral_bits != 2 * pl.one_way_bits) {
    return "bilateral != 2 x one-way on the confirmed subset";
  }
  return {};
}

std::string check_fito_contrast() {
  const double losses[] = {0.05, 0.1, 0.2};
  const bool partitions[] = {false, true};
  const uint64_t seeds[] = {1, 2, 3};
  for (double loss : losses) {
    for (bool part : partitions) {
      for (uint64_t seed : seeds) {
        std::string cell = "loss=" + std::to_string(loss) +
                           " partition=" + (part ? std::string("on")
                                                 : std::string("off")) +
                           " seed=" + std::to_string(seed);
        auto base = [&](Protocol proto) {
          Scenario s = triangle_scenario(proto, seed, 500, 16);
          s.link.loss_prob = loss;
          if (part) {
            s.link.partitions = {{make_edge(0, 1), 50, 150}};
          }
          return s;
        };
        {
          Scenario s = base(Protocol::Oae);
          s.flows = {make_flow(0, 1, 300)};
          auto r = run_scenario(s);
          uint64_t audited =
              baselines::corruption_audit(r.trace, Protocol::Oae);
          if (r.metrics.silent_corruptions != 0 || audited != 0) {
            return "oae corruption in cell " + cell;
          }
        }
        {
          Scenario s = base(Protocol::FireForget);
          s.flows = {make_flow(0, 1, 300)};
          auto r = run_scenario(s);
          uint64_t audited =
              baselines::corruption_audit(r.trace, Protocol::FireForget);
          if (audited == 0 || r.metrics.silent_corruptions != audited) {
            return "fireforget not corrupted in lossy cell " + cell;
          }
        }
        {
          Scenario s = base(Protocol::Lww);
          s.lww.gossip_period = 4;
          s.lww.writes = {{0, "k1", "va", 10},
                          {1, "k1", "vb", 10},
                          {0, "k2", "w1", 30},
                          {2, "k2", "w2", 200}};
          auto r = run_scenario(s);
          uint64_t audited = baselines::corruption_audit(r.trace, Protocol::Lww);
          if (audited == 0 || r.metrics.silent_corruptions != audited) {
            return "lww concurrent loss not flagged in cell " + cell;
          }
        }
      }
    }
  }
  return {};
}

std::string check_scale_independence() {
  for (uint64_t delay : {uint64_t{1}, uint64_t{10}, uint64_t{1000}}) {
    std::string r3 = triangle_consistency_at(delay);
    if (!r3.empty()) {
      return "delay " + std::to_string(delay) + ": " + r3;
    }
    std::string r5 = conservation_at(delay);
    if (!r5.empty()) {
      return "delay " + std::to_string(delay) + ": " + r5;
    }
  }
  // criterion 4's exploration is time-abstract (the adversarial scheduler
  // covers every interleaving any link delay could produce), so it passes
  // unchanged by construction; run it once more to keep that claim honest
  std::string r4 = check_bounded_exploration();
  if (!r4.empty()) return "exploration: " + r4;
  return {};
}

std::string check_determinism() {
  Scenario s = triangle_scenario(Protocol::Oae, 9, 400, 16);
  s.link.loss_prob = 0.12;
  s.link.partitions = {{make_edge(0, 2), 60, 190}};
  s.flows = {make_flow(0, 1, 60), make_flow(1, 0, 60, 2, 3),
             make_flow(1, 2, 40, 3, 5)};
  auto a = run_scenario(s);
  auto b = run_scenario(s);
  if (to_jsonl(a.trace) != to_jsonl(b.trace)) return "oae traces differ";
  if (to_csv_row(a.metrics) != to_csv_row(b.metrics)) {
    return "oae metrics differ";
  }
  Scenario g = s;
  g.topology = Topology::grid(3, 3);
  g.protocol = Protocol::FireForget;
  g.link.partitions.clear();
  g.flows = {make_flow(0, 1, 50)};
  auto c = run_scenario(g);
  auto d = run_scenario(g);
  if (to_jsonl(c.trace) != to_jsonl(d.trace)) return "grid traces differ";
  Scenario w = triangle_scenario(Protocol::Lww, 4, 80, 0);
  w.lww.writes = {{0, "k", "x", 5}, {1, "k", "y", 5}};
  auto e = run_scenario(w);
  auto f = run_scenario(w);
  if (to_jsonl(e.trace) != to_jsonl(f.trace)) return "lww traces differ";
  // a different seed must not replay the lossy trace
  Scenario s2 = s;
  s2.seed = 10;
  if (to_jsonl(run_scenario(s2).trace) == to_jsonl(a.trace)) {
    return "seed change did not change the trace";
  }
  return {};
}

}  // namespace

int main() {
  std::printf("leibniz-link acceptance suite\n");
  criterion(1, "kbp golden counts 6 / 36 / 24, exact", 1.0, check_kbp_counts);
  criterion(2,
            "four-valued algebra: compare == oracle on 10000 histories, "
            "indefinite iff open",
            60.0, check_causal_oracle);
  criterion(3,
            "triangle consistency: every single-edge partition heals through "
            "the third vertex, 100/100",
            15.0, [] { return triangle_consistency_at(1); });
  criterion(4,
            "bilateral safety: exhaustive exploration under loss, "
            "duplication, reorder, corruption and expiry",
            60.0, check_bounded_exploration);
  criterion(5,
            "conservation: lossless residuals zero; mean deficit 0.19 +/- "
            "0.02 at p=0.1 single-try",
            60.0, [] { return conservation_at(1); });
  criterion(6, "pif accounting: bilateral == 2 x one-way, exact", 10.0,
            check_pif_accounting);
  criterion(7,
            "fito contrast: oae silent-corruption-free across the sweep, "
            "baselines are not",
            120.0, check_fito_contrast);
  criterion(8, "scale independence: criteria 3-5 at delay 1 / 10 / 1000",
            300.0, check_scale_independence);
  criterion(9, "determinism: byte-identical traces and metrics on rerun",
            60.0, check_determinism);

  int failed = 0;
  for (const auto& c : g_results) {
    if (!c.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failed,
              g_results.size());
  return failed == 0 ? 0 : 1;
}
