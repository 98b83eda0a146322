#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "leibniz/cli_commands.hpp"

using namespace leibniz;

int main(int argc, char** argv) {
  CLI::App app{
      "leibniz-link: bilateral transaction protocol simulator and auditor"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  cli::RunOptions run_opts;
  uint64_t run_seed = 0;
  bool run_seed_set = false;
  auto* run = app.add_subcommand("run", "execute one scenario");
  run->add_option("scenario", run_opts.scenario_path, "scenario file (JSON)")
      ->required();
  run->add_option("--seed", run_seed, "override the scenario seed")
      ->each([&](const std::string&) { run_seed_set = true; });
  run->add_option("--out", run_opts.out_dir,
                  "output directory for trace/metrics/report");

  cli::CompareOptions cmp_opts;
  std::string cmp_protocols = "oae,fireforget";
  std::string cmp_seeds = "1";
  std::string cmp_out;
  auto* cmp = app.add_subcommand(
      "compare", "run several protocols over one scenario and seeds");
  cmp->add_option("scenario", cmp_opts.scenario_path, "scenario file (JSON)")
      ->required();
  cmp->add_option("--protocols", cmp_protocols,
                  "comma-separated protocol list");
  cmp->add_option("--seeds", cmp_seeds, "comma-separated seed list");
  cmp->add_option("--out", cmp_out, "output directory for the tables");

  std::string trace_path;
  auto* chk = app.add_subcommand("check-conservation",
                                 "audit the conservation laws on a trace");
  chk->add_option("trace", trace_path, "trace file (JSON Lines)")->required();

  int systems = 1;
  auto* kbp = app.add_subcommand("enumerate-kbp",
                                 "count the knowledge-balance states");
  kbp->add_option("--systems", systems, "number of elementary systems (1|2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::exit(app.exit(e) == 0 ? 0 : cli::kUsage);
  }

  if (run->parsed()) {
    if (run_seed_set) run_opts.seed = run_seed;
    return cli::cmd_run(run_opts, std::cout, std::cerr);
  }
  if (cmp->parsed()) {
    for (auto& tok : CLI::detail::split(cmp_protocols, ',')) {
      if (!tok.empty()) cmp_opts.protocols.push_back(tok);
    }
    for (auto& tok : CLI::detail::split(cmp_seeds, ',')) {
      if (tok.empty()) continue;
      try {
        cmp_opts.seeds.push_back(std::stoull(tok));
      } catch (const std::exception&) {
        std::cerr << "bad seed '" << tok << "'\n";
        return cli::kUsage;
      }
    }
    if (!cmp_out.empty()) cmp_opts.out_dir = cmp_out;
    return cli::cmd_compare(cmp_opts, std::cout, std::cerr);
  }
  if (chk->parsed()) {
    return cli::cmd_check_conservation(trace_path, std::cout, std::cerr);
  }
  if (kbp->parsed()) {
    return cli::cmd_enumerate_kbp(systems, std::cout, std::cerr);
  }
  return cli::kUsage;
}
