// Scenario-driven command line front end.
//
//   ermakov simulate         --config c.json --out traj.csv
//   ermakov invariants       --config c.json [--traj traj.csv] --report r.json
//   ermakov reduce           --config c.json --out both_frames.csv
//   ermakov analytic-compare --config c.json --report r.json
//   ermakov noether-scan     --config c.json --report r.json
//
// Every subcommand accepts multiple --config files; with --jobs N independent
// scenarios run in parallel and --out/--report name a directory that receives
// one output per config (stem + .csv/.json).

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ermakov/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::vector<std::string> configs;
  std::string out;
  std::string report;
  double tolerance = 0;
  bool has_tolerance = false;
  unsigned jobs = 1;
};

std::optional<double> tol_of(const CommonOpts& o) {
  if (o.has_tolerance) return o.tolerance;
  return std::nullopt;
}

// Output path for one config: the argument itself for a single scenario, or
// <dir>/<config stem><ext> in batch mode.
std::string output_path(const CommonOpts& o, const std::string& base,
                        const std::string& config, const char* ext) {
  if (o.configs.size() == 1) return base;
  fs::path dir(base);
  fs::create_directories(dir);
  return (dir / (fs::path(config).stem().string() + ext)).string();
}

int run_all(const CommonOpts& o,
            const std::function<int(const std::string&)>& one) {
  if (o.configs.size() == 1 || o.jobs <= 1) {
    int worst = 0;
    for (const auto& cfg : o.configs) worst = std::max(worst, one(cfg));
    return worst;
  }
  int worst = 0;
  std::size_t next = 0;
  while (next < o.configs.size()) {
    std::vector<std::future<int>> batch;
    for (unsigned j = 0; j < o.jobs && next < o.configs.size(); ++j, ++next)
      batch.push_back(std::async(std::launch::async, one, o.configs[next]));
    for (auto& f : batch) worst = std::max(worst, f.get());
  }
  return worst;
}

void add_common(CLI::App* sub, CommonOpts& o, bool wants_out, bool wants_report) {
  sub->add_option("--config", o.configs, "scenario config file(s), JSON")
      ->required()
      ->check(CLI::ExistingFile);
  if (wants_out)
    sub->add_option("--out", o.out, "output CSV path (directory in batch mode)")
        ->required();
  if (wants_report)
    sub->add_option("--report", o.report, "report JSON path (directory in batch mode)")
        ->required();
  sub->add_option("--tolerance", o.tolerance, "override the command's check tolerance")
      ->each([&o](const std::string&) { o.has_tolerance = true; });
  sub->add_option("--jobs", o.jobs, "run this many scenarios in parallel")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2d generalized Ermakov system: simulate, check first integrals,\n"
               "reduce to the autonomous frame, verify the closed-form solution,\n"
               "and scan the homothetic algebra for symmetry conditions"};
  app.require_subcommand(1);

  CommonOpts sim, inv, red, ana, noe;
  std::string inv_traj;

  CLI::App* c_sim = app.add_subcommand("simulate", "integrate and write a trajectory CSV");
  add_common(c_sim, sim, true, false);

  CLI::App* c_inv =
      app.add_subcommand("invariants", "evaluate first integrals and report drift");
  add_common(c_inv, inv, false, true);
  c_inv->add_option("--traj", inv_traj, "use an existing trajectory CSV instead of integrating");

  CLI::App* c_red =
      app.add_subcommand("reduce", "map a time-dependent run to the autonomous frame");
  add_common(c_red, red, true, false);

  CLI::App* c_ana = app.add_subcommand("analytic-compare",
                                       "check the closed-form polar solution");
  add_common(c_ana, ana, false, true);

  CLI::App* c_noe = app.add_subcommand("noether-scan",
                                       "pass/fail matrix of symmetry conditions");
  add_common(c_noe, noe, false, true);

  CLI11_PARSE(app, argc, argv);

  if (c_sim->parsed())
    return run_all(sim, [&](const std::string& cfg) {
      return ermakov::scenario::run_simulate(cfg, output_path(sim, sim.out, cfg, ".csv"));
    });
  if (c_inv->parsed())
    return run_all(inv, [&](const std::string& cfg) {
      std::optional<std::string> traj;
      if (!inv_traj.empty()) traj = inv_traj;
      return ermakov::scenario::run_invariants(
          cfg, traj, output_path(inv, inv.report, cfg, ".json"), tol_of(inv));
    });
  if (c_red->parsed())
    return run_all(red, [&](const std::string& cfg) {
      return ermakov::scenario::run_reduce(cfg, output_path(red, red.out, cfg, ".csv"));
    });
  if (c_ana->parsed())
    return run_all(ana, [&](const std::string& cfg) {
      return ermakov::scenario::run_analytic_compare(
          cfg, output_path(ana, ana.report, cfg, ".json"), tol_of(ana));
    });
  return run_all(noe, [&](const std::string& cfg) {
    return ermakov::scenario::run_noether_scan(
        cfg, output_path(noe, noe.report, cfg, ".json"), tol_of(noe));
  });
}
