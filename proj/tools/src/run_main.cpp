#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "hym/cli/pipeline.hpp"

namespace hym::cli {

namespace {

struct Opts {
  std::string scenario;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool has_seed = false;
  unsigned threads = 1;
};

void add_opts(CLI::App* sub, Opts& o) {
  sub->add_option("--scenario", o.scenario, "scenario JSON file")->required();
  sub->add_option("--out", o.out, "output directory");
  sub->add_option_function<std::uint64_t>(
      "--seed", [&o](const std::uint64_t& s) { o.seed = s, o.has_seed = true; }, "override the scenario seed");
  sub->add_option("--threads", o.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
}

int do_cone(const Scenario& sc, const Opts& o) {
  write_file((std::filesystem::path(o.out) / "cone.json").string(), dump(run_cone(sc)));
  return kOk;
}

int do_flow(const Scenario& sc, const Opts& o) {
  namespace fs = std::filesystem;
  do_cone(sc, o);
  auto runs = run_flow(sc, o.threads);
  const Lattice L(sc.grid, sc.bundle);
  for (auto& r : runs) {
    const std::string k = std::to_string(r.index);
    write_file((fs::path(o.out) / ("flow_" + k + ".json")).string(), dump(flow_json(sc, r)));
    if (r.error.empty()) {
      write_file((fs::path(o.out) / ("traj_" + k + ".csv")).string(), traj_csv(r));
      write_snapshot((fs::path(o.out) / ("op_" + k + ".bin")).string(), r.report.point.gamma, sc.grid.N);
    }
  }
  return flow_exit_code(runs);
}

int do_verify(const Scenario& sc, const Opts& o) {
  namespace fs = std::filesystem;
  auto rows = verify(sc, o.out);
  write_file((fs::path(o.out) / "verdicts.csv").string(), verdicts_csv(rows));
  write_file((fs::path(o.out) / "verdicts.json").string(), dump(verdicts_json(rows)));
  int pass = 0;
  for (auto& r : rows) {
    pass += r.pass;
    std::cout << (r.pass ? "pass " : "FAIL ") << r.id << "  measured=" << r.measured << "  (" << r.threshold << ")"
              << (r.note.empty() ? "" : "  " + r.note) << "\n";
  }
  std::cout << "verify: " << pass << "/" << rows.size() << " rows pass\n";
  return kOk;
}

}  // namespace

int run_main(int argc, char** argv) {
  CLI::App app{"HYM wall-crossing toolkit: stability cones and moment-map flows"};
  app.require_subcommand(1);
  Opts o;
  auto* cone = app.add_subcommand("cone", "stability cone report");
  auto* flow = app.add_subcommand("flow", "flow sweeps along the scenario's epsilon paths");
  auto* ver = app.add_subcommand("verify", "verdict table from existing flow reports");
  auto* all = app.add_subcommand("all", "cone, flow and verify");
  for (auto* s : {cone, flow, ver, all}) add_opts(s, o);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  try {
    Scenario sc = load_scenario(o.scenario);
    if (o.has_seed) sc.seed = o.seed;
    std::filesystem::create_directories(o.out);
    if (*cone) return do_cone(sc, o);
    if (*flow) return do_flow(sc, o);
    if (*ver) return do_verify(sc, o);
    do_cone(sc, o);
    const int rc = do_flow(sc, o);
    if (rc == kSolver) return rc;
    do_verify(sc, o);
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const cone::StructuralError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const cone::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << " (residual " << e.residual << ")\n";
    return kSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
}

}  // namespace hym::cli
