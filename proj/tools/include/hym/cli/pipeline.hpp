#pragma once
// Scenario-driven runs: cone report, flow sweeps along the configured
// epsilon paths, and the verdict table computed from the written reports.

#include <string>
#include <vector>

#include <json.hpp>

#include "hym/cli/scenario.hpp"

namespace hym::cli {

enum Exit { kOk = 0, kConfig = 1, kSolver = 2, kBudget = 3 };

nlohmann::json run_cone(const Scenario& sc);

struct PairingRow {
  std::string tag;
  double l = 0;
  flow::Pairing value;
};

struct FlowRun {
  int index = 0;
  int path = 0;
  double scale = 0;
  Perturbation eps;
  cone::Verdict predicted;
  flow::FlowReport report;
  RVec observables;
  double dist = 0;
  std::vector<PairingRow> pairing;
  int status = kOk;  // kSolver / kBudget when the run did not reach a definite outcome
  std::string error;
};

// the slice is built once and shared by all runs
std::vector<FlowRun> run_flow(const Scenario& sc, unsigned threads);
nlohmann::json flow_json(const Scenario& sc, const FlowRun& run);
std::string traj_csv(const FlowRun& run);
int flow_exit_code(const std::vector<FlowRun>& runs);

struct VerdictRow {
  std::string id;
  std::string what;
  double measured = 0;
  std::string threshold;
  bool pass = false;
  std::string note;
};
// reads flow_<k>.json / traj_<k>.csv from dir; throws ConfigError when a
// report is missing
std::vector<VerdictRow> verify(const Scenario& sc, const std::string& dir);
std::string verdicts_csv(const std::vector<VerdictRow>& rows);
nlohmann::json verdicts_json(const std::vector<VerdictRow>& rows);

void write_file(const std::string& path, const std::string& text);
std::string dump(const nlohmann::json& j);

int run_main(int argc, char** argv);

}  // namespace hym::cli
