#pragma once
// Scenario files: one JSON document with every tolerance spelled out.

#include <cstdint>
#include <string>
#include <vector>

#include "hym/cone.hpp"
#include "hym/flow.hpp"

namespace hym::cli {

struct Candidate {
  cone::SlopeDatum datum;
  std::string tag;
  std::vector<int> components;  // line components spanning the sub-bundle (may be empty)
};

struct EpsPath {
  std::string name;
  std::string kind = "moduli";  // exact | moduli | mixed
  std::string purpose = "sweep";  // sweep | lipschitz
  std::array<double, 2> direction{1, -1};  // class shift per unit scale
  std::array<double, 2> amplitude{1, 0};   // cosine amplitude per unit scale
  std::vector<double> scales;
  bool has_b0 = false;
  double b0_amplitude = 0;
};

struct Scenario {
  std::string name;
  TorusGrid grid;
  BundleSpec bundle;
  cone::SlopeDatum total;
  std::vector<Candidate> candidates;
  cone::Region region;
  std::vector<cone::ThetaClass> probes;
  std::vector<EpsPath> paths;
  double tau_V = 1.0, tau_K = 0.1;
  SliceParams slice;
  flow::FlowParams flow;
  int b0_block_i = 0, b0_block_j = 1;
  double b0_amplitude = 0.1;
  std::uint64_t seed = 1;

  cone::ThetaClass theta0() const;
  // class of the perturbed metric, as exact rationals of the doubles
  cone::ThetaClass theta(const Perturbation& e) const;
  Perturbation perturbation(const EpsPath& p, double scale) const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

}  // namespace hym::cli
