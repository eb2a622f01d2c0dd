#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgf/flow.hpp"
#include "sgf/lattice.hpp"
#include "sgf/potentials.hpp"

namespace sgf {

// Run configuration parsed from `key = value` text with dotted section keys
// (see README for the schema). Unknown keys and violated preconditions are
// reported with the exact key path.
struct RunConfig {
  // domain
  int m = 2;
  int n_per_axis = 32;
  double period = 1.0;

  // matrix
  int l = 2;
  int k = 1;
  std::vector<int> winding;  // default (1, 0, ..., 0)
  std::uint64_t seed = 1;
  double perturbation = 0.0;
  double scale = 1.0;  // overall amplitude of the initial field

  // potential
  PotentialFamily family = PotentialFamily::Smoothed;
  double b = 1.0;
  int L = 1;

  // flow
  Integrator integrator = Integrator::SpectralImex;
  bool dt_auto = true;
  double dt = 0.0;
  double safety = 0.9;
  double t_end = 1.0;
  int stride = 10;

  // analysis
  double delta = 0.5;
  bool rho_auto = true;  // rho = R_M / 2
  double rho = 0.0;
  std::vector<double> radii;          // empty = auto: {4h, 6h, 8h, 12h, 16h} below R_M
  std::vector<std::int64_t> centers;  // empty = auto: deterministic spread
  bool eps0_auto = true;              // eps0 = b^(1/L) / (2 C_cal)
  double eps0 = 0.0;
  std::vector<double> b_sweep;
  std::string constants_path;  // optional calibrated-constants JSON

  // output
  std::string out_dir = "out";
  bool emit_snapshots = true;

  LatticeDomain domain() const;
  PotentialSpec potential() const;
  FlowConfig flow() const;
  SymmetricMatrixField initial_field() const;
  double resolved_rho() const;
  std::vector<double> resolved_radii() const;
  std::vector<std::int64_t> resolved_centers() const;

  // Defaults-expanded text in the same schema, written next to run artifacts.
  std::string resolved_text() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace sgf
