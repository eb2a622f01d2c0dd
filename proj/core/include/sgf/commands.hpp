#pragma once

#include <string>

#include "sgf/config.hpp"
#include "sgf/constants.hpp"

namespace sgf {

// Process exit statuses. Divergence is an outcome, not an error, and gets its
// own code so scripts can tell the two apart.
enum class ExitStatus : int {
  Ok = 0,
  Failure = 1,
  BadConfig = 2,
  Diverged = 3,
};

// Runs the configured flow; writes snap_XXXXXX.sgf files, series.csv and the
// resolved config into out_dir. Partial artifacts are retained on divergence.
ExitStatus cmd_run(const RunConfig& cfg, const std::string& out_dir);

// Reads the snapshots under traj_dir and writes phi_profile.csv,
// psi_checks.csv, moser_checks.csv, epsreg_elliptic.csv, epsreg_parabolic.csv
// and summary.json into out_dir.
ExitStatus cmd_analyze(const RunConfig& cfg, const std::string& traj_dir,
                       const std::string& out_dir);

// Runs the b sweeps from analysis.b_sweep; writes badset_sweep.csv and
// sup_e_sweep.csv into out_dir. Per-b failures retain partial results.
ExitStatus cmd_sweep(const RunConfig& cfg, const std::string& out_dir);

// Constants used by analyze/sweep: the file named in the config, or defaults.
CalibratedConstants constants_for(const RunConfig& cfg);

}  // namespace sgf
