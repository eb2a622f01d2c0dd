#pragma once

#include <vector>

#include "sgf/regularity.hpp"

namespace sgf {

// Named flow scenarios shared by the calibration pass, the sweeps, and the
// acceptance suite. All are winding involution fields relaxed under the
// smoothed potentials.

struct MatrixCell {
  int m;
  double b;
  int L;
};

// The fixed calibration matrix {m=2,3} x {b=1,0.1,0.01} x {L=1,2}.
std::vector<MatrixCell> scenario_matrix();

// One cell of the matrix: grid large enough that the monotonicity radii
// 4h..16h stay below R_M = period/4. t_end = 0 picks the scenario default.
FlowScenario matrix_scenario(int m, double t_end = 0.0);

// Scan scenario for the epsilon-regularity sweeps: winding plus an
// amplitude-graded bump, so local energies span several orders of magnitude
// and the trigger boundary is populated at every b.
FlowScenario scan_scenario(int m, double t_end = 0.0);

// m = 2 winding scenario for the Hausdorff bad-set table.
FlowScenario sweep_scenario(double t_end = 0.0);

// m = 3 scenario for the sup-e bound sweep.
FlowScenario sup_e_scenario(double t_end = 0.0);

// Amplitude-graded initial data used by scan_scenario: a log-graded stripe
// whose potential density spans 1 .. 1/amp_max^2, populating the trigger
// boundary of every epsilon-regularity sweep.
SymmetricMatrixField striped_amplitude_field(const LatticeDomain& dom, double amp_max);

// Winding field with a radial amplitude bump (kept for constructed tests).
SymmetricMatrixField graded_winding_field(const LatticeDomain& dom, double amp_max,
                                          std::uint64_t seed);

}  // namespace sgf
