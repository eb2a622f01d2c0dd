#include "sgf/scenarios.hpp"

#include <cmath>
#include <random>

namespace sgf {

std::vector<MatrixCell> scenario_matrix() {
  std::vector<MatrixCell> cells;
  for (int m : {2, 3})
    for (double b : {1.0, 0.1, 0.01})
      for (int L : {1, 2}) cells.push_back({m, b, L});
  return cells;
}

// The winding rate is kept gentle (kappa = 2 pi / 16) so that the winding
// sector is stable for every cell of the matrix: the shallowest wall is
// W(0) = l/(2Lb) = 0.5 at b = 1, L = 2, well above the kinetic density
// kappa^2 ~ 0.154. Gentle winding also keeps the splitting bias of the
// stationary endpoint small, so the polish phases reach the residual gate.
FlowScenario matrix_scenario(int m, double t_end) {
  // 16h < R_M = period/4 needs n > 64.
  const int n = m == 2 ? 80 : 68;
  const LatticeDomain dom(m, n, 16.0);
  std::vector<int> winding(static_cast<std::size_t>(m), 0);
  winding[0] = 1;
  FlowScenario sc{grassmannian_winding_field(dom, 2, 1, winding, 20240901ull, 0.25),
                  FlowConfig{}};
  sc.flow.dt_policy = DtPolicy::fixed(0.2);
  sc.flow.t_end = t_end > 0.0 ? t_end : 40.0;
  sc.flow.snapshot_stride = m == 2 ? 10 : 25;
  sc.flow.integrator = Integrator::SpectralImex;
  return sc;
}

SymmetricMatrixField graded_winding_field(const LatticeDomain& dom, double amp_max,
                                          std::uint64_t seed) {
  SymmetricMatrixField f = grassmannian_winding_field(
      dom, 2, 1, std::vector<int>(static_cast<std::size_t>(dom.dim()), 1), seed, 0.2);
  // Smooth radial amplitude bump around the torus midpoint.
  Coords mid{};
  for (int a = 0; a < dom.dim(); ++a) mid[a] = dom.sites_per_axis() / 2;
  const std::int64_t center = dom.site_at(mid);
  const double rm = dom.cutoff_radius();
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    const double d = dom.periodic_distance(center, s);
    double amp = 1.0;
    if (d < rm) {
      const double u = d / rm;
      const double bump = (1.0 - u * u) * (1.0 - u * u);
      amp = 1.0 + (amp_max - 1.0) * bump;
    }
    auto t = f.tri(s);
    for (double& v : t) v *= amp;
  }
  return f;
}

// Stripe field with a log-graded amplitude plateau: the potential density
// spans 1 .. 1/amp_max^2 across the stripe, so the trigger boundary
// Phi ~ eps0(b) is populated at every b of the sweeps.
SymmetricMatrixField striped_amplitude_field(const LatticeDomain& dom, double amp_max) {
  // Staircase of diagonal plateaus with log-spaced amplitudes: the potential
  // density steps through ~2.5x decrements from ~1 down to 1/amp_max^2, so
  // the scan thresholds of every b find probes near their trigger boundary.
  // Kinetic energy is confined to the short ramps between plateaus;
  // eigenvalues stay >= 1, so nothing is stiff.
  SymmetricMatrixField f(dom, 2);
  const double P = dom.period();
  const int levels = 9;
  const int segments = levels + 1;  // last segment ramps back down to level 0
  const double seg = P / segments;
  const double plateau_frac = 0.6;
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    const double x1 = dom.coordinate(s, 0);
    const int k = std::min(static_cast<int>(x1 / seg), segments - 1);
    const double frac = (x1 - k * seg) / seg;
    double level;
    if (k == segments - 1) {
      // descent ramp back to the base level
      level = (levels - 1) * (1.0 - frac);
    } else if (frac <= plateau_frac) {
      level = k;
    } else {
      const double u = (frac - plateau_frac) / (1.0 - plateau_frac);
      level = k + 0.5 * (1.0 - std::cos(M_PI * u));
    }
    const double amp = std::pow(amp_max, level / (levels - 1));
    auto t = f.tri(s);
    t[0] = amp;
    t[1] = 0.0;
    t[2] = -amp;
  }
  return f;
}

FlowScenario scan_scenario(int m, double t_end) {
  // The flow horizon is kept short: the transition ring carries kinetic energy
  // ~ |d amp|^2, and a longer heat flow would smear it across the plateau
  // whose potential density the small-b scans need intact.
  const int n = m == 2 ? 64 : 32;
  const LatticeDomain dom(m, n, 8.0);
  FlowScenario sc{striped_amplitude_field(dom, 40.0), FlowConfig{}};
  sc.flow.dt_policy = DtPolicy::fixed(2e-3);
  sc.flow.t_end = t_end > 0.0 ? t_end : 0.03;
  sc.flow.snapshot_stride = 3;
  sc.flow.integrator = Integrator::SpectralImex;
  return sc;
}

FlowScenario sweep_scenario(double t_end) {
  const LatticeDomain dom(2, 48, 4.0);
  FlowScenario sc{grassmannian_winding_field(dom, 2, 1, {1, 0}, 4242ull, 0.3), FlowConfig{}};
  sc.flow.dt_policy = DtPolicy::fixed(0.05);
  sc.flow.t_end = t_end > 0.0 ? t_end : 25.0;
  sc.flow.snapshot_stride = 50;
  sc.flow.integrator = Integrator::SpectralImex;
  return sc;
}

FlowScenario sup_e_scenario(double t_end) {
  const LatticeDomain dom(3, 24, 8.0);
  FlowScenario sc{grassmannian_winding_field(dom, 2, 1, {1, 0, 0}, 99ull, 0.3), FlowConfig{}};
  sc.flow.dt_policy = DtPolicy::fixed(0.1);
  sc.flow.t_end = t_end > 0.0 ? t_end : 30.0;
  sc.flow.snapshot_stride = 50;
  sc.flow.integrator = Integrator::SpectralImex;
  return sc;
}

}  // namespace sgf
