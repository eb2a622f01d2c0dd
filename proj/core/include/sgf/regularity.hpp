#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgf/monotonicity.hpp"

namespace sgf {

struct BoundCheck {
  std::string claim;
  double lhs = 0.0;   // measured sup
  double rhs = 0.0;   // bound value
  double ratio = 0.0; // lhs / rhs (0 when both vanish)
  bool pass = true;   // ratio <= 1
  double C0 = 0.0, C1 = 0.0, C2 = 0.0, delta = 0.0, R = 0.0;
};

// sup_{B_dR} e  <=  (C1 C0 + C2 / ((1-d) R)^2)^(m/2) * int_{B_R} e.
// delta = 0 checks the single-point estimate at the center.
BoundCheck moser_elliptic_check(const ScalarField& e, double C0, std::int64_t x0, double R,
                                double delta, double C1, double C2);

// Parabolic analogue with exponent (m+2)/2 and space-time quadrature over the
// snapshot series clipped to P_R(z0).
BoundCheck moser_parabolic_check(const TrajectoryEnergy& energy, double C0, std::int64_t x0,
                                 double t0, double R, double delta, double C1, double C2);

struct HProfilePoint {
  double sigma = 0.0;
  double h = 0.0;  // (R1 - sigma)^(2-p0) sup_{B_sigma} e
};
struct HProfile {
  std::vector<HProfilePoint> points;
  double sigma0 = 0.0;      // argmax sigma
  std::int64_t x1 = 0;      // site where e attains its sup over B_{sigma0}
  double e0 = 0.0;          // e(x1)
};
// Requires sigma in [0, R1) and R1 <= (3/4) R_M; sigma = 0 means the center.
HProfile h_profile(const ScalarField& e, std::int64_t x0, double R1, double p0,
                   const std::vector<double>& sigmas);

struct Epsilon0Rule {
  enum class Kind { Explicit, Calibrated } kind = Kind::Calibrated;
  double value = 0.0;  // Explicit
  double C_cal = 1.0;  // Calibrated: eps0 = b^(1/L) / (2 C_cal)

  static Epsilon0Rule fixed_value(double v) { return {Kind::Explicit, v, 1.0}; }
  static Epsilon0Rule calibrated(double C) { return {Kind::Calibrated, 0.0, C}; }
  double eps0(const PotentialSpec& spec) const;
};

struct EpsProbe {
  std::int64_t center = 0;
  double t0 = 0.0;       // parabolic probes only
  double R = 0.0;
  double functional = 0.0;  // Phi (elliptic, ChapterEps weighting) or Psi
  bool triggered = false;
  double sup_e = 0.0;           // over B_{delta R} resp. P_{delta R}
  double implied_const = 0.0;   // sup * (delta R)^(2-p0) / b^(1/L)  (2-2nu0 parabolic)
  double fixed_sigma_const = 0.0;  // elliptic: sup_{B_{R/2}} e * R^m / int_{B_R}(1+nu) e
};

struct EpsRegReport {
  std::vector<EpsProbe> probes;
  double eps0 = 0.0;
  double delta = 0.0;
  double exponent_shift = 0.0;  // p0 (elliptic) or nu0 (parabolic)
  std::int64_t trigger_count = 0;
  double max_implied_const = 0.0;
  double max_fixed_sigma_const = 0.0;
  bool empty_trigger_set() const { return trigger_count == 0; }
};

EpsRegReport epsilon_scan_elliptic(const PotentialSpec& spec, const SymmetricMatrixField& f,
                                   double delta, const Epsilon0Rule& rule,
                                   const std::vector<double>& radii, const SiteSet& centers,
                                   double p0);

EpsRegReport epsilon_scan_parabolic(const PotentialSpec& spec, const Trajectory& traj,
                                    double delta, const Epsilon0Rule& rule,
                                    const std::vector<double>& radii, const SiteSet& centers,
                                    const std::vector<double>& t0_list, double nu0);

// Sigma_b = { x : e(x) >= 1/b }.
SiteSet bad_set(const ScalarField& e, double b);

struct CoverReport {
  double r = 0.0;
  double dimension = 0.0;
  std::vector<std::int64_t> centers;  // pairwise distance > 2r, deterministic greedy
  std::int64_t J = 0;
  bool covered = false;  // every input site within 3r of a center
  double measure = 0.0;  // J * (3r)^dimension
};

// Greedy Vitali cover in ascending site order. Coverage failure is an internal
// invariant violation and throws.
CoverReport vitali_cover(const LatticeDomain& dom, const SiteSet& sites, double r,
                         double dimension);

// Initial data plus flow settings reused across b sweeps.
struct FlowScenario {
  SymmetricMatrixField initial;
  FlowConfig flow;
};

// Endpoint gate for the elliptic theorems: residual L2 norm <= rel * E.
bool near_stationary(const PotentialSpec& spec, const SymmetricMatrixField& f,
                     double rel = 1e-3);

struct HausdorffRow {
  double b = 0.0;
  double r = 0.0;
  std::int64_t J = 0;
  double H = 0.0;
  double E0 = 0.0;
  double ratio = 0.0;
  bool stationary = false;
  std::int64_t bad_sites = 0;
};
struct HausdorffSweep {
  double dimension = 0.0;
  std::vector<HausdorffRow> rows;
};

// For each b (descending): run the scenario with W_b (or W_b^L), extract the
// endpoint bad set, cover it with radius r = 2 sqrt(4 c_cal b^(1+1/L)), and
// tabulate H = J (3r)^d against E(f_0). d = m-1 for L = 1, else
// 2/(L+1) + (m-2).
HausdorffSweep hausdorff_sweep(int l, int L, const FlowScenario& scenario,
                               const std::vector<double>& b_list, double c_cal);

struct SupERow {
  double b = 0.0;
  double sup_e = 0.0;
  double E_b = 0.0;
  double bound1 = 0.0;  //  C b^-m E_b
  double bound2 = 0.0;  //  C E_b^(2m/(2m-2)) b^(-(2m-1)/(m-1))
  bool pass = false;    // sup_e <= min(bound1, bound2)
  bool stationary = false;
};
struct SupESweep {
  std::vector<SupERow> rows;
  double fitted_slope = 0.0;  // log-log slope of sup_e against b
  double C_required = 0.0;    // smallest C making every row pass
};

// Smoothed-family sup-bound sweep with a single constant C across all b.
SupESweep sup_e_bound_sweep(int l, const FlowScenario& scenario,
                            const std::vector<double>& b_list, double C);

}  // namespace sgf
