#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sgf/flow.hpp"
#include "sgf/potentials.hpp"

namespace sgf {

// Precomputed per-field quantities shared by the shell-ratio and scan code:
// spatial gradient, potential density w, and energy density e = kin + w.
struct EnergySplit {
  GradientField grad;
  ScalarField w;
  ScalarField e;
};
EnergySplit split_energy(const PotentialSpec& spec, const SymmetricMatrixField& f);

// Shell ratios over the width-h annulus standing in for S_R(x):
//   mu = int |f_r|^2 / int e,   nu = int W / int e,
// with f_r the radial derivative toward the (periodic) displacement from x.
// Throws UndefinedRatioError on an empty shell or vanishing denominator.
double mu_ratio(const PotentialSpec& spec, const SymmetricMatrixField& f, std::int64_t x,
                double R);
double nu_ratio(const PotentialSpec& spec, const SymmetricMatrixField& f, std::int64_t x,
                double R);
double mu_ratio(const EnergySplit& split, std::int64_t x, double R);
double nu_ratio(const EnergySplit& split, std::int64_t x, double R);

struct RatioProfile {
  std::int64_t center = 0;
  double rho = 0.0;
  std::vector<double> radii;  // the radii that produced valid shells
  std::vector<double> mu;
  std::vector<double> nu;
  double mu_x = 0.0;  // inf over radii <= rho
  double nu_x = 0.0;
};
RatioProfile ratio_profile(const EnergySplit& split, std::int64_t center, double rho);

struct InfimumRatios {
  double mu0 = 0.0;
  double nu0 = 0.0;
  double p0 = 0.0;
};

// Infima over the region of the per-center infima at scale rho, and
// p0 = (2 nu0 + (m-2) mu0) / (1 - mu0). Requires mu0 < 1 (DomainError) and at
// least 3 valid shells per center (CoverageError).
InfimumRatios infimum_ratios(const PotentialSpec& spec, const SymmetricMatrixField& f,
                             const SiteSet& region, double rho);

enum class PhiWeighting {
  ChapterMono,  // integrand (1/2)|df|^2 + m/(m-2) W; requires m > 2
  ChapterEps,   // integrand (1 + nu(r, x)) e with nu evaluated per width-h annulus
};

// Elliptic monotonicity functional Phi(R, x) = R^(2-m-p0) * ball integral of
// the chosen integrand (the e^{CR} factor is 1 on the flat torus).
double elliptic_phi(const PotentialSpec& spec, const SymmetricMatrixField& f, std::int64_t x,
                    double R, double p0, PhiWeighting weighting);
double elliptic_phi(const EnergySplit& split, std::int64_t x, double R, double p0,
                    PhiWeighting weighting);

struct MonotonicityVerdict {
  std::string functional;
  std::vector<double> sample_points;
  std::vector<double> values;
  double max_violation = 0.0;  // signed; pass iff <= tolerance
  double tolerance = 0.0;
  bool pass = true;
  double min_chat = 0.0;  // psi verdicts: minimal C-hat making the bound hold at c = 0
};

// Checks Phi nondecreasing over ascending radii up to a relative slack.
MonotonicityVerdict phi_monotonicity_verdict(const PotentialSpec& spec,
                                             const SymmetricMatrixField& f, std::int64_t x,
                                             const std::vector<double>& radii, double p0,
                                             double slack, PhiWeighting weighting);

// G_(x0,t0)(x,t) = (4 pi (t0-t))^(-m/2) exp(-d(x,x0)^2 / (4 (t0-t))), t < t0.
double backward_gaussian(const LatticeDomain& dom, std::int64_t x0, double t0, std::int64_t x,
                         double t);

// Radial C^1 bump: 1 on [0, R_M/2], 0 on [R_M, inf), monotone cubic between;
// |phi'| <= 4/R_M.
double cutoff_phi(const LatticeDomain& dom, std::int64_t x0, std::int64_t x);

// Energy densities along a trajectory, one ScalarField per snapshot, with
// linear interpolation between snapshots for off-snapshot times.
class TrajectoryEnergy {
 public:
  TrajectoryEnergy(const PotentialSpec& spec, const Trajectory& traj);

  const LatticeDomain& domain() const { return fields_.front().domain; }
  const std::vector<double>& times() const { return times_; }
  const ScalarField& at(std::size_t i) const { return fields_[i]; }
  double median_spacing() const { return median_spacing_; }
  double initial_energy() const { return initial_energy_; }

  // e at time t; interpolates when the bracketing gap is < 2 * median snapshot
  // spacing, otherwise throws EmptyWindowError.
  ScalarField at_time(double t) const;

 private:
  std::vector<double> times_;
  std::vector<ScalarField> fields_;
  double median_spacing_ = 0.0;
  double initial_energy_ = 0.0;
};

// phi(R) with R = sqrt(t0-t):  (t0-t)^(1-nu0) sum_x G e phi^2 h^m.
double parabolic_small_phi(const PotentialSpec& spec, const Trajectory& traj, std::int64_t x0,
                           double t0, double t, double nu0);
double parabolic_small_phi(const TrajectoryEnergy& energy, std::int64_t x0, double t0, double t,
                           double nu0);

struct PsiValue {
  double value = 0.0;
  double coverage = 1.0;  // fraction of the strip spanned by snapshots
  bool low_coverage = false;
};

// Psi(R, z0) = int_{t0-4R^2}^{t0-R^2} (t0-t)^(-nu0) [sum_x G e phi^2 h^m] dt,
// trapezoidal over stored snapshots clipped to the strip.
PsiValue parabolic_psi(const PotentialSpec& spec, const Trajectory& traj, std::int64_t x0,
                       double t0, double R, double nu0);
PsiValue parabolic_psi(const TrajectoryEnergy& energy, std::int64_t x0, double t0, double R,
                       double nu0);

// Checks Psi(R) <= exp(c (R0^2-R^2)) Psi(R0) + Chat E0 (R0^2-R^2) and records
// the minimal Chat that would make it hold at c = 0.
MonotonicityVerdict psi_inequality_verdict(const TrajectoryEnergy& energy, std::int64_t x0,
                                           double t0, double R, double R0, double nu0, double E0,
                                           double c, double chat);

// Recentred-Gaussian lower bound: for z = (x, t) in P_rho(z1), returns
// (G_(x1, t1+2 rho^2)(z), (12 pi)^(-m/2) e^(-1/4) rho^(-m)); lhs >= rhs.
std::pair<double, double> gaussian_recentred_lower_bound_check(const LatticeDomain& dom,
                                                               std::int64_t x1, double t1,
                                                               double rho, std::int64_t x,
                                                               double t);

}  // namespace sgf
