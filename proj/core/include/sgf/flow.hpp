#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "sgf/potentials.hpp"

namespace sgf {

enum class Integrator {
  ExplicitEuler,
  SpectralImex,  // exact diffusion in Fourier space, explicit potential
};

struct DtPolicy {
  enum class Kind { Fixed, Adaptive } kind = Kind::Adaptive;
  double dt = 0.0;       // for Fixed
  double safety = 0.9;   // for Adaptive

  static DtPolicy fixed(double dt) { return {Kind::Fixed, dt, 0.9}; }
  static DtPolicy adaptive(double safety = 0.9) { return {Kind::Adaptive, 0.0, safety}; }
};

struct FlowConfig {
  DtPolicy dt_policy = DtPolicy::adaptive();
  double t_end = 1.0;
  int snapshot_stride = 10;          // in steps; t = 0 is always captured
  Integrator integrator = Integrator::SpectralImex;
  bool potential_off = false;        // evolve the pure heat flow (W == 0)
};

struct DivergenceInfo {
  long step = 0;
  double t = 0.0;
  double sup_e = 0.0;
  std::int64_t site = 0;         // offending site
  double min_abs_eigenvalue = 0.0;
};

// Flow history: snapshots plus the per-step scalar series. Series entry k
// describes step k (state after the step); dE_dt is the discrete
// (E_{k+1}-E_k)/dt and `dissipation` is sum |f_{k+1}-f_k|^2 h^m / dt^2,
// so dE_dt ~ -dissipation is the energy identity being monitored.
struct Trajectory {
  std::vector<SymmetricMatrixField> snapshots;
  std::vector<double> snapshot_times;

  std::vector<double> t;
  std::vector<double> energy;
  std::vector<double> kinetic;
  std::vector<double> potential;
  std::vector<double> sup_e;
  std::vector<double> residual;
  std::vector<double> dE_dt;
  std::vector<double> dissipation;

  double initial_energy = 0.0;
  std::optional<DivergenceInfo> divergence;
  bool diverged() const { return divergence.has_value(); }
};

// Per-site |d*df + grad W(f)|_HS and its lattice L2 norm
// sqrt(sum |.|^2 h^m); zero characterizes discrete stationary points.
std::pair<ScalarField, double> elliptic_residual(const PotentialSpec& spec,
                                                 const SymmetricMatrixField& f);

// Largest dt the explicit machinery tolerates from global bounds:
// 0.9 * min(h^2/(2m), 1/uniform_hessian_bound); SpectralImex drops the
// diffusion limit. The singular family has no global bound (ConfigError).
double stable_dt(const PotentialSpec& spec, const SymmetricMatrixField& f,
                 Integrator integrator);

// Field-aware step size: like stable_dt but with the potential stiffness
// taken as the maximum |w''| over the spectrum actually present. Works for
// the singular family as long as the spectrum stays away from zero.
double adaptive_dt(const PotentialSpec& spec, const SymmetricMatrixField& f,
                   Integrator integrator, double safety = 0.9);

// One time step of  df/dt = -d*df - grad W(f).  Throws DivergenceError on
// non-finite output. Symmetry is preserved exactly (triangle storage).
SymmetricMatrixField step(const SymmetricMatrixField& f, const PotentialSpec& spec, double dt,
                          Integrator integrator, bool potential_off = false);

// Integrates to t_end with dissipation bookkeeping. Divergence (including
// singular-family collapse) is captured in the returned trajectory, not thrown.
Trajectory run_flow(const SymmetricMatrixField& initial, const PotentialSpec& spec,
                    const FlowConfig& config);

// Main run followed by polish phases with successively smaller steps until
// the elliptic residual drops below rel * E (the splitting map's fixed point
// sits O(dt^2) away from the stationary state, so shrinking dt converges it).
// Snapshots and series of the phases are concatenated on a common time axis.
Trajectory run_to_near_stationarity(const SymmetricMatrixField& initial,
                                    const PotentialSpec& spec, const FlowConfig& config,
                                    double rel = 5e-4, int max_phases = 3);

struct DissipationReport {
  std::vector<double> mismatch;  // per step: |dE/dt + D| / max(D, floor)
  double worst = 0.0;
};
DissipationReport dissipation_report(const Trajectory& traj);

// Reusable spectral diffusion operator exp(-dt d*d) on one domain; the symbol
// is the second-difference one, (2/h^2)(1 - cos(2 pi k / n)) summed over axes,
// so the W == 0 flow matches the discrete heat semigroup exactly.
class SpectralDiffusion {
 public:
  explicit SpectralDiffusion(const LatticeDomain& dom);
  ~SpectralDiffusion();
  SpectralDiffusion(const SpectralDiffusion&) = delete;
  SpectralDiffusion& operator=(const SpectralDiffusion&) = delete;

  // In place: every triangle channel of `f` multiplied by exp(-mu_k dt) in
  // Fourier space.
  void apply(SymmetricMatrixField& f, double dt);

  const std::vector<double>& symbol() const;  // mu_k, row-major over modes

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sgf
