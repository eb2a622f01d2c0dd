#include "sgf/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgf {

namespace {

double ball_max(const ScalarField& e, const SiteSet& ball) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::int64_t s : ball) m = std::max(m, e[s]);
  return m;
}

double ball_integral(const ScalarField& e, const SiteSet& ball) {
  double acc = 0.0;
  for (std::int64_t s : ball) acc += e[s];
  return acc * e.domain.cell_volume();
}

}  // namespace

BoundCheck moser_elliptic_check(const ScalarField& e, double C0, std::int64_t x0, double R,
                                double delta, double C1, double C2) {
  const LatticeDomain& dom = e.domain;
  if (delta < 0.0 || delta >= 1.0) throw ConfigError("delta must lie in [0, 1)");
  if (!(R > 0.0) || R >= dom.cutoff_radius())
    throw DomainError("moser radius must satisfy 0 < R < R_M");

  BoundCheck bc;
  bc.claim = "moser_elliptic";
  bc.C0 = C0;
  bc.C1 = C1;
  bc.C2 = C2;
  bc.delta = delta;
  bc.R = R;

  bc.lhs = delta == 0.0 ? e[x0] : ball_max(e, dom.ball_sites(x0, delta * R));
  const double shrink = (1.0 - delta) * R;
  bc.rhs = std::pow(C1 * C0 + C2 / (shrink * shrink), 0.5 * dom.dim()) *
           ball_integral(e, dom.ball_sites(x0, R));
  bc.ratio = bc.rhs > 0.0 ? bc.lhs / bc.rhs : (bc.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  bc.pass = bc.ratio <= 1.0;
  return bc;
}

namespace {

// Trapezoidal time quadrature of per-snapshot ball integrals over
// [t0 - R^2, t0 + R^2], clipped to the stored range.
double cylinder_integral(const TrajectoryEnergy& energy, const SiteSet& ball, std::int64_t,
                         double t0, double R) {
  const std::vector<double>& times = energy.times();
  const double lo = t0 - R * R, hi = t0 + R * R;
  std::vector<double> nodes;
  for (double t : times)
    if (t >= lo - 1e-12 && t <= hi + 1e-12) nodes.push_back(t);
  if (nodes.empty()) throw EmptyWindowError("no snapshots in the moser cylinder");
  if (nodes.size() == 1) {
    // Degenerate window: treat the single slice as constant over the window.
    const ScalarField e = energy.at_time(nodes.front());
    return ball_integral(e, ball) * (hi - lo);
  }
  double acc = 0.0;
  double prev = ball_integral(energy.at_time(nodes.front()), ball);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double cur = ball_integral(energy.at_time(nodes[i]), ball);
    acc += 0.5 * (cur + prev) * (nodes[i] - nodes[i - 1]);
    prev = cur;
  }
  return acc;
}

double cylinder_max(const TrajectoryEnergy& energy, const SiteSet& ball, double t0, double R) {
  const std::vector<double>& times = energy.times();
  const double lo = t0 - R * R, hi = t0 + R * R;
  double m = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < lo - 1e-12 || times[i] > hi + 1e-12) continue;
    any = true;
    m = std::max(m, ball_max(energy.at(i), ball));
  }
  if (!any) throw EmptyWindowError("no snapshots in the moser cylinder");
  return m;
}

}  // namespace

BoundCheck moser_parabolic_check(const TrajectoryEnergy& energy, double C0, std::int64_t x0,
                                 double t0, double R, double delta, double C1, double C2) {
  const LatticeDomain& dom = energy.domain();
  if (delta < 0.0 || delta >= 1.0) throw ConfigError("delta must lie in [0, 1)");
  if (!(R > 0.0) || R >= dom.cutoff_radius())
    throw DomainError("moser radius must satisfy 0 < R < R_M");

  BoundCheck bc;
  bc.claim = "moser_parabolic";
  bc.C0 = C0;
  bc.C1 = C1;
  bc.C2 = C2;
  bc.delta = delta;
  bc.R = R;

  if (delta == 0.0) {
    const ScalarField e = energy.at_time(t0);
    bc.lhs = e[x0];
  } else {
    bc.lhs = cylinder_max(energy, dom.ball_sites(x0, delta * R), t0, delta * R);
  }
  const double shrink = (1.0 - delta) * R;
  bc.rhs = std::pow(C1 * C0 + C2 / (shrink * shrink), 0.5 * (dom.dim() + 2)) *
           cylinder_integral(energy, dom.ball_sites(x0, R), x0, t0, R);
  bc.ratio = bc.rhs > 0.0 ? bc.lhs / bc.rhs : (bc.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  bc.pass = bc.ratio <= 1.0;
  return bc;
}

HProfile h_profile(const ScalarField& e, std::int64_t x0, double R1, double p0,
                   const std::vector<double>& sigmas) {
  const LatticeDomain& dom = e.domain;
  if (!(R1 > 0.0) || R1 > 0.75 * dom.cutoff_radius() + 1e-12)
    throw DomainError("h profile requires 0 < R1 <= (3/4) R_M");
  HProfile prof;
  double best = -std::numeric_limits<double>::infinity();
  for (double sigma : sigmas) {
    if (sigma < 0.0 || sigma >= R1) throw DomainError("sigma samples must lie in [0, R1)");
    double sup;
    std::int64_t arg = x0;
    if (sigma == 0.0) {
      sup = e[x0];
    } else {
      const SiteSet ball = dom.ball_sites(x0, sigma);
      sup = -std::numeric_limits<double>::infinity();
      for (std::int64_t s : ball)
        if (e[s] > sup) {
          sup = e[s];
          arg = s;
        }
    }
    const double value = std::pow(R1 - sigma, 2.0 - p0) * sup;
    prof.points.push_back({sigma, value});
    if (value > best) {
      best = value;
      prof.sigma0 = sigma;
      prof.x1 = arg;
      prof.e0 = sup;
    }
  }
  return prof;
}

double Epsilon0Rule::eps0(const PotentialSpec& spec) const {
  if (kind == Kind::Explicit) return value;
  return spec.b_pow_inv_L() / (2.0 * C_cal);
}

EpsRegReport epsilon_scan_elliptic(const PotentialSpec& spec, const SymmetricMatrixField& f,
                                   double delta, const Epsilon0Rule& rule,
                                   const std::vector<double>& radii, const SiteSet& centers,
                                   double p0) {
  if (!(delta > 0.0) || delta > 0.75 + 1e-12)
    throw ConfigError("elliptic scan requires 0 < delta <= 3/4");
  const LatticeDomain& dom = f.domain();
  const EnergySplit split = split_energy(spec, f);
  const double scale = spec.family == PotentialFamily::Singular ? 1.0 : spec.b_pow_inv_L();

  EpsRegReport rep;
  rep.eps0 = rule.eps0(spec);
  rep.delta = delta;
  rep.exponent_shift = p0;

  for (std::int64_t x0 : centers) {
    for (double R : radii) {
      EpsProbe probe;
      probe.center = x0;
      probe.R = R;
      probe.functional = elliptic_phi(split, x0, R, p0, PhiWeighting::ChapterEps);
      probe.triggered = probe.functional <= rep.eps0;
      if (probe.triggered) {
        const double dR = delta * R;
        const SiteSet small = dom.ball_sites(x0, dR);
        probe.sup_e = ball_max(split.e, small);
        probe.implied_const = probe.sup_e * std::pow(dR, 2.0 - p0) / scale;
        // Fixed-sigma variant: sup over B_{R/2} against R^-m int (1+nu) e.
        const double weighted_integral =
            probe.functional * std::pow(R, dom.dim() - 2.0 + p0);
        const double sup_half = ball_max(split.e, dom.ball_sites(x0, R / 2.0));
        probe.fixed_sigma_const =
            weighted_integral > 0.0
                ? sup_half * std::pow(R, dom.dim()) / weighted_integral
                : 0.0;
        ++rep.trigger_count;
        rep.max_implied_const = std::max(rep.max_implied_const, probe.implied_const);
        rep.max_fixed_sigma_const =
            std::max(rep.max_fixed_sigma_const, probe.fixed_sigma_const);
      }
      rep.probes.push_back(probe);
    }
  }
  return rep;
}

EpsRegReport epsilon_scan_parabolic(const PotentialSpec& spec, const Trajectory& traj,
                                    double delta, const Epsilon0Rule& rule,
                                    const std::vector<double>& radii, const SiteSet& centers,
                                    const std::vector<double>& t0_list, double nu0) {
  if (!(delta > 0.0) || delta >= 1.0) throw ConfigError("parabolic scan requires 0 < delta < 1");
  const TrajectoryEnergy energy(spec, traj);
  const LatticeDomain& dom = energy.domain();
  const double scale = spec.family == PotentialFamily::Singular ? 1.0 : spec.b_pow_inv_L();

  EpsRegReport rep;
  rep.eps0 = rule.eps0(spec);
  rep.delta = delta;
  rep.exponent_shift = nu0;

  for (double t0 : t0_list) {
    for (std::int64_t x0 : centers) {
      for (double R : radii) {
        EpsProbe probe;
        probe.center = x0;
        probe.t0 = t0;
        probe.R = R;
        probe.functional = parabolic_psi(energy, x0, t0, R, nu0).value;
        probe.triggered = probe.functional <= rep.eps0;
        if (probe.triggered) {
          const double dR = delta * R;
          probe.sup_e = cylinder_max(energy, dom.ball_sites(x0, dR), t0, dR);
          probe.implied_const = probe.sup_e * std::pow(dR, 2.0 - 2.0 * nu0) / scale;
          ++rep.trigger_count;
          rep.max_implied_const = std::max(rep.max_implied_const, probe.implied_const);
        }
        rep.probes.push_back(probe);
      }
    }
  }
  return rep;
}

SiteSet bad_set(const ScalarField& e, double b) {
  if (!(b > 0.0)) throw ConfigError("bad set threshold parameter b must be positive");
  SiteSet out;
  const double threshold = 1.0 / b;
  for (std::int64_t s = 0; s < e.domain.site_count(); ++s)
    if (e[s] >= threshold) out.sites.push_back(s);
  return out;
}

CoverReport vitali_cover(const LatticeDomain& dom, const SiteSet& sites, double r,
                         double dimension) {
  if (!(r > 0.0)) throw ConfigError("cover radius must be positive");
  CoverReport rep;
  rep.r = r;
  rep.dimension = dimension;
  for (std::int64_t s : sites) {
    bool separated = true;
    for (std::int64_t c : rep.centers) {
      if (dom.periodic_distance(s, c) <= 2.0 * r) {
        separated = false;
        break;
      }
    }
    if (separated) rep.centers.push_back(s);
  }
  rep.J = static_cast<std::int64_t>(rep.centers.size());
  rep.covered = true;
  for (std::int64_t s : sites) {
    bool inside = false;
    for (std::int64_t c : rep.centers) {
      if (dom.periodic_distance(s, c) <= 3.0 * r) {
        inside = true;
        break;
      }
    }
    if (!inside) {
      rep.covered = false;
      break;
    }
  }
  if (!sites.empty() && !rep.covered)
    throw Error("internal invariant violation: greedy Vitali cover left a site uncovered");
  rep.measure = rep.J * std::pow(3.0 * r, dimension);
  return rep;
}

bool near_stationary(const PotentialSpec& spec, const SymmetricMatrixField& f, double rel) {
  const auto [res_field, res_norm] = elliptic_residual(spec, f);
  (void)res_field;
  return res_norm <= rel * total_energy(spec, f).total;
}

HausdorffSweep hausdorff_sweep(int l, int L, const FlowScenario& scenario,
                               const std::vector<double>& b_list, double c_cal) {
  if (b_list.empty()) throw ConfigError("b list must be nonempty");
  for (std::size_t i = 0; i + 1 < b_list.size(); ++i)
    if (!(b_list[i] > b_list[i + 1])) throw ConfigError("b list must be descending");

  const LatticeDomain& dom = scenario.initial.domain();
  HausdorffSweep sweep;
  sweep.dimension = L == 1 ? dom.dim() - 1.0 : 2.0 / (L + 1) + (dom.dim() - 2.0);

  for (double b : b_list) {
    const PotentialSpec spec =
        L == 1 ? PotentialSpec::smoothed(l, b) : PotentialSpec::higher_power(l, b, L);
    const Trajectory traj = run_to_near_stationarity(scenario.initial, spec, scenario.flow);
    const SymmetricMatrixField& endpoint = traj.snapshots.back();

    HausdorffRow row;
    row.b = b;
    row.stationary = !traj.diverged() && near_stationary(spec, endpoint);
    row.E0 = traj.initial_energy;
    row.r = 2.0 * std::sqrt(4.0 * c_cal * std::pow(b, 1.0 + 1.0 / L));
    const ScalarField e = energy_density(spec, endpoint);
    const SiteSet sigma_b = bad_set(e, b);
    row.bad_sites = static_cast<std::int64_t>(sigma_b.size());
    if (!sigma_b.empty()) {
      const CoverReport cover = vitali_cover(dom, sigma_b, row.r, sweep.dimension);
      row.J = cover.J;
      row.H = cover.measure;
    }
    row.ratio = row.E0 > 0.0 ? row.H / row.E0 : 0.0;
    sweep.rows.push_back(row);
  }
  return sweep;
}

SupESweep sup_e_bound_sweep(int l, const FlowScenario& scenario,
                            const std::vector<double>& b_list, double C) {
  if (b_list.empty()) throw ConfigError("b list must be nonempty");
  const int m = scenario.initial.domain().dim();
  SupESweep sweep;
  sweep.C_required = 0.0;

  std::vector<double> log_b, log_sup;
  for (double b : b_list) {
    const PotentialSpec spec = PotentialSpec::smoothed(l, b);
    const Trajectory traj = run_to_near_stationarity(scenario.initial, spec, scenario.flow);
    const SymmetricMatrixField& endpoint = traj.snapshots.back();
    const EnergyReport rep = total_energy(spec, endpoint);

    SupERow row;
    row.b = b;
    row.sup_e = rep.sup_e;
    row.E_b = rep.total;
    row.stationary = !traj.diverged() && near_stationary(spec, endpoint);
    row.bound1 = C * std::pow(b, -m) * row.E_b;
    row.bound2 = C * std::pow(row.E_b, 2.0 * m / (2.0 * m - 2.0)) *
                 std::pow(b, -(2.0 * m - 1.0) / (m - 1.0));
    row.pass = row.sup_e <= std::min(row.bound1, row.bound2);
    const double unit_bound = std::min(row.bound1, row.bound2) / C;
    if (unit_bound > 0.0) sweep.C_required = std::max(sweep.C_required, row.sup_e / unit_bound);
    sweep.rows.push_back(row);
    log_b.push_back(std::log(b));
    log_sup.push_back(std::log(std::max(row.sup_e, 1e-300)));
  }

  // Least-squares slope of log sup_e against log b.
  const std::size_t n = log_b.size();
  if (n >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx += log_b[i], my += log_sup[i];
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxy += (log_b[i] - mx) * (log_sup[i] - my);
      sxx += (log_b[i] - mx) * (log_b[i] - mx);
    }
    sweep.fitted_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return sweep;
}

}  // namespace sgf
