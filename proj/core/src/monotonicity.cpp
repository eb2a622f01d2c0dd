#include "sgf/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgf {

EnergySplit split_energy(const PotentialSpec& spec, const SymmetricMatrixField& f) {
  GradientField grad = spatial_gradient(f);
  ScalarField w = potential_density(spec, f);
  ScalarField e(f.domain(), "energy_density");
  for (std::int64_t s = 0; s < f.domain().site_count(); ++s)
    e[s] = 0.5 * grad.df_norm_sq(s) + w[s];
  return {std::move(grad), std::move(w), std::move(e)};
}

namespace {

// |f_r|^2 at site y relative to center x: radial derivative along the
// periodic displacement, zero by convention at the center itself.
double radial_derivative_sq(const EnergySplit& split, std::int64_t x, std::int64_t y) {
  const LatticeDomain& dom = split.grad.domain();
  const auto d = dom.displacement(x, y);
  double len_sq = 0.0;
  for (int a = 0; a < dom.dim(); ++a) len_sq += d[a] * d[a];
  if (len_sq == 0.0) return 0.0;
  const double inv_len = 1.0 / std::sqrt(len_sq);
  const int l = split.grad.matrix_size();
  const int tri = split.grad.tri_size();
  std::vector<double> fr(static_cast<std::size_t>(tri), 0.0);
  for (int a = 0; a < dom.dim(); ++a) {
    if (d[a] == 0.0) continue;
    const double coef = d[a] * inv_len;
    const auto g = split.grad.tri(y, a);
    for (int i = 0; i < tri; ++i) fr[static_cast<std::size_t>(i)] += coef * g[i];
  }
  return tri_hs_norm_sq(std::span<const double>(fr.data(), fr.size()), l);
}

struct ShellSums {
  double radial = 0.0;
  double w = 0.0;
  double e = 0.0;
  bool empty = true;
};

ShellSums shell_sums(const EnergySplit& split, std::int64_t x, double R) {
  const LatticeDomain& dom = split.grad.domain();
  const SiteSet shell = dom.shell_sites(x, R, dom.spacing());
  ShellSums s;
  s.empty = shell.empty();
  for (std::int64_t y : shell) {
    s.radial += radial_derivative_sq(split, x, y);
    s.w += split.w[y];
    s.e += split.e[y];
  }
  return s;
}

}  // namespace

double mu_ratio(const EnergySplit& split, std::int64_t x, double R) {
  const ShellSums s = shell_sums(split, x, R);
  if (s.empty) throw UndefinedRatioError("empty shell at R = " + std::to_string(R));
  if (!(s.e > 0.0)) throw UndefinedRatioError("vanishing shell energy at R = " + std::to_string(R));
  return s.radial / s.e;
}

double nu_ratio(const EnergySplit& split, std::int64_t x, double R) {
  const ShellSums s = shell_sums(split, x, R);
  if (s.empty) throw UndefinedRatioError("empty shell at R = " + std::to_string(R));
  if (!(s.e > 0.0)) throw UndefinedRatioError("vanishing shell energy at R = " + std::to_string(R));
  return s.w / s.e;
}

double mu_ratio(const PotentialSpec& spec, const SymmetricMatrixField& f, std::int64_t x,
                double R) {
  return mu_ratio(split_energy(spec, f), x, R);
}

double nu_ratio(const PotentialSpec& spec, const SymmetricMatrixField& f, std::int64_t x,
                double R) {
  return nu_ratio(split_energy(spec, f), x, R);
}

RatioProfile ratio_profile(const EnergySplit& split, std::int64_t center, double rho) {
  const LatticeDomain& dom = split.grad.domain();
  RatioProfile prof;
  prof.center = center;
  prof.rho = rho;
  prof.mu_x = std::numeric_limits<double>::infinity();
  prof.nu_x = std::numeric_limits<double>::infinity();
  const double h = dom.spacing();
  for (int j = 1; j * h <= rho + 1e-12 * rho; ++j) {
    const double R = j * h;
    if (R + h / 2.0 >= dom.period() / 2.0) break;
    ShellSums s = shell_sums(split, center, R);
    if (s.empty || !(s.e > 0.0)) continue;
    prof.radii.push_back(R);
    prof.mu.push_back(s.radial / s.e);
    prof.nu.push_back(s.w / s.e);
    prof.mu_x = std::min(prof.mu_x, prof.mu.back());
    prof.nu_x = std::min(prof.nu_x, prof.nu.back());
  }
  return prof;
}

InfimumRatios infimum_ratios(const PotentialSpec& spec, const SymmetricMatrixField& f,
                             const SiteSet& region, double rho) {
  const LatticeDomain& dom = f.domain();
  if (rho > dom.cutoff_radius() + 1e-12 * rho)
    throw DomainError("infimum scale rho must be <= R_M");
  if (region.empty()) throw CoverageError("empty center region");
  const EnergySplit split = split_energy(spec, f);

  InfimumRatios out;
  out.mu0 = std::numeric_limits<double>::infinity();
  out.nu0 = std::numeric_limits<double>::infinity();
  for (std::int64_t x : region) {
    const RatioProfile prof = ratio_profile(split, x, rho);
    if (prof.radii.size() < 3)
      throw CoverageError("center " + std::to_string(x) + " admits only " +
                          std::to_string(prof.radii.size()) + " valid shells (need >= 3)");
    out.mu0 = std::min(out.mu0, prof.mu_x);
    out.nu0 = std::min(out.nu0, prof.nu_x);
  }
  if (out.mu0 >= 1.0)
    throw DomainError("p0 formula requires mu0 < 1, got " + std::to_string(out.mu0));
  out.p0 = (2.0 * out.nu0 + (dom.dim() - 2.0) * out.mu0) / (1.0 - out.mu0);
  return out;
}

namespace {

// Fractional cell weight at the ball boundary. Plain membership counting
// makes flat profiles wiggle by a few percent between nearby radii, which
// would swamp the monotonicity slack; the linear boundary ramp brings the
// quadrature error down to O(h^2) and makes Phi continuous in R.
double ball_weight(double d, double R, double h) {
  const double t = (R - d) / h + 0.5;
  return std::clamp(t, 0.0, 1.0);
}

}  // namespace

double elliptic_phi(const EnergySplit& split, std::int64_t x, double R, double p0,
                    PhiWeighting weighting) {
  const LatticeDomain& dom = split.grad.domain();
  const int m = dom.dim();
  if (!(R > 0.0) || R >= dom.cutoff_radius())
    throw DomainError("phi radius must satisfy 0 < R < R_M");
  const double h = dom.spacing();
  const SiteSet ball = dom.ball_sites(x, std::min(R + h, 0.499 * dom.period()));
  const double hm = dom.cell_volume();

  double integral = 0.0;
  if (weighting == PhiWeighting::ChapterMono) {
    if (m <= 2) throw DomainError("the m/(m-2) weighting requires m > 2");
    const double wcoef = static_cast<double>(m) / (m - 2.0);
    for (std::int64_t y : ball) {
      const double wgt = ball_weight(dom.periodic_distance(x, y), R, h);
      if (wgt == 0.0) continue;
      const double kin = split.e[y] - split.w[y];
      integral += wgt * (kin + wcoef * split.w[y]);
    }
    integral *= hm;
  } else {
    // nu evaluated per width-h annulus: annulus j collects distances
    // near j*h, matching the shells used by the ratio profiles.
    const int annuli = static_cast<int>(std::floor((R + h) / h + 0.5)) + 1;
    std::vector<double> w_sum(static_cast<std::size_t>(annuli), 0.0);
    std::vector<double> e_sum(static_cast<std::size_t>(annuli), 0.0);
    std::vector<int> index(ball.size());
    std::vector<double> wgt(ball.size());
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const double d = dom.periodic_distance(x, ball.sites[i]);
      int j = static_cast<int>(std::floor(d / h + 0.5));
      j = std::min(j, annuli - 1);
      index[i] = j;
      wgt[i] = ball_weight(d, R, h);
      w_sum[static_cast<std::size_t>(j)] += split.w[ball.sites[i]];
      e_sum[static_cast<std::size_t>(j)] += split.e[ball.sites[i]];
    }
    std::vector<double> nu(static_cast<std::size_t>(annuli), 0.0);
    for (int j = 0; j < annuli; ++j)
      if (e_sum[static_cast<std::size_t>(j)] > 0.0)
        nu[static_cast<std::size_t>(j)] =
            w_sum[static_cast<std::size_t>(j)] / e_sum[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < ball.size(); ++i) {
      if (wgt[i] == 0.0) continue;
      integral +=
          wgt[i] * (1.0 + nu[static_cast<std::size_t>(index[i])]) * split.e[ball.sites[i]];
    }
    integral *= hm;
  }
  return std::pow(R, 2.0 - m - p0) * integral;
}

double elliptic_phi(const PotentialSpec& spec, const SymmetricMatrixField& f, std::int64_t x,
                    double R, double p0, PhiWeighting weighting) {
  return elliptic_phi(split_energy(spec, f), x, R, p0, weighting);
}

MonotonicityVerdict phi_monotonicity_verdict(const PotentialSpec& spec,
                                             const SymmetricMatrixField& f, std::int64_t x,
                                             const std::vector<double>& radii, double p0,
                                             double slack, PhiWeighting weighting) {
  if (radii.size() < 2) throw ConfigError("need at least two radii");
  if (!std::is_sorted(radii.begin(), radii.end()))
    throw ConfigError("radii must be ascending");
  const EnergySplit split = split_energy(spec, f);

  MonotonicityVerdict v;
  v.functional = weighting == PhiWeighting::ChapterMono ? "phi_mono" : "phi_eps";
  v.sample_points = radii;
  v.tolerance = slack;
  for (double R : radii) v.values.push_back(elliptic_phi(split, x, R, p0, weighting));
  v.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < v.values.size(); ++i) {
    const double denom = std::max(std::abs(v.values[i + 1]), 1e-300);
    v.max_violation = std::max(v.max_violation, (v.values[i] - v.values[i + 1]) / denom);
  }
  v.pass = v.max_violation <= slack;
  return v;
}

double backward_gaussian(const LatticeDomain& dom, std::int64_t x0, double t0, std::int64_t x,
                         double t) {
  if (!(t < t0)) throw DomainError("backward Gaussian requires t < t0");
  const double tau = t0 - t;
  const double d = dom.periodic_distance(x0, x);
  return std::pow(4.0 * M_PI * tau, -0.5 * dom.dim()) * std::exp(-d * d / (4.0 * tau));
}

double cutoff_phi(const LatticeDomain& dom, std::int64_t x0, std::int64_t x) {
  const double rm = dom.cutoff_radius();
  const double d = dom.periodic_distance(x0, x);
  if (d <= rm / 2.0) return 1.0;
  if (d >= rm) return 0.0;
  const double s = (d - rm / 2.0) / (rm / 2.0);
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

TrajectoryEnergy::TrajectoryEnergy(const PotentialSpec& spec, const Trajectory& traj) {
  if (traj.snapshots.empty()) throw ConfigError("trajectory has no snapshots");
  times_ = traj.snapshot_times;
  fields_.reserve(traj.snapshots.size());
  for (const auto& snap : traj.snapshots) fields_.push_back(energy_density(spec, snap));
  initial_energy_ = traj.initial_energy;
  if (times_.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) gaps.push_back(times_[i + 1] - times_[i]);
    std::sort(gaps.begin(), gaps.end());
    median_spacing_ = gaps[gaps.size() / 2];
  }
}

ScalarField TrajectoryEnergy::at_time(double t) const {
  const double slack = 1e-9 * (1.0 + std::abs(t));
  for (std::size_t i = 0; i < times_.size(); ++i)
    if (std::abs(times_[i] - t) <= slack) return fields_[i];
  // Bracketing snapshots.
  std::size_t hi = times_.size();
  for (std::size_t i = 0; i < times_.size(); ++i)
    if (times_[i] > t) {
      hi = i;
      break;
    }
  if (hi == 0 || hi == times_.size())
    throw EmptyWindowError("time " + std::to_string(t) + " outside the stored trajectory");
  const double gap = times_[hi] - times_[hi - 1];
  if (median_spacing_ > 0.0 && gap >= 2.0 * median_spacing_)
    throw EmptyWindowError("snapshot gap " + std::to_string(gap) + " too wide to interpolate");
  const double a = (t - times_[hi - 1]) / gap;
  ScalarField out = fields_[hi - 1];
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = (1.0 - a) * out.values[i] + a * fields_[hi].values[i];
  return out;
}

namespace {

// sum_x G e phi^2 h^m at one time slice.
double gaussian_weighted_energy(const ScalarField& e, std::int64_t x0, double t0, double t) {
  const LatticeDomain& dom = e.domain;
  double sum = 0.0;
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    const double phi = cutoff_phi(dom, x0, s);
    if (phi == 0.0) continue;
    sum += backward_gaussian(dom, x0, t0, s, t) * e[s] * phi * phi;
  }
  return sum * dom.cell_volume();
}

}  // namespace

double parabolic_small_phi(const TrajectoryEnergy& energy, std::int64_t x0, double t0, double t,
                           double nu0) {
  const LatticeDomain& dom = energy.domain();
  if (!(t < t0)) throw DomainError("parabolic phi requires t < t0");
  const double tau = t0 - t;
  if (tau > dom.cutoff_radius() * dom.cutoff_radius() + 1e-12)
    throw DomainError("t0 - t must be <= R_M^2");
  const ScalarField e = energy.at_time(t);
  return std::pow(tau, 1.0 - nu0) * gaussian_weighted_energy(e, x0, t0, t);
}

double parabolic_small_phi(const PotentialSpec& spec, const Trajectory& traj, std::int64_t x0,
                           double t0, double t, double nu0) {
  return parabolic_small_phi(TrajectoryEnergy(spec, traj), x0, t0, t, nu0);
}

PsiValue parabolic_psi(const TrajectoryEnergy& energy, std::int64_t x0, double t0, double R,
                       double nu0) {
  const std::vector<double>& times = energy.times();
  if (times.empty()) throw EmptyWindowError("no snapshots");
  const double t_min = times.front();
  if (!(R > 0.0)) throw DomainError("psi radius must be positive");
  if (!(t0 - t_min > 0.0) || R > std::sqrt(t0 - t_min) / 2.0 + 1e-12)
    throw DomainError("psi requires R <= sqrt(t0 - t_min)/2");

  const double lo = t0 - 4.0 * R * R;
  const double hi = t0 - R * R;
  const double slack = 1e-12 * (1.0 + std::abs(t0));

  // Quadrature nodes: snapshots inside the strip, plus interpolated endpoint
  // values when bracketing snapshots exist outside it.
  std::vector<double> nodes;
  for (double t : times)
    if (t >= lo - slack && t <= hi + slack) nodes.push_back(t);

  auto can_interpolate = [&](double t) {
    if (t <= times.front() || t >= times.back()) return false;
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
      if (times[i] <= t && t <= times[i + 1])
        return energy.median_spacing() == 0.0 ||
               times[i + 1] - times[i] < 2.0 * energy.median_spacing();
    return false;
  };
  if (nodes.empty() || nodes.front() > lo + slack)
    if (can_interpolate(lo)) nodes.insert(nodes.begin(), lo);
  if (nodes.empty() || nodes.back() < hi - slack)
    if (can_interpolate(hi)) nodes.push_back(hi);
  if (nodes.empty()) throw EmptyWindowError("no snapshots in the psi strip");

  PsiValue out;
  out.coverage = nodes.size() >= 2 ? (nodes.back() - nodes.front()) / (3.0 * R * R) : 0.0;
  out.low_coverage = out.coverage < 0.8;

  auto integrand = [&](double t) {
    const ScalarField e = energy.at_time(t);
    return std::pow(t0 - t, -nu0) * gaussian_weighted_energy(e, x0, t0, t);
  };
  if (nodes.size() == 1) {
    out.value = integrand(nodes.front()) * 3.0 * R * R;
    return out;
  }
  double acc = 0.0;
  double prev_g = integrand(nodes.front());
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double g = integrand(nodes[i]);
    acc += 0.5 * (g + prev_g) * (nodes[i] - nodes[i - 1]);
    prev_g = g;
  }
  out.value = acc;
  return out;
}

PsiValue parabolic_psi(const PotentialSpec& spec, const Trajectory& traj, std::int64_t x0,
                       double t0, double R, double nu0) {
  return parabolic_psi(TrajectoryEnergy(spec, traj), x0, t0, R, nu0);
}

MonotonicityVerdict psi_inequality_verdict(const TrajectoryEnergy& energy, std::int64_t x0,
                                           double t0, double R, double R0, double nu0, double E0,
                                           double c, double chat) {
  if (!(R <= R0)) throw ConfigError("psi inequality requires R <= R0");
  const PsiValue psi_r = parabolic_psi(energy, x0, t0, R, nu0);
  const PsiValue psi_r0 = parabolic_psi(energy, x0, t0, R0, nu0);

  MonotonicityVerdict v;
  v.functional = "psi";
  v.sample_points = {R, R0};
  v.values = {psi_r.value, psi_r0.value};
  v.tolerance = 0.0;
  const double gap_sq = R0 * R0 - R * R;
  const double rhs = std::exp(c * gap_sq) * psi_r0.value + chat * E0 * gap_sq;
  v.max_violation = (psi_r.value - rhs) / std::max(std::abs(rhs), 1e-300);
  v.pass = psi_r.value <= rhs * (1.0 + 1e-12) + 1e-300;
  v.min_chat =
      gap_sq > 0.0 && E0 > 0.0
          ? std::max(0.0, (psi_r.value - psi_r0.value) / (E0 * gap_sq))
          : 0.0;
  return v;
}

std::pair<double, double> gaussian_recentred_lower_bound_check(const LatticeDomain& dom,
                                                               std::int64_t x1, double t1,
                                                               double rho, std::int64_t x,
                                                               double t) {
  if (dom.periodic_distance(x1, x) > rho + 1e-12)
    throw DomainError("sample point outside the cylinder: |x - x1| > rho");
  if (std::abs(t - t1) > rho * rho + 1e-12)
    throw DomainError("sample point outside the cylinder: |t - t1| > rho^2");
  const double lhs = backward_gaussian(dom, x1, t1 + 2.0 * rho * rho, x, t);
  const double rhs =
      std::pow(12.0 * M_PI, -0.5 * dom.dim()) * std::exp(-0.25) * std::pow(rho, -dom.dim());
  return {lhs, rhs};
}

}  // namespace sgf
