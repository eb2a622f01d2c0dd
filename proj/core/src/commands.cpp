#include "sgf/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "sgf/monotonicity.hpp"
#include "sgf/regularity.hpp"
#include "sgf/scenarios.hpp"
#include "sgf/snapshot.hpp"

namespace fs = std::filesystem;

namespace sgf {

namespace {

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + (fs::path(dir) / name).string());
  out << std::setprecision(17);
  return out;
}

std::string snapshot_name(std::size_t index) {
  std::ostringstream os;
  os << "snap_" << std::setw(6) << std::setfill('0') << index << ".sgf";
  return os.str();
}

}  // namespace

CalibratedConstants constants_for(const RunConfig& cfg) {
  if (cfg.constants_path.empty()) return CalibratedConstants::defaults();
  return CalibratedConstants::load(cfg.constants_path);
}

ExitStatus cmd_run(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream resolved = open_out(out_dir, "config.resolved.txt");
    resolved << cfg.resolved_text();
  }

  const SymmetricMatrixField initial = cfg.initial_field();
  const PotentialSpec spec = cfg.potential();
  const Trajectory traj = run_flow(initial, spec, cfg.flow());

  if (cfg.emit_snapshots) {
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
      write_snapshot(traj.snapshots[i], (fs::path(out_dir) / snapshot_name(i)).string());
  }

  std::ofstream series = open_out(out_dir, "series.csv");
  series << "t,E,kinetic,potential,sup_e,residual,dEdt,dissipation\n";
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    series << traj.t[i] << ',' << traj.energy[i] << ',' << traj.kinetic[i] << ','
           << traj.potential[i] << ',' << traj.sup_e[i] << ',' << traj.residual[i] << ','
           << traj.dE_dt[i] << ',' << traj.dissipation[i] << '\n';
  }

  if (traj.diverged()) {
    std::ofstream div = open_out(out_dir, "divergence.txt");
    const DivergenceInfo& d = *traj.divergence;
    div << "step = " << d.step << "\n"
        << "t = " << d.t << "\n"
        << "sup_e = " << d.sup_e << "\n"
        << "site = " << d.site << "\n"
        << "min_abs_eigenvalue = " << d.min_abs_eigenvalue << "\n";
    return ExitStatus::Diverged;
  }
  return ExitStatus::Ok;
}

namespace {

Trajectory read_trajectory(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snap_", 0) == 0 && entry.path().extension() == ".sgf")
      files.push_back(entry.path().string());
  }
  if (files.empty()) throw ConfigError("no snapshot files (snap_*.sgf) under " + dir);
  std::sort(files.begin(), files.end());
  Trajectory traj;
  for (const auto& f : files) {
    traj.snapshots.push_back(read_snapshot(f));
    traj.snapshot_times.push_back(traj.snapshots.back().time());
  }
  for (std::size_t i = 0; i + 1 < traj.snapshot_times.size(); ++i)
    if (!(traj.snapshot_times[i] < traj.snapshot_times[i + 1]))
      throw ConfigError("snapshot times are not strictly increasing under " + dir);
  return traj;
}

}  // namespace

ExitStatus cmd_analyze(const RunConfig& cfg, const std::string& traj_dir,
                       const std::string& out_dir) {
  const CalibratedConstants cal = constants_for(cfg);
  const PotentialSpec spec = cfg.potential();
  Trajectory traj = read_trajectory(traj_dir);
  const LatticeDomain dom = traj.snapshots.front().domain();
  if (!(dom == cfg.domain()))
    throw ConfigError("snapshot grid does not match the domain block of the config");

  const SymmetricMatrixField& initial = traj.snapshots.front();
  const SymmetricMatrixField& final_f = traj.snapshots.back();
  traj.initial_energy = total_energy(spec, initial).total;

  const std::vector<std::int64_t> centers = cfg.resolved_centers();
  const std::vector<double> radii = cfg.resolved_radii();
  const double rho = cfg.resolved_rho();

  // nu0 / p0 frozen from the initial snapshot over the scan region.
  SiteSet region;
  region.sites = centers;
  std::sort(region.sites.begin(), region.sites.end());
  const InfimumRatios inf0 = infimum_ratios(spec, initial, region, rho);

  const EnergyReport final_energy = total_energy(spec, final_f);
  const auto [res_field, res_norm] = elliptic_residual(spec, final_f);
  (void)res_field;
  const bool stationary = res_norm <= 1e-3 * final_energy.total;

  const PhiWeighting verdict_weighting =
      dom.dim() > 2 ? PhiWeighting::ChapterMono : PhiWeighting::ChapterEps;

  // phi profile and monotonicity verdicts.
  bool all_phi_pass = true;
  {
    std::ofstream out = open_out(out_dir, "phi_profile.csv");
    out << "center,R,phi,weighting,p0\n";
    const EnergySplit split = split_energy(spec, final_f);
    for (std::int64_t c : centers)
      for (double R : radii)
        out << c << ',' << R << ',' << elliptic_phi(split, c, R, inf0.p0, verdict_weighting)
            << ',' << (verdict_weighting == PhiWeighting::ChapterMono ? "mono" : "eps") << ','
            << inf0.p0 << '\n';
    for (std::int64_t c : centers) {
      const MonotonicityVerdict v =
          phi_monotonicity_verdict(spec, final_f, c, radii, inf0.p0, 1e-2, verdict_weighting);
      all_phi_pass = all_phi_pass && v.pass;
    }
  }

  // psi inequality probes.
  const TrajectoryEnergy energy(spec, traj);
  bool all_psi_pass = true;
  {
    std::ofstream out = open_out(out_dir, "psi_checks.csv");
    out << "center,t0,R,R0,psi_R,psi_R0,violation,min_chat,pass\n";
    const double t0 = traj.snapshot_times.back();
    const double t_min = traj.snapshot_times.front();
    const double r_cap = std::min(std::sqrt(std::max(t0 - t_min, 0.0)) / 2.0,
                                  dom.cutoff_radius());
    for (std::int64_t c : centers) {
      for (double frac : {0.3, 0.5, 0.7}) {
        const double R = frac * r_cap;
        const double R0 = std::min(1.4 * R, 0.98 * r_cap);
        if (!(R > 0.0) || !(R < R0)) continue;
        try {
          const MonotonicityVerdict v = psi_inequality_verdict(
              energy, c, t0, R, R0, inf0.nu0, traj.initial_energy, cal.psi_c, cal.psi_chat);
          out << c << ',' << t0 << ',' << R << ',' << R0 << ',' << v.values[0] << ','
              << v.values[1] << ',' << v.max_violation << ',' << v.min_chat << ','
              << (v.pass ? 1 : 0) << '\n';
          all_psi_pass = all_psi_pass && v.pass;
        } catch (const EmptyWindowError&) {
          // strip not covered by this trajectory; skip the probe
        }
      }
    }
  }

  // moser checks.
  bool all_moser_pass = true;
  {
    std::ofstream out = open_out(out_dir, "moser_checks.csv");
    out << "kind,center,R,delta,C0,lhs,rhs,ratio,pass\n";
    double C0 = 0.0;
    if (spec.family != PotentialFamily::Singular) C0 = 4.0 * hessian_bound(spec).uniform;
    const ScalarField e_final = energy_density(spec, final_f);
    const double t0 = traj.snapshot_times.back();
    for (std::int64_t c : centers) {
      for (double R : radii) {
        for (double d : {0.0, cfg.delta}) {
          const BoundCheck bc = moser_elliptic_check(e_final, C0, c, R, d, cal.moser_c1,
                                                     cal.moser_c2);
          out << "elliptic," << c << ',' << R << ',' << d << ',' << C0 << ',' << bc.lhs << ','
              << bc.rhs << ',' << bc.ratio << ',' << (bc.pass ? 1 : 0) << '\n';
          all_moser_pass = all_moser_pass && bc.pass;
        }
        try {
          const BoundCheck bc = moser_parabolic_check(energy, C0, c, t0 - R * R, R, cfg.delta,
                                                      cal.moser_c1, cal.moser_c2);
          out << "parabolic," << c << ',' << R << ',' << cfg.delta << ',' << C0 << ',' << bc.lhs
              << ',' << bc.rhs << ',' << bc.ratio << ',' << (bc.pass ? 1 : 0) << '\n';
          all_moser_pass = all_moser_pass && bc.pass;
        } catch (const EmptyWindowError&) {
        }
      }
    }
  }

  // epsilon-regularity scans.
  SiteSet center_set;
  center_set.sites = centers;
  std::sort(center_set.sites.begin(), center_set.sites.end());
  const Epsilon0Rule rule = cfg.eps0_auto
                                ? Epsilon0Rule::calibrated(cal.eps_C(spec.L))
                                : Epsilon0Rule::fixed_value(cfg.eps0);
  const double scan_delta = std::min(cfg.delta, 0.75);
  const EpsRegReport ell =
      epsilon_scan_elliptic(spec, final_f, scan_delta, rule, radii, center_set, inf0.p0);
  {
    std::ofstream out = open_out(out_dir, "epsreg_elliptic.csv");
    out << "center,R,phi,triggered,sup_e,implied_const,fixed_sigma_const\n";
    for (const EpsProbe& p : ell.probes)
      out << p.center << ',' << p.R << ',' << p.functional << ',' << (p.triggered ? 1 : 0) << ','
          << p.sup_e << ',' << p.implied_const << ',' << p.fixed_sigma_const << '\n';
  }

  EpsRegReport par;
  {
    const double t0 = traj.snapshot_times.back();
    const double t_min = traj.snapshot_times.front();
    std::vector<double> par_radii;
    const double r_cap = std::sqrt(std::max(t0 - t_min, 0.0)) / 2.0;
    for (double frac : {0.3, 0.5, 0.7})
      if (frac * r_cap > 0.0) par_radii.push_back(frac * r_cap);
    if (!par_radii.empty())
      par = epsilon_scan_parabolic(spec, traj, scan_delta, rule, par_radii, center_set, {t0},
                                   inf0.nu0);
    std::ofstream out = open_out(out_dir, "epsreg_parabolic.csv");
    out << "center,t0,R,psi,triggered,sup_e,implied_const\n";
    for (const EpsProbe& p : par.probes)
      out << p.center << ',' << p.t0 << ',' << p.R << ',' << p.functional << ','
          << (p.triggered ? 1 : 0) << ',' << p.sup_e << ',' << p.implied_const << '\n';
  }

  // summary.json
  {
    nlohmann::json j;
    j["grid"] = {{"m", dom.dim()}, {"n_per_axis", dom.sites_per_axis()}, {"period", dom.period()}};
    j["snapshots"] = traj.snapshots.size();
    j["initial_energy"] = traj.initial_energy;
    j["final_energy"] = final_energy.total;
    j["final_sup_e"] = final_energy.sup_e;
    j["residual_norm"] = res_norm;
    j["near_stationary"] = stationary;
    j["ratios"] = {{"mu0", inf0.mu0}, {"nu0", inf0.nu0}, {"p0", inf0.p0}};
    j["phi_monotonicity_pass"] = all_phi_pass;
    j["psi_inequality_pass"] = all_psi_pass;
    j["moser_pass"] = all_moser_pass;
    j["epsreg_elliptic"] = {{"eps0", ell.eps0},
                            {"triggers", ell.trigger_count},
                            {"max_implied_const", ell.max_implied_const},
                            {"max_fixed_sigma_const", ell.max_fixed_sigma_const}};
    j["epsreg_parabolic"] = {{"eps0", par.eps0},
                             {"triggers", par.trigger_count},
                             {"max_implied_const", par.max_implied_const}};
    j["constants"] = nlohmann::json::parse(cal.to_json());
    std::ofstream out = open_out(out_dir, "summary.json");
    out << j.dump(2) << "\n";
  }
  return ExitStatus::Ok;
}

ExitStatus cmd_sweep(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.b_sweep.empty()) throw ConfigError("config key 'analysis.b_sweep': required for sweep");
  const CalibratedConstants cal = constants_for(cfg);

  std::vector<double> blist = cfg.b_sweep;
  std::sort(blist.begin(), blist.end(), std::greater<double>());

  FlowScenario scenario{cfg.initial_field(), cfg.flow()};

  bool partial = false;
  {
    std::ofstream out = open_out(out_dir, "badset_sweep.csv");
    out << "b,r,J,H,E0,ratio,stationary,bad_sites\n";
    try {
      const HausdorffSweep sweep =
          hausdorff_sweep(cfg.l, cfg.L, scenario, blist, cal.hausdorff_c);
      for (const HausdorffRow& row : sweep.rows)
        out << row.b << ',' << row.r << ',' << row.J << ',' << row.H << ',' << row.E0 << ','
            << row.ratio << ',' << (row.stationary ? 1 : 0) << ',' << row.bad_sites << '\n';
    } catch (const Error& e) {
      out << "# aborted: " << e.what() << "\n";
      partial = true;
    }
  }
  {
    std::ofstream out = open_out(out_dir, "sup_e_sweep.csv");
    out << "b,sup_e,E_b,bound1,bound2,pass,stationary\n";
    try {
      const SupESweep sweep = sup_e_bound_sweep(cfg.l, scenario, blist, cal.sup_e_C);
      for (const SupERow& row : sweep.rows)
        out << row.b << ',' << row.sup_e << ',' << row.E_b << ',' << row.bound1 << ','
            << row.bound2 << ',' << (row.pass ? 1 : 0) << ',' << (row.stationary ? 1 : 0) << '\n';
      std::ofstream slope = open_out(out_dir, "sup_e_fit.txt");
      slope << "fitted_slope = " << sweep.fitted_slope << "\n"
            << "C_required = " << sweep.C_required << "\n";
    } catch (const Error& e) {
      out << "# aborted: " << e.what() << "\n";
      partial = true;
    }
  }
  return partial ? ExitStatus::Failure : ExitStatus::Ok;
}

}  // namespace sgf
