#include "sgf/flow.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include "sgf/parallel.hpp"

namespace sgf {

// --- spectral diffusion ------------------------------------------------------

struct SpectralDiffusion::Impl {
  int m = 0;
  int n = 0;
  std::int64_t nsites = 0;
  std::int64_t nreduced = 0;
  std::vector<double> mu_full;
  std::vector<double> mu_reduced;
  double* real_buf = nullptr;
  fftw_complex* cplx_buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  double cached_dt = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> decay;  // exp(-mu dt) on the reduced grid
  std::mutex mutex;
};

namespace {
std::mutex g_fftw_plan_mutex;

double axis_symbol(double h, int k, int n) {
  return 2.0 / (h * h) * (1.0 - std::cos(2.0 * M_PI * k / n));
}
}  // namespace

SpectralDiffusion::SpectralDiffusion(const LatticeDomain& dom) : impl_(new Impl) {
  impl_->m = dom.dim();
  impl_->n = dom.sites_per_axis();
  impl_->nsites = dom.site_count();
  const int n = impl_->n;
  const int m = impl_->m;
  const double h = dom.spacing();
  impl_->nreduced = impl_->nsites / n * (n / 2 + 1);

  impl_->mu_full.resize(static_cast<std::size_t>(impl_->nsites));
  for (std::int64_t idx = 0; idx < impl_->nsites; ++idx) {
    std::int64_t rest = idx;
    double mu = 0.0;
    for (int a = m - 1; a >= 0; --a) {
      mu += axis_symbol(h, static_cast<int>(rest % n), n);
      rest /= n;
    }
    impl_->mu_full[static_cast<std::size_t>(idx)] = mu;
  }
  impl_->mu_reduced.resize(static_cast<std::size_t>(impl_->nreduced));
  const int nlast = n / 2 + 1;
  for (std::int64_t idx = 0; idx < impl_->nreduced; ++idx) {
    std::int64_t rest = idx;
    double mu = axis_symbol(h, static_cast<int>(rest % nlast), n);
    rest /= nlast;
    for (int a = m - 2; a >= 0; --a) {
      mu += axis_symbol(h, static_cast<int>(rest % n), n);
      rest /= n;
    }
    impl_->mu_reduced[static_cast<std::size_t>(idx)] = mu;
  }

  std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
  impl_->real_buf = fftw_alloc_real(static_cast<std::size_t>(impl_->nsites));
  impl_->cplx_buf = fftw_alloc_complex(static_cast<std::size_t>(impl_->nreduced));
  std::vector<int> dims(static_cast<std::size_t>(m), n);
  impl_->fwd = fftw_plan_dft_r2c(m, dims.data(), impl_->real_buf, impl_->cplx_buf, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_c2r(m, dims.data(), impl_->cplx_buf, impl_->real_buf, FFTW_ESTIMATE);
}

SpectralDiffusion::~SpectralDiffusion() {
  std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->bwd);
  fftw_free(impl_->real_buf);
  fftw_free(impl_->cplx_buf);
}

const std::vector<double>& SpectralDiffusion::symbol() const { return impl_->mu_full; }

void SpectralDiffusion::apply(SymmetricMatrixField& f, double dt) {
  Impl& im = *impl_;
  std::lock_guard<std::mutex> lock(im.mutex);
  if (!(im.cached_dt == dt)) {
    im.decay.resize(static_cast<std::size_t>(im.nreduced));
    for (std::int64_t i = 0; i < im.nreduced; ++i)
      im.decay[static_cast<std::size_t>(i)] = std::exp(-im.mu_reduced[static_cast<std::size_t>(i)] * dt);
    im.cached_dt = dt;
  }
  const int tri = f.tri_size();
  const double norm = 1.0 / static_cast<double>(im.nsites);
  std::vector<double>& data = f.raw();
  for (int c = 0; c < tri; ++c) {
    for (std::int64_t s = 0; s < im.nsites; ++s)
      im.real_buf[s] = data[static_cast<std::size_t>(s) * tri + c];
    fftw_execute(im.fwd);
    for (std::int64_t i = 0; i < im.nreduced; ++i) {
      im.cplx_buf[i][0] *= im.decay[static_cast<std::size_t>(i)];
      im.cplx_buf[i][1] *= im.decay[static_cast<std::size_t>(i)];
    }
    fftw_execute(im.bwd);
    for (std::int64_t s = 0; s < im.nsites; ++s)
      data[static_cast<std::size_t>(s) * tri + c] = im.real_buf[s] * norm;
  }
}

namespace {

// One shared operator per grid shape; plans are expensive relative to a step.
SpectralDiffusion& diffusion_for(const LatticeDomain& dom) {
  static std::map<std::tuple<int, int, double>, std::unique_ptr<SpectralDiffusion>> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_tuple(dom.dim(), dom.sites_per_axis(), dom.period());
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<SpectralDiffusion>(dom)).first;
  return *it->second;
}

}  // namespace

// --- residual / step sizes ---------------------------------------------------

std::pair<ScalarField, double> elliptic_residual(const PotentialSpec& spec,
                                                 const SymmetricMatrixField& f) {
  const SymmetricMatrixField lap = rough_laplacian(f);
  const SymmetricMatrixField gw = potential_gradient_field(spec, f);
  const LatticeDomain& dom = f.domain();
  ScalarField res(dom, "residual");
  const int tri = f.tri_size();
  const int l = f.matrix_size();
  std::vector<double> sum(static_cast<std::size_t>(tri));
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    const auto a = lap.tri(s);
    const auto b = gw.tri(s);
    for (int i = 0; i < tri; ++i) sum[static_cast<std::size_t>(i)] = a[i] + b[i];
    res[s] = std::sqrt(tri_hs_norm_sq(std::span<const double>(sum.data(), sum.size()), l));
  }
  double norm_sq = 0.0;
  for (double v : res.values) norm_sq += v * v;
  return {std::move(res), std::sqrt(norm_sq * dom.cell_volume())};
}

double stable_dt(const PotentialSpec& spec, const SymmetricMatrixField& f,
                 Integrator integrator) {
  if (spec.family == PotentialFamily::Singular)
    throw ConfigError("the singular family requires a user-fixed dt");
  const double cfl = f.domain().spacing() * f.domain().spacing() / (2.0 * f.domain().dim());
  const double pot = 1.0 / hessian_bound(spec).uniform;
  if (integrator == Integrator::SpectralImex) return 0.9 * pot;
  return 0.9 * std::min(cfl, pot);
}

namespace {

// Largest curvature of the potential over the spectrum actually present:
// max over sites of max(|w''(lambda_i)|, |divided difference| over pairs).
double local_stiffness(const PotentialSpec& spec, const EigenField& ef) {
  const std::int64_t n = ef.domain().site_count();
  const int l = ef.matrix_size();
  double worst = 0.0;
  for (std::int64_t s = 0; s < n; ++s) {
    const auto lam = ef.eigenvalues(s);
    for (int i = 0; i < l; ++i) {
      worst = std::max(worst, std::abs(potential_profile_d2(spec, lam[i])));
      for (int j = 0; j < i; ++j) {
        const double gap = lam[i] - lam[j];
        double dd;
        if (std::abs(gap) < 1e-7 * (1.0 + std::abs(lam[i])))
          dd = potential_profile_d2(spec, 0.5 * (lam[i] + lam[j]));
        else
          dd = (potential_profile_d1(spec, lam[i]) - potential_profile_d1(spec, lam[j])) / gap;
        worst = std::max(worst, std::abs(dd));
      }
    }
  }
  return worst;
}

}  // namespace

double adaptive_dt(const PotentialSpec& spec, const SymmetricMatrixField& f,
                   Integrator integrator, double safety) {
  const EigenField ef = eigen_decompose(f, 0.0);
  const double stiff = local_stiffness(spec, ef);
  const double cfl = f.domain().spacing() * f.domain().spacing() / (2.0 * f.domain().dim());
  double dt = stiff > 0.0 ? 1.0 / stiff : cfl;
  if (integrator == Integrator::ExplicitEuler) dt = std::min(dt, cfl);
  return safety * dt;
}

// --- stepping ----------------------------------------------------------------

namespace {

void check_finite_or_throw(const SymmetricMatrixField& f, long step_index, double t) {
  if (f.all_finite()) return;
  double sup = 0.0;
  std::int64_t where = 0;
  for (std::int64_t s = 0; s < f.domain().site_count(); ++s) {
    const double v = f.hs_norm_sq(s);
    if (!std::isfinite(v) || v > sup) {
      sup = v;
      where = s;
      if (!std::isfinite(v)) break;
    }
  }
  throw DivergenceError("non-finite field after step " + std::to_string(step_index), step_index,
                        t, sup, where);
}

void check_singular_eigenvalue(const PotentialSpec& spec, double lam, long step_index, double t,
                               double sup_e, std::int64_t site) {
  if (spec.family == PotentialFamily::Singular && std::abs(lam) < 1e-12)
    throw DivergenceError("singular potential: eigenvalue collapsed to zero", step_index, t,
                          sup_e, site);
}

}  // namespace

SymmetricMatrixField step(const SymmetricMatrixField& f, const PotentialSpec& spec, double dt,
                          Integrator integrator, bool potential_off) {
  SymmetricMatrixField next = f;
  std::vector<double>& out = next.raw();

  if (integrator == Integrator::SpectralImex) {
    // Strang arrangement: half diffusion, explicit potential at the midpoint,
    // half diffusion. With the potential off this composes to the exact heat
    // semigroup over the full step.
    SpectralDiffusion& S = diffusion_for(f.domain());
    S.apply(next, dt / 2.0);
    if (!potential_off) {
      const SymmetricMatrixField gw = potential_gradient_field(spec, next);
      const std::vector<double>& g = gw.raw();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] -= dt * g[i];
    }
    S.apply(next, dt / 2.0);
  } else {
    if (!potential_off) {
      const SymmetricMatrixField gw = potential_gradient_field(spec, f);
      const std::vector<double>& g = gw.raw();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] -= dt * g[i];
    }
    const SymmetricMatrixField lap = rough_laplacian(f);
    const std::vector<double>& d = lap.raw();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= dt * d[i];
  }
  next.set_time(f.time() + dt);
  check_finite_or_throw(next, -1, next.time());
  return next;
}

Trajectory run_flow(const SymmetricMatrixField& initial, const PotentialSpec& spec,
                    const FlowConfig& config) {
  spec.validate();
  if (!(config.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (config.dt_policy.kind == DtPolicy::Kind::Fixed && !(config.dt_policy.dt > 0.0))
    throw ConfigError("fixed dt must be positive");
  if (config.snapshot_stride < 1) throw ConfigError("snapshot stride must be >= 1");

  const LatticeDomain& dom = initial.domain();
  const int l = initial.matrix_size();
  const int tri = initial.tri_size();
  const double hm = dom.cell_volume();
  const double cfl = dom.spacing() * dom.spacing() / (2.0 * dom.dim());

  Trajectory traj;
  SymmetricMatrixField f = initial;
  f.set_time(0.0);
  traj.snapshots.push_back(f);
  traj.snapshot_times.push_back(0.0);

  // The second-difference operator d*d is the exact gradient of the
  // forward-difference kinetic energy (summation by parts), so the series
  // uses that kinetic form; the dissipation identity is then exact up to the
  // time-splitting error, which is what the mismatch series measures.
  auto forward_kinetic = [&](const SymmetricMatrixField& field) {
    ScalarField kin(dom, "kinetic");
    const double h = dom.spacing();
    parallel_for_chunks(dom.site_count(), [&](std::int64_t lo, std::int64_t hi) {
      std::vector<double> diff(static_cast<std::size_t>(tri));
      for (std::int64_t s = lo; s < hi; ++s) {
        double acc = 0.0;
        const auto fc = field.tri(s);
        for (int a = 0; a < dom.dim(); ++a) {
          const auto fp = field.tri(dom.neighbor(s, a, +1));
          for (int i = 0; i < tri; ++i) diff[static_cast<std::size_t>(i)] = (fp[i] - fc[i]) / h;
          acc += tri_hs_norm_sq(std::span<const double>(diff.data(), diff.size()), l);
        }
        kin[s] = 0.5 * acc;
      }
    });
    return kin;
  };

  auto evaluate = [&](const SymmetricMatrixField& field, const EigenField& ef, double& kin_out,
                      double& pot_out, double& sup_out, std::int64_t& argmax_out,
                      double& res_norm_out, double& min_abs_lam, std::int64_t& min_site) {
    const ScalarField kin = forward_kinetic(field);
    ScalarField pot(dom, "pot");
    if (!config.potential_off) {
      parallel_for_chunks(dom.site_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t s = lo; s < hi; ++s) pot[s] = potential_value(spec, ef.eigenvalues(s));
      });
    }
    double kin_sum = 0.0, pot_sum = 0.0;
    sup_out = -std::numeric_limits<double>::infinity();
    min_abs_lam = std::numeric_limits<double>::infinity();
    argmax_out = 0;
    min_site = 0;
    for (std::int64_t s = 0; s < dom.site_count(); ++s) {
      const double e = kin[s] + pot[s];
      kin_sum += kin[s];
      pot_sum += pot[s];
      if (e > sup_out) {
        sup_out = e;
        argmax_out = s;
      }
      for (double lam : ef.eigenvalues(s)) {
        if (std::abs(lam) < min_abs_lam) {
          min_abs_lam = std::abs(lam);
          min_site = s;
        }
      }
    }
    kin_out = kin_sum * hm;
    pot_out = pot_sum * hm;

    const SymmetricMatrixField lap = rough_laplacian(field);
    ScalarField res_sq(dom, "res_sq");
    parallel_for_chunks(dom.site_count(), [&](std::int64_t lo, std::int64_t hi) {
      std::vector<double> sum(static_cast<std::size_t>(tri));
      Eigen::MatrixXd G(l, l);
      for (std::int64_t s = lo; s < hi; ++s) {
        const auto a = lap.tri(s);
        for (int i = 0; i < tri; ++i) sum[static_cast<std::size_t>(i)] = a[i];
        if (!config.potential_off) {
          const auto lam = ef.eigenvalues(s);
          const auto V = ef.frame(s);
          G.setZero();
          for (int i = 0; i < l; ++i)
            G += potential_profile_d1(spec, lam[i]) * V.col(i) * V.col(i).transpose();
          for (int i = 0; i < l; ++i)
            for (int j = 0; j <= i; ++j)
              sum[static_cast<std::size_t>(SymmetricMatrixField::triangle_index(i, j))] +=
                  0.5 * (G(i, j) + G(j, i));
        }
        res_sq[s] = tri_hs_norm_sq(std::span<const double>(sum.data(), sum.size()), l);
      }
    });
    double total_res = 0.0;
    for (std::int64_t s = 0; s < dom.site_count(); ++s) total_res += res_sq[s];
    res_norm_out = std::sqrt(total_res * hm);
  };

  double kin, pot, sup, res_norm, min_lam;
  std::int64_t argmax, min_site;
  EigenField ef = eigen_decompose(f, 0.0);
  evaluate(f, ef, kin, pot, sup, argmax, res_norm, min_lam, min_site);
  double energy_prev = kin + pot;
  traj.initial_energy = energy_prev;

  long k = 0;
  double t = 0.0;
  const double t_eps = 1e-12 * config.t_end;
  while (t < config.t_end - t_eps) {
    double dt;
    if (config.dt_policy.kind == DtPolicy::Kind::Fixed) {
      dt = config.dt_policy.dt;
    } else if (config.potential_off) {
      dt = config.dt_policy.safety * cfl;
    } else {
      const double stiff = local_stiffness(spec, ef);
      dt = stiff > 0.0 ? config.dt_policy.safety / stiff : config.dt_policy.safety * cfl;
      if (config.integrator == Integrator::ExplicitEuler)
        dt = std::min(dt, config.dt_policy.safety * cfl);
    }
    dt = std::min(dt, config.t_end - t);

    SymmetricMatrixField next = f;
    double diss = 0.0;
    double energy = 0.0;
    try {
      std::vector<double>& out = next.raw();
      auto potential_substep = [&](const EigenField& basis) {
        std::atomic<std::int64_t> collapsed{-1};
        parallel_for_chunks(dom.site_count(), [&](std::int64_t lo, std::int64_t hi) {
          Eigen::MatrixXd G(l, l);
          for (std::int64_t s = lo; s < hi; ++s) {
            const auto lam = basis.eigenvalues(s);
            const auto V = basis.frame(s);
            G.setZero();
            for (int i = 0; i < l; ++i) {
              if (spec.family == PotentialFamily::Singular && std::abs(lam[i]) < 1e-12) {
                collapsed.store(s);
                return;
              }
              G += potential_profile_d1(spec, lam[i]) * V.col(i) * V.col(i).transpose();
            }
            auto o = next.tri(s);
            for (int i = 0; i < l; ++i)
              for (int j = 0; j <= i; ++j)
                o[SymmetricMatrixField::triangle_index(i, j)] -= dt * 0.5 * (G(i, j) + G(j, i));
          }
        });
        if (collapsed.load() >= 0)
          throw DivergenceError("singular potential: eigenvalue collapsed to zero", k, t, sup,
                                collapsed.load());
      };
      if (config.integrator == Integrator::SpectralImex) {
        SpectralDiffusion& S = diffusion_for(dom);
        S.apply(next, dt / 2.0);
        if (!config.potential_off) potential_substep(eigen_decompose(next, 0.0));
        S.apply(next, dt / 2.0);
      } else {
        if (!config.potential_off) potential_substep(ef);
        const SymmetricMatrixField lap = rough_laplacian(f);
        const std::vector<double>& d = lap.raw();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= dt * d[i];
      }
      next.set_time(t + dt);
      check_finite_or_throw(next, k, t + dt);

      // Realized-update dissipation: sum |f_{k+1} - f_k|^2 h^m / dt^2.
      std::vector<double> diff(static_cast<std::size_t>(tri));
      for (std::int64_t s = 0; s < dom.site_count(); ++s) {
        const auto a = next.tri(s);
        const auto bspan = f.tri(s);
        for (int i = 0; i < tri; ++i) diff[static_cast<std::size_t>(i)] = a[i] - bspan[i];
        diss += tri_hs_norm_sq(std::span<const double>(diff.data(), diff.size()), l);
      }
      diss = diss * hm / (dt * dt);

      ef = eigen_decompose(next, 0.0);
      evaluate(next, ef, kin, pot, sup, argmax, res_norm, min_lam, min_site);
      energy = kin + pot;
    } catch (const DivergenceError& err) {
      traj.divergence = DivergenceInfo{err.step, err.t, err.sup_e, err.site, min_lam};
      break;
    } catch (const SingularPotentialError&) {
      traj.divergence = DivergenceInfo{k, t + dt, sup, min_site, 0.0};
      break;
    }

    f = std::move(next);
    t += dt;
    ++k;

    traj.t.push_back(t);
    traj.energy.push_back(energy);
    traj.kinetic.push_back(kin);
    traj.potential.push_back(pot);
    traj.sup_e.push_back(sup);
    traj.residual.push_back(res_norm);
    traj.dE_dt.push_back((energy - energy_prev) / dt);
    traj.dissipation.push_back(diss);
    energy_prev = energy;

    if (k % config.snapshot_stride == 0 || t >= config.t_end - t_eps) {
      if (traj.snapshot_times.empty() || traj.snapshot_times.back() < t) {
        traj.snapshots.push_back(f);
        traj.snapshot_times.push_back(t);
      }
    }

    // Singular-family collapse: eigenvalues heading through zero blow the
    // gradient up; catch it while the numbers are still finite.
    if (spec.family == PotentialFamily::Singular && !config.potential_off &&
        min_lam < 1e-8) {
      traj.divergence = DivergenceInfo{k, t, sup, min_site, min_lam};
      break;
    }
  }
  return traj;
}

namespace {

void append_trajectory(Trajectory& base, const Trajectory& tail) {
  const double t0 = base.snapshot_times.empty() ? 0.0 : base.snapshot_times.back();
  for (std::size_t i = 0; i < tail.snapshots.size(); ++i) {
    const double t = t0 + tail.snapshot_times[i];
    if (!base.snapshot_times.empty() && t <= base.snapshot_times.back()) continue;
    base.snapshots.push_back(tail.snapshots[i]);
    base.snapshots.back().set_time(t);
    base.snapshot_times.push_back(t);
  }
  for (std::size_t i = 0; i < tail.t.size(); ++i) {
    base.t.push_back(t0 + tail.t[i]);
    base.energy.push_back(tail.energy[i]);
    base.kinetic.push_back(tail.kinetic[i]);
    base.potential.push_back(tail.potential[i]);
    base.sup_e.push_back(tail.sup_e[i]);
    base.residual.push_back(tail.residual[i]);
    base.dE_dt.push_back(tail.dE_dt[i]);
    base.dissipation.push_back(tail.dissipation[i]);
  }
  base.divergence = tail.divergence;
}

}  // namespace

Trajectory run_to_near_stationarity(const SymmetricMatrixField& initial,
                                    const PotentialSpec& spec, const FlowConfig& config,
                                    double rel, int max_phases) {
  Trajectory traj = run_flow(initial, spec, config);
  if (traj.diverged() || traj.t.empty()) return traj;

  auto relative_residual = [&]() {
    const auto [rf, rn] = elliptic_residual(spec, traj.snapshots.back());
    (void)rf;
    const double E = total_energy(spec, traj.snapshots.back()).total;
    return E > 0.0 ? rn / E : 0.0;
  };

  double dt = traj.t.size() >= 2 ? traj.t.back() - traj.t[traj.t.size() - 2] : traj.t.back();
  for (int phase = 0; phase < max_phases && relative_residual() > rel; ++phase) {
    dt /= 8.0;
    FlowConfig polish = config;
    polish.dt_policy = DtPolicy::fixed(dt);
    polish.t_end = 160.0 * dt;
    polish.snapshot_stride = 40;
    const Trajectory tail = run_flow(traj.snapshots.back(), spec, polish);
    append_trajectory(traj, tail);
    if (traj.diverged()) break;
  }
  return traj;
}

DissipationReport dissipation_report(const Trajectory& traj) {
  if (traj.t.size() < 2) throw ConfigError("dissipation report needs at least two steps");
  DissipationReport rep;
  rep.mismatch.reserve(traj.t.size());
  double prev_t = 0.0;
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    const double dt = traj.t[i] - prev_t;
    prev_t = traj.t[i];
    // Floor at the roundoff scale of the energy differences: E accumulates
    // O(eps E0) noise per step, so dE/dt carries O(eps E0 / dt).
    const double floor = 1e-11 * (1.0 + std::abs(traj.initial_energy)) / dt;
    const double d = traj.dissipation[i];
    const double mis = std::abs(traj.dE_dt[i] + d) / std::max(d, floor);
    rep.mismatch.push_back(mis);
    rep.worst = std::max(rep.worst, mis);
  }
  return rep;
}

}  // namespace sgf
