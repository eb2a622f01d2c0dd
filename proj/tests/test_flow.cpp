#include <doctest.h>

#include <cmath>
#include <random>

#include "sgf/flow.hpp"
#include "support/helpers.hpp"

using namespace sgf;

TEST_CASE("elliptic residual") {
  const LatticeDomain dom(2, 8, 1.0);

  // Smoothed family at f = 0: both the laplacian and grad W vanish.
  const PotentialSpec sm = PotentialSpec::smoothed(2, 0.5);
  const SymmetricMatrixField zero(dom, 2);
  const auto [rz, nz] = elliptic_residual(sm, zero);
  CHECK(nz == 0.0);
  CHECK(rz.max() == 0.0);

  // Constant involution, singular family: residual = |f^-3| = sqrt(l) pointwise.
  const PotentialSpec sing = PotentialSpec::singular(2);
  const SymmetricMatrixField inv = grassmannian_winding_field(dom, 2, 1, {0, 0}, 1, 0.0);
  const auto [ri, ni] = elliptic_residual(sing, inv);
  for (std::int64_t s = 0; s < dom.site_count(); ++s)
    CHECK(ri[s] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ni == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));  // unit volume
}

TEST_CASE("stable and adaptive step sizes") {
  const LatticeDomain dom(2, 8, 1.0);
  const SymmetricMatrixField f = grassmannian_winding_field(dom, 2, 1, {1, 0}, 1, 0.0);
  const double cfl = dom.spacing() * dom.spacing() / 4.0;

  // Large b: the diffusion limit dominates the explicit scheme.
  const PotentialSpec loose = PotentialSpec::smoothed(2, 100.0);
  CHECK(stable_dt(loose, f, Integrator::ExplicitEuler) == doctest::Approx(0.9 * cfl));

  // The spectral scheme drops the diffusion limit entirely.
  CHECK(stable_dt(loose, f, Integrator::SpectralImex) ==
        doctest::Approx(0.9 / hessian_bound(loose).uniform));

  // Small b: potential-limited, scaling like b^2 for L = 1.
  const double dt3 = stable_dt(PotentialSpec::smoothed(2, 1e-3), f, Integrator::SpectralImex);
  const double dt2 = stable_dt(PotentialSpec::smoothed(2, 1e-2), f, Integrator::SpectralImex);
  CHECK(dt3 / dt2 == doctest::Approx(1e-2).epsilon(1e-9));

  CHECK_THROWS_AS(stable_dt(PotentialSpec::singular(2), f, Integrator::SpectralImex),
                  ConfigError);
  // The field-aware step works for the singular family away from collapse.
  CHECK(adaptive_dt(PotentialSpec::singular(2), f, Integrator::SpectralImex) > 0.0);
}

TEST_CASE("step: fixed points and exact heat decay") {
  const LatticeDomain dom(2, 16, 1.0);
  const PotentialSpec sm = PotentialSpec::smoothed(2, 0.5);

  // f = 0 is stationary for the smoothed family.
  const SymmetricMatrixField zero(dom, 2);
  for (Integrator integ : {Integrator::ExplicitEuler, Integrator::SpectralImex}) {
    const SymmetricMatrixField next = step(zero, sm, 1e-3, integ);
    for (double v : next.raw()) CHECK(v == 0.0);
  }

  // Potential off: a single Fourier mode decays by exactly exp(-mu dt).
  Eigen::Matrix2d A;
  A << 1, -0.3, -0.3, 0.4;
  SymmetricMatrixField mode(dom, 2);
  for (std::int64_t s = 0; s < dom.site_count(); ++s)
    mode.set_matrix(s, std::sin(2 * M_PI * (2.0 * dom.coordinate(s, 0))) * A);
  const double h = dom.spacing();
  const double mu = 2.0 / (h * h) * (1.0 - std::cos(2 * M_PI * 2 * h));
  const double dt = 7e-3;
  SymmetricMatrixField evolved = mode;
  for (int k = 0; k < 10; ++k) evolved = step(evolved, sm, dt, Integrator::SpectralImex, true);
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    const double decay = std::exp(-mu * 10 * dt);
    const Eigen::MatrixXd expect = decay * mode.matrix(s);
    CHECK((evolved.matrix(s) - expect).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + decay));
  }

  // One explicit Euler step decreases the energy on a rough random field.
  std::mt19937_64 rng(41);
  const SymmetricMatrixField f = test::realize(test::random_smooth_spec(rng, 2, 2), dom, 2);
  const double dt_e = stable_dt(sm, f, Integrator::ExplicitEuler);
  const SymmetricMatrixField g = step(f, sm, dt_e, Integrator::ExplicitEuler);
  CHECK(total_energy(sm, g).total < total_energy(sm, f).total);
}

TEST_CASE("run_flow: stationary data stays put") {
  const LatticeDomain dom(2, 8, 1.0);
  const PotentialSpec sm = PotentialSpec::smoothed(2, 0.5);
  FlowConfig cfg;
  cfg.dt_policy = DtPolicy::fixed(1e-3);
  cfg.t_end = 0.05;
  cfg.snapshot_stride = 10;
  const Trajectory traj = run_flow(SymmetricMatrixField(dom, 2), sm, cfg);
  REQUIRE(!traj.diverged());
  REQUIRE(traj.t.size() == 50);
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    CHECK(traj.energy[i] == doctest::Approx(traj.initial_energy).epsilon(1e-12));
    CHECK(traj.residual[i] == 0.0);
  }
  // dissipation report: 0/0 guarded to zero
  CHECK(dissipation_report(traj).worst == 0.0);
}

TEST_CASE("run_flow: smoothed winding run dissipates energy") {
  const LatticeDomain dom(2, 16, 8.0);
  const PotentialSpec sm = PotentialSpec::smoothed(2, 0.1);
  const SymmetricMatrixField f0 = grassmannian_winding_field(dom, 2, 1, {1, 0}, 3, 0.2);
  FlowConfig cfg;
  cfg.dt_policy = DtPolicy::fixed(stable_dt(sm, f0, Integrator::SpectralImex));
  cfg.t_end = 100 * cfg.dt_policy.dt;
  cfg.snapshot_stride = 20;
  const Trajectory traj = run_flow(f0, sm, cfg);
  REQUIRE(!traj.diverged());
  REQUIRE(traj.t.size() == 100);

  double prev = traj.initial_energy;
  for (double e : traj.energy) {
    CHECK(e <= prev + 1e-10 * traj.initial_energy);
    prev = e;
  }
  const DissipationReport rep = dissipation_report(traj);
  CHECK(rep.worst < 0.15);

  // snapshots at stride 20 plus t = 0 and the final step
  CHECK(traj.snapshots.size() == 6);
  CHECK(traj.snapshot_times.front() == 0.0);
  CHECK(traj.snapshot_times.back() == doctest::Approx(cfg.t_end));
}

TEST_CASE("run_flow: forced singular blow-up is reported, not thrown") {
  const LatticeDomain dom(2, 8, 1.0);
  const PotentialSpec sing = PotentialSpec::singular(2);
  SymmetricMatrixField f0 = grassmannian_winding_field(dom, 2, 1, {2, 1}, 5, 0.3);
  for (double& v : f0.raw()) v *= 0.1;  // min eigenvalue 0.1
  FlowConfig cfg;
  cfg.dt_policy = DtPolicy::fixed(0.05);  // far beyond the diffusion limit
  cfg.t_end = 60.0;
  cfg.integrator = Integrator::ExplicitEuler;
  const Trajectory traj = run_flow(f0, sing, cfg);
  REQUIRE(traj.diverged());
  CHECK(traj.divergence->step >= 0);
  CHECK(traj.divergence->t > 0.0);
  CHECK(traj.divergence->site >= 0);
}

TEST_CASE("dissipation mismatch shrinks linearly with dt for explicit Euler") {
  const LatticeDomain dom(2, 16, 1.0);
  const PotentialSpec sm = PotentialSpec::smoothed(2, 0.5);
  const SymmetricMatrixField f0 = grassmannian_winding_field(dom, 2, 1, {1, 0}, 3, 0.2);
  const double dt0 = stable_dt(sm, f0, Integrator::ExplicitEuler);

  auto worst_at = [&](double dt) {
    FlowConfig cfg;
    cfg.dt_policy = DtPolicy::fixed(dt);
    cfg.t_end = 40 * dt0;  // same physical horizon for both runs
    cfg.integrator = Integrator::ExplicitEuler;
    const Trajectory traj = run_flow(f0, sm, cfg);
    REQUIRE(!traj.diverged());
    return dissipation_report(traj).worst;
  };
  const double w1 = worst_at(dt0);
  const double w2 = worst_at(dt0 / 2.0);
  CHECK(w2 < w1);
  CHECK(w1 / w2 == doctest::Approx(2.0).epsilon(0.5));
}

TEST_CASE("orthogonal equivariance of the flow") {
  const LatticeDomain dom(2, 8, 1.0);
  const PotentialSpec sm = PotentialSpec::smoothed(2, 0.3);
  std::mt19937_64 rng(43);
  const SymmetricMatrixField f0 = test::realize(test::random_smooth_spec(rng, 2, 2), dom, 2);
  const Eigen::MatrixXd Q = test::random_orthogonal(rng, 2);

  SymmetricMatrixField g0(dom, 2);
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    Eigen::MatrixXd conj = Q.transpose() * f0.matrix(s) * Q;
    g0.set_matrix(s, 0.5 * (conj + conj.transpose()));
  }

  FlowConfig cfg;
  cfg.dt_policy = DtPolicy::fixed(2e-4);
  cfg.t_end = 100 * 2e-4;
  const Trajectory tf = run_flow(f0, sm, cfg);
  const Trajectory tg = run_flow(g0, sm, cfg);
  REQUIRE(!tf.diverged());
  REQUIRE(!tg.diverged());
  const SymmetricMatrixField& ff = tf.snapshots.back();
  const SymmetricMatrixField& gg = tg.snapshots.back();
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    const Eigen::MatrixXd expect = Q.transpose() * ff.matrix(s) * Q;
    CHECK((gg.matrix(s) - expect).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("spectral diffusion symbol matches the second-difference operator") {
  const LatticeDomain dom(2, 8, 1.0);
  const SpectralDiffusion diff(dom);
  const double h = dom.spacing();
  // mode (1, 3)
  const std::int64_t idx = 1 * 8 + 3;
  const double expect = 2.0 / (h * h) * (2.0 - std::cos(2 * M_PI * 1 / 8.0) -
                                         std::cos(2 * M_PI * 3 / 8.0));
  CHECK(diff.symbol()[static_cast<std::size_t>(idx)] == doctest::Approx(expect));
}
