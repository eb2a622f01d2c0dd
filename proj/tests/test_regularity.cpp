#include <doctest.h>

#include <cmath>
#include <random>

#include "sgf/regularity.hpp"
#include "sgf/scenarios.hpp"
#include "support/helpers.hpp"

using namespace sgf;

namespace {

ScalarField make_scalar(const LatticeDomain& dom, const std::function<double(std::int64_t)>& f) {
  ScalarField e(dom, "e");
  for (std::int64_t s = 0; s < dom.site_count(); ++s) e[s] = f(s);
  return e;
}

Trajectory constant_traj(const LatticeDomain& dom, const Eigen::MatrixXd& c, int count,
                         double dt) {
  Trajectory t;
  for (int i = 0; i < count; ++i) {
    t.snapshots.push_back(constant_field(dom, c));
    t.snapshots.back().set_time(i * dt);
    t.snapshot_times.push_back(i * dt);
  }
  return t;
}

}  // namespace

TEST_CASE("moser elliptic check") {
  const LatticeDomain dom(2, 32, 1.0);
  const double h = dom.spacing();

  // e == 0: both sides vanish, pass
  const ScalarField zero = make_scalar(dom, [](std::int64_t) { return 0.0; });
  const BoundCheck z = moser_elliptic_check(zero, 0.0, 0, 4 * h, 0.5, 1.0, 16.0);
  CHECK(z.pass);
  CHECK(z.lhs == 0.0);

  // e == c, C0 = 0: closed form on both sides
  const double c = 2.7;
  const ScalarField cf = make_scalar(dom, [&](std::int64_t) { return c; });
  const double R = 6 * h;
  const double delta = 0.5;
  const double C2 = 16.0;
  const BoundCheck bc = moser_elliptic_check(cf, 0.0, 0, R, delta, 1.0, C2);
  const double vol = static_cast<double>(dom.ball_sites(0, R).size()) * dom.cell_volume();
  CHECK(bc.lhs == doctest::Approx(c));
  CHECK(bc.rhs == doctest::Approx(std::pow(C2 / ((1 - delta) * R * (1 - delta) * R), 1.0) * c * vol));
  CHECK(bc.pass == (bc.rhs >= bc.lhs));

  // delta = 0 is the single-point estimate at the center
  const ScalarField spiky = make_scalar(dom, [&](std::int64_t s) { return s == 0 ? 5.0 : 1.0; });
  const BoundCheck sp = moser_elliptic_check(spiky, 0.0, 0, R, 0.0, 1.0, C2);
  CHECK(sp.lhs == doctest::Approx(5.0));

  // enlarging constants never turns pass into fail
  std::mt19937_64 rng(301);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const ScalarField noisy = make_scalar(dom, [&](std::int64_t) { return unif(rng); });
  for (double C0 : {0.0, 1.0}) {
    const BoundCheck small = moser_elliptic_check(noisy, C0, 0, R, 0.5, 1.0, 16.0);
    const BoundCheck big = moser_elliptic_check(noisy, C0, 0, R, 0.5, 2.0, 64.0);
    if (small.pass) CHECK(big.pass);
  }
}

TEST_CASE("moser parabolic check reduces to elliptic arithmetic for static fields") {
  const LatticeDomain dom(2, 32, 1.0);
  const double h = dom.spacing();
  Eigen::Matrix2d c;
  c << 1.0, 0.3, 0.3, -1.0;
  const PotentialSpec sm = PotentialSpec::smoothed(2, 0.5);
  const Trajectory traj = constant_traj(dom, c, 41, 0.005);
  const TrajectoryEnergy energy(sm, traj);

  const double R = 6 * h;
  const double delta = 0.5;
  const double t0 = 0.1;
  const BoundCheck par = moser_parabolic_check(energy, 0.0, 0, t0, R, delta, 1.0, 16.0);
  const ScalarField e = energy_density(sm, traj.snapshots.front());
  const BoundCheck ell = moser_elliptic_check(e, 0.0, 0, R, delta, 1.0, 16.0);

  // lhs agree; rhs differ by the window length and the exponent
  CHECK(par.lhs == doctest::Approx(ell.lhs));
  const double base = 16.0 / ((1 - delta) * R * (1 - delta) * R);
  const double ell_integral = ell.rhs / std::pow(base, dom.dim() / 2.0);
  const double window = 2 * R * R;  // [t0 - R^2, t0 + R^2], fully covered
  CHECK(par.rhs == doctest::Approx(std::pow(base, (dom.dim() + 2) / 2.0) * ell_integral *
                                   window).epsilon(0.05));

  // e == 0 trajectory passes trivially
  const TrajectoryEnergy zero(PotentialSpec::smoothed(2, 1e30), traj);
  const BoundCheck z = moser_parabolic_check(zero, 0.0, 0, t0, R, delta, 1.0, 16.0);
  CHECK(z.pass);
}

TEST_CASE("h profile") {
  const LatticeDomain dom(2, 32, 1.0);
  const double h = dom.spacing();
  const double R1 = 5 * h;  // below (3/4) R_M = 6h

  const ScalarField zero = make_scalar(dom, [](std::int64_t) { return 0.0; });
  const HProfile hz = h_profile(zero, 0, R1, 0.0, {0.0, h, 2 * h});
  for (const auto& p : hz.points) CHECK(p.h == 0.0);

  // e == c, p0 = 0: h(sigma) = (R1 - sigma)^2 c, maximized at sigma = 0
  const double c = 1.7;
  const ScalarField cf = make_scalar(dom, [&](std::int64_t) { return c; });
  const HProfile hc = h_profile(cf, 0, R1, 0.0, {0.0, h, 2 * h, 3 * h});
  CHECK(hc.sigma0 == 0.0);
  for (const auto& p : hc.points)
    CHECK(p.h == doctest::Approx((R1 - p.sigma) * (R1 - p.sigma) * c));

  // peaked field: argmax against brute force over the sample grid
  std::mt19937_64 rng(302);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::int64_t bump = dom.site_at({3, 2});
  const ScalarField peaked = make_scalar(dom, [&](std::int64_t s) {
    return unif(rng) + (dom.periodic_distance(bump, s) < 2.5 * h ? 4.0 : 0.0);
  });
  const std::vector<double> sigmas = {0.0, h, 2 * h, 3 * h, 4 * h};
  const HProfile hp = h_profile(peaked, 0, R1, 0.7, sigmas);
  double best = -1.0;
  double best_sigma = 0.0;
  for (double sigma : sigmas) {
    double sup = sigma == 0.0 ? peaked[0] : 0.0;
    if (sigma > 0.0)
      for (std::int64_t s : dom.ball_sites(0, sigma)) sup = std::max(sup, peaked[s]);
    const double v = std::pow(R1 - sigma, 2.0 - 0.7) * sup;
    if (v > best) {
      best = v;
      best_sigma = sigma;
    }
  }
  CHECK(hp.sigma0 == doctest::Approx(best_sigma));
  CHECK(h_profile(peaked, 0, R1, 0.7, sigmas).e0 ==
        doctest::Approx(hp.e0));  // deterministic

  CHECK_THROWS_AS(h_profile(cf, 0, 0.9 * dom.cutoff_radius(), 0.0, {0.0}), DomainError);
  CHECK_THROWS_AS(h_profile(cf, 0, R1, 0.0, {R1}), DomainError);
}

TEST_CASE("epsilon scan, elliptic") {
  const LatticeDomain dom(2, 32, 1.0);
  const double h = dom.spacing();
  SiteSet centers;
  centers.sites = {0, dom.site_at({16, 16}), dom.site_at({5, 20})};
  const std::vector<double> radii = {3 * h, 4 * h, 6 * h};

  // negligible energy: triggers everywhere, implied constants ~ 0
  const PotentialSpec tiny = PotentialSpec::smoothed(2, 1e30);
  const SymmetricMatrixField involution =
      grassmannian_winding_field(dom, 2, 1, {0, 0}, 1, 0.0);
  const EpsRegReport all = epsilon_scan_elliptic(involution.domain() == dom ? tiny : tiny,
                                                 involution, 0.5,
                                                 Epsilon0Rule::fixed_value(1e-6), radii,
                                                 centers, 0.0);
  CHECK(all.trigger_count == static_cast<std::int64_t>(centers.size() * radii.size()));
  CHECK(all.max_implied_const < 1e-12);

  // constant order-one energy with eps0 below every Phi: empty trigger set
  const PotentialSpec sm = PotentialSpec::smoothed(2, 5.0);
  const EpsRegReport none = epsilon_scan_elliptic(sm, involution, 0.5,
                                                  Epsilon0Rule::calibrated(4.0), radii,
                                                  centers, 2.0);
  CHECK(none.empty_trigger_set());
  // closed form: Phi = 2 W vol(B_R)/R^m stays above eps0 = b/(2C)
  const double wc = potential_value(sm, Eigen::MatrixXd(involution.matrix(0)));
  const double phi0 = elliptic_phi(sm, involution, 0, 3 * h, 2.0, PhiWeighting::ChapterEps);
  CHECK(phi0 > none.eps0);
  CHECK(phi0 == doctest::Approx(2.0 * wc *
                                static_cast<double>(dom.ball_sites(0, 3 * h).size()) *
                                dom.cell_volume() / std::pow(3 * h, 2.0))
                    .epsilon(0.05));

  // shrinking eps0 shrinks the trigger set (inclusion)
  std::mt19937_64 rng(303);
  const SymmetricMatrixField f = test::realize(test::random_smooth_spec(rng, 2, 2), dom, 2);
  const PotentialSpec sp = PotentialSpec::smoothed(2, 0.5);
  const EpsRegReport big = epsilon_scan_elliptic(sp, f, 0.5, Epsilon0Rule::fixed_value(3.0),
                                                 radii, centers, 0.5);
  const EpsRegReport small = epsilon_scan_elliptic(sp, f, 0.5, Epsilon0Rule::fixed_value(0.8),
                                                   radii, centers, 0.5);
  for (std::size_t i = 0; i < big.probes.size(); ++i)
    if (small.probes[i].triggered) CHECK(big.probes[i].triggered);

  CHECK_THROWS_AS(epsilon_scan_elliptic(sp, f, 0.9, Epsilon0Rule::fixed_value(1.0), radii,
                                        centers, 0.5),
                  ConfigError);
}

TEST_CASE("bad set thresholds") {
  const LatticeDomain dom(2, 16, 1.0);

  const ScalarField low = make_scalar(dom, [](std::int64_t) { return 0.5; });
  CHECK(bad_set(low, 1.0).empty());  // max e < 1/b

  const ScalarField high = make_scalar(dom, [](std::int64_t) { return 3.0; });
  CHECK(bad_set(high, 0.5).size() == static_cast<std::size_t>(dom.site_count()));

  // two-level field: exactly the high plateau crosses the threshold
  const ScalarField plateau =
      make_scalar(dom, [&](std::int64_t s) { return s < 100 ? 4.0 : 1.0; });
  const SiteSet sel = bad_set(plateau, 0.5);  // threshold 2
  CHECK(sel.size() == 100);
  for (std::int64_t s : sel) CHECK(s < 100);

  // antitone inclusion: b1 <= b2 implies Sigma_b1 subset Sigma_b2
  std::mt19937_64 rng(304);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  const ScalarField noisy = make_scalar(dom, [&](std::int64_t) { return unif(rng); });
  const SiteSet s1 = bad_set(noisy, 0.3);
  const SiteSet s2 = bad_set(noisy, 0.6);
  for (std::int64_t s : s1)
    CHECK(std::find(s2.begin(), s2.end(), s) != s2.end());

  CHECK_THROWS_AS(bad_set(noisy, 0.0), ConfigError);
}

TEST_CASE("vitali cover") {
  const LatticeDomain dom(2, 32, 1.0);
  const double h = dom.spacing();

  // single site
  SiteSet one;
  one.sites = {5};
  const CoverReport c1 = vitali_cover(dom, one, 2 * h, 1.0);
  CHECK(c1.J == 1);
  CHECK(c1.covered);
  CHECK(c1.measure == doctest::Approx(6 * h));

  // two sites beyond 2r: two centers
  SiteSet two;
  two.sites = {dom.site_at({0, 0}), dom.site_at({0, 10})};
  const CoverReport c2 = vitali_cover(dom, two, 2 * h, 1.0);
  CHECK(c2.J == 2);

  // two sites at 1.5r: one center, the other inside 3r
  const double r = 2 * h;
  SiteSet close;
  close.sites = {dom.site_at({0, 0}), dom.site_at({0, 3})};  // distance 3h = 1.5 r
  const CoverReport c3 = vitali_cover(dom, close, r, 1.0);
  CHECK(c3.J == 1);
  CHECK(c3.covered);

  // invariants on random site sets
  std::mt19937_64 rng(305);
  std::uniform_int_distribution<std::int64_t> pick(0, dom.site_count() - 1);
  for (int trial = 0; trial < 20; ++trial) {
    SiteSet sites;
    for (int i = 0; i < 60; ++i) sites.sites.push_back(pick(rng));
    std::sort(sites.sites.begin(), sites.sites.end());
    sites.sites.erase(std::unique(sites.sites.begin(), sites.sites.end()), sites.sites.end());
    const double rr = (1 + trial % 4) * h;
    const CoverReport rep = vitali_cover(dom, sites, rr, dom.dim() - 1.0);
    CHECK(rep.covered);
    for (std::size_t i = 0; i < rep.centers.size(); ++i)
      for (std::size_t j = i + 1; j < rep.centers.size(); ++j)
        CHECK(dom.periodic_distance(rep.centers[i], rep.centers[j]) > 2 * rr);
    // determinism
    const CoverReport rep2 = vitali_cover(dom, sites, rr, dom.dim() - 1.0);
    CHECK(rep2.centers == rep.centers);
  }

  // well-separated clusters: J is order-independent
  SiteSet clusters;
  clusters.sites = {dom.site_at({2, 2}), dom.site_at({2, 3}), dom.site_at({18, 18}),
                    dom.site_at({18, 19})};
  SiteSet reversed;
  reversed.sites = {clusters.sites[3], clusters.sites[2], clusters.sites[1],
                    clusters.sites[0]};
  CHECK(vitali_cover(dom, clusters, h, 1.0).J == 2);
  CHECK(vitali_cover(dom, reversed, h, 1.0).J == 2);
}

TEST_CASE("hausdorff sweep on a mild scenario: empty bad sets give zero measure") {
  const LatticeDomain dom(2, 16, 2.0);
  FlowScenario sc{grassmannian_winding_field(dom, 2, 1, {1, 0}, 11, 0.1), FlowConfig{}};
  sc.flow.dt_policy = DtPolicy::adaptive();
  sc.flow.t_end = 1.0;
  sc.flow.snapshot_stride = 20;

  const HausdorffSweep sweep = hausdorff_sweep(2, 1, sc, {1.0, 0.5}, 1.0);
  REQUIRE(sweep.rows.size() == 2);
  CHECK(sweep.dimension == doctest::Approx(1.0));
  for (const HausdorffRow& row : sweep.rows) {
    CHECK(row.r == doctest::Approx(2.0 * std::sqrt(4.0 * row.b * row.b)));
    if (row.bad_sites == 0) CHECK(row.H == 0.0);
    // the relaxed winding state has e ~ 2 kappa ~ 2 pi, below both thresholds
    CHECK(row.bad_sites == 0);
  }
  CHECK_THROWS_AS(hausdorff_sweep(2, 1, sc, {0.5, 1.0}, 1.0), ConfigError);
}

TEST_CASE("sup-e sweep smoke") {
  const LatticeDomain dom(2, 16, 2.0);
  FlowScenario sc{grassmannian_winding_field(dom, 2, 1, {1, 0}, 11, 0.1), FlowConfig{}};
  sc.flow.dt_policy = DtPolicy::adaptive();
  sc.flow.t_end = 1.0;
  sc.flow.snapshot_stride = 20;

  const SupESweep sweep = sup_e_bound_sweep(2, sc, {1.0, 0.3}, 1.0);
  REQUIRE(sweep.rows.size() == 2);
  for (const SupERow& row : sweep.rows) {
    CHECK(row.sup_e > 0.0);
    CHECK(row.bound1 == doctest::Approx(std::pow(row.b, -2.0) * row.E_b));
  }
  CHECK(sweep.C_required > 0.0);
}

TEST_CASE("near stationary gate") {
  const LatticeDomain dom(2, 8, 1.0);
  const PotentialSpec sm = PotentialSpec::smoothed(2, 0.5);
  CHECK(near_stationary(sm, SymmetricMatrixField(dom, 2)));
  const SymmetricMatrixField w = grassmannian_winding_field(dom, 2, 1, {2, 0}, 1, 0.0);
  CHECK(!near_stationary(sm, w));
}
