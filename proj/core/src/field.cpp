#include "sgf/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sgf/parallel.hpp"

namespace sgf {

double ScalarField::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  return m;
}

std::int64_t ScalarField::argmax() const {
  std::int64_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<std::int64_t>(i);
  return best;
}

double ScalarField::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * domain.cell_volume();
}

SymmetricMatrixField::SymmetricMatrixField(const LatticeDomain& dom, int l, double t)
    : dom_(dom), l_(l), t_(t),
      data_(static_cast<std::size_t>(dom.site_count()) * (l * (l + 1) / 2), 0.0) {
  if (l < 1) throw ConfigError("matrix size must be >= 1");
}

int SymmetricMatrixField::triangle_index(int i, int j) { return i * (i + 1) / 2 + j; }

Eigen::MatrixXd SymmetricMatrixField::matrix(std::int64_t site) const {
  Eigen::MatrixXd M(l_, l_);
  const auto t = tri(site);
  for (int i = 0; i < l_; ++i)
    for (int j = 0; j <= i; ++j) M(i, j) = M(j, i) = t[triangle_index(i, j)];
  return M;
}

void SymmetricMatrixField::set_matrix(std::int64_t site, const Eigen::MatrixXd& sym) {
  const double scale = 1.0 + sym.cwiseAbs().maxCoeff();
  if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ConfigError("matrix is not symmetric");
  auto t = tri(site);
  for (int i = 0; i < l_; ++i)
    for (int j = 0; j <= i; ++j) t[triangle_index(i, j)] = sym(i, j);
}

double SymmetricMatrixField::hs_norm_sq(std::int64_t site) const {
  return tri_hs_norm_sq(tri(site), l_);
}

bool SymmetricMatrixField::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

GradientField::GradientField(const LatticeDomain& dom, int l)
    : dom_(dom), l_(l),
      data_(static_cast<std::size_t>(dom.site_count()) * dom.dim() * (l * (l + 1) / 2), 0.0) {}

Eigen::MatrixXd GradientField::matrix(std::int64_t site, int axis) const {
  Eigen::MatrixXd M(l_, l_);
  const auto t = tri(site, axis);
  for (int i = 0; i < l_; ++i)
    for (int j = 0; j <= i; ++j)
      M(i, j) = M(j, i) = t[SymmetricMatrixField::triangle_index(i, j)];
  return M;
}

double GradientField::df_norm_sq(std::int64_t site) const {
  double s = 0.0;
  for (int a = 0; a < dom_.dim(); ++a) s += tri_hs_norm_sq(tri(site, a), l_);
  return s;
}

EigenField::EigenField(const LatticeDomain& dom, int l)
    : dom_(dom), l_(l),
      lambda_(static_cast<std::size_t>(dom.site_count()) * l, 0.0),
      frames_(static_cast<std::size_t>(dom.site_count()) * l * l, 0.0),
      gaps_(static_cast<std::size_t>(dom.site_count()), 0.0),
      degenerate_(static_cast<std::size_t>(dom.site_count()), 0) {}

std::int64_t EigenField::degenerate_count() const {
  std::int64_t c = 0;
  for (char d : degenerate_) c += d;
  return c;
}

double tri_hs_norm_sq(std::span<const double> tri, int l) {
  double s = 0.0;
  int idx = 0;
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < i; ++j) s += 2.0 * tri[idx] * tri[idx], ++idx;
    s += tri[idx] * tri[idx], ++idx;
  }
  return s;
}

double tri_hs_dot(std::span<const double> a, std::span<const double> b, int l) {
  double s = 0.0;
  int idx = 0;
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < i; ++j) s += 2.0 * a[idx] * b[idx], ++idx;
    s += a[idx] * b[idx], ++idx;
  }
  return s;
}

SymmetricMatrixField constant_field(const LatticeDomain& dom, const Eigen::MatrixXd& sym) {
  if (sym.rows() != sym.cols()) throw ConfigError("matrix must be square");
  SymmetricMatrixField f(dom, static_cast<int>(sym.rows()));
  f.set_matrix(0, sym);  // validates symmetry once
  const auto first = f.tri(0);
  std::vector<double> proto(first.begin(), first.end());
  for (std::int64_t s = 1; s < dom.site_count(); ++s)
    std::copy(proto.begin(), proto.end(), f.tri(s).begin());
  return f;
}

SymmetricMatrixField grassmannian_winding_field(const LatticeDomain& dom, int l, int k,
                                                const std::vector<int>& winding,
                                                std::uint64_t seed, double perturbation) {
  if (l < 2) throw ConfigError("winding construction requires l >= 2");
  if (k < 1 || k >= l) throw ConfigError("signature k must satisfy 1 <= k < l");
  if (static_cast<int>(winding.size()) != dom.dim())
    throw ConfigError("winding vector length must equal the domain dimension");

  // Smooth seeded perturbation of the rotation angle: two Fourier modes per
  // axis with uniform coefficients. Eigenvalues stay exactly +-1.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  const int modes = 2;
  std::vector<double> ca(dom.dim() * modes), sa(dom.dim() * modes);
  for (auto& v : ca) v = unif(rng);
  for (auto& v : sa) v = unif(rng);

  const int n = dom.sites_per_axis();
  SymmetricMatrixField f(dom, l);
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    const Coords c = dom.coords(s);
    double winding_phase = 0.0;
    for (int a = 0; a < dom.dim(); ++a) winding_phase += winding[a] * double(c[a]) / n;
    double theta = 2.0 * M_PI * winding_phase;
    for (int a = 0; a < dom.dim(); ++a)
      for (int q = 1; q <= modes; ++q) {
        const double arg = 2.0 * M_PI * q * double(c[a]) / n;
        theta += perturbation * (ca[a * modes + q - 1] * std::cos(arg) +
                                 sa[a * modes + q - 1] * std::sin(arg));
      }
    auto t = f.tri(s);
    t[SymmetricMatrixField::triangle_index(0, 0)] = std::cos(theta);
    t[SymmetricMatrixField::triangle_index(1, 0)] = std::sin(theta);
    t[SymmetricMatrixField::triangle_index(1, 1)] = -std::cos(theta);
    // Pad with k-1 entries of +1 and the rest -1 on the diagonal.
    for (int i = 2; i < l; ++i)
      t[SymmetricMatrixField::triangle_index(i, i)] = (i - 2 < k - 1) ? 1.0 : -1.0;
  }
  return f;
}

GradientField spatial_gradient(const SymmetricMatrixField& f) {
  const LatticeDomain& dom = f.domain();
  GradientField g(dom, f.matrix_size());
  const int tri = f.tri_size();
  const double inv2h = 1.0 / (2.0 * dom.spacing());
  parallel_for_chunks(dom.site_count(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t s = b; s < e; ++s) {
      for (int a = 0; a < dom.dim(); ++a) {
        const auto fp = f.tri(dom.neighbor(s, a, +1));
        const auto fm = f.tri(dom.neighbor(s, a, -1));
        auto out = g.tri(s, a);
        for (int i = 0; i < tri; ++i) out[i] = (fp[i] - fm[i]) * inv2h;
      }
    }
  });
  return g;
}

ScalarField kinetic_density(const SymmetricMatrixField& f) {
  const GradientField g = spatial_gradient(f);
  ScalarField e(f.domain(), "kinetic");
  for (std::int64_t s = 0; s < f.domain().site_count(); ++s) e[s] = 0.5 * g.df_norm_sq(s);
  return e;
}

SymmetricMatrixField rough_laplacian(const SymmetricMatrixField& f) {
  const LatticeDomain& dom = f.domain();
  SymmetricMatrixField out(dom, f.matrix_size(), f.time());
  const int tri = f.tri_size();
  const double invh2 = 1.0 / (dom.spacing() * dom.spacing());
  parallel_for_chunks(dom.site_count(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t s = b; s < e; ++s) {
      auto o = out.tri(s);
      const auto fc = f.tri(s);
      for (int a = 0; a < dom.dim(); ++a) {
        const auto fp = f.tri(dom.neighbor(s, a, +1));
        const auto fm = f.tri(dom.neighbor(s, a, -1));
        for (int i = 0; i < tri; ++i) o[i] -= (fp[i] - 2.0 * fc[i] + fm[i]) * invh2;
      }
    }
  });
  return out;
}

namespace {

void decompose_site(std::span<const double> tri, int l, std::span<double> lambda,
                    Eigen::Map<Eigen::MatrixXd> frame) {
  if (l == 2) {
    // Closed form for [[a, b], [b, c]]; exact to roundoff and much cheaper
    // than the iterative solver in the per-site hot loops.
    const double a = tri[0], b = tri[1], c = tri[2];
    const double mid = 0.5 * (a + c);
    const double r = std::hypot(0.5 * (a - c), b);
    lambda[0] = mid - r;
    lambda[1] = mid + r;
    const double phi = 0.5 * std::atan2(2.0 * b, a - c);
    const double cs = std::cos(phi), sn = std::sin(phi);
    frame(0, 0) = -sn;  // eigenvector of the smaller eigenvalue
    frame(1, 0) = cs;
    frame(0, 1) = cs;
    frame(1, 1) = sn;
    return;
  }
  if (l == 3) {
    Eigen::Matrix3d M;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j)
        M(i, j) = M(j, i) = tri[SymmetricMatrixField::triangle_index(i, j)];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
    for (int i = 0; i < 3; ++i) lambda[i] = es.eigenvalues()[i];
    frame = es.eigenvectors();
    return;
  }
  Eigen::MatrixXd M(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j <= i; ++j)
      M(i, j) = M(j, i) = tri[SymmetricMatrixField::triangle_index(i, j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  for (int i = 0; i < l; ++i) lambda[i] = es.eigenvalues()[i];
  frame = es.eigenvectors();
}

}  // namespace

EigenField eigen_decompose(const SymmetricMatrixField& f, double gap_tol) {
  const LatticeDomain& dom = f.domain();
  const int l = f.matrix_size();
  EigenField ef(dom, l);
  parallel_for_chunks(dom.site_count(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t s = b; s < e; ++s) {
      decompose_site(f.tri(s), l, ef.eigenvalues(s), ef.frame(s));
      const auto lam = ef.eigenvalues(s);
      double gap = std::numeric_limits<double>::infinity();
      for (int i = 0; i + 1 < l; ++i) gap = std::min(gap, lam[i + 1] - lam[i]);
      ef.set_gap(s, gap, gap < gap_tol);
    }
  });
  return ef;
}

double default_gap_tol(const SymmetricMatrixField& f) {
  double max_abs = 0.0;
  for (double v : f.raw()) max_abs = std::max(max_abs, std::abs(v));
  return 1e-8 * max_abs;
}

EigenKineticIdentity eigen_kinetic_identity(const SymmetricMatrixField& f, double gap_tol) {
  const LatticeDomain& dom = f.domain();
  const int l = f.matrix_size();
  const int m = dom.dim();
  const double inv2h = 1.0 / (2.0 * dom.spacing());

  const GradientField g = spatial_gradient(f);
  const EigenField ef = eigen_decompose(f, gap_tol);

  EigenKineticIdentity out{ScalarField(dom, "df_sq_direct"), ScalarField(dom, "df_sq_eigen"),
                           ScalarField(dom, "df_sq_mismatch"), {}};

  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    out.direct[s] = g.df_norm_sq(s);

    bool usable = !ef.degenerate(s);
    for (int a = 0; a < m && usable; ++a)
      usable = !ef.degenerate(dom.neighbor(s, a, +1)) && !ef.degenerate(dom.neighbor(s, a, -1));
    if (!usable) {
      out.excluded.push_back(s);
      continue;
    }

    const auto lam = ef.eigenvalues(s);
    const auto frame = ef.frame(s);
    double total = 0.0;
    for (int a = 0; a < m; ++a) {
      const std::int64_t p = dom.neighbor(s, a, +1);
      const std::int64_t q = dom.neighbor(s, a, -1);
      const auto lam_p = ef.eigenvalues(p);
      const auto lam_q = ef.eigenvalues(q);
      const auto frame_p = ef.frame(p);
      const auto frame_q = ef.frame(q);
      for (int i = 0; i < l; ++i) {
        const double dlam = (lam_p[i] - lam_q[i]) * inv2h;
        total += dlam * dlam;
        // Sign-align neighbor eigenvectors to the center frame before differencing.
        const double sp = frame.col(i).dot(frame_p.col(i)) < 0.0 ? -1.0 : 1.0;
        const double sq = frame.col(i).dot(frame_q.col(i)) < 0.0 ? -1.0 : 1.0;
        const Eigen::VectorXd de = (sp * frame_p.col(i) - sq * frame_q.col(i)) * inv2h;
        for (int j = 0; j < l; ++j) {
          if (j == i) continue;
          const double proj = de.dot(frame.col(j));
          const double dl = lam[i] - lam[j];
          total += dl * dl * proj * proj;
        }
      }
    }
    out.eigenbasis[s] = total;
    out.mismatch[s] = std::abs(out.direct[s] - total);
  }
  return out;
}

GrassmannianProjection project_to_grassmannian(const SymmetricMatrixField& f, double tol) {
  const LatticeDomain& dom = f.domain();
  const int l = f.matrix_size();
  const EigenField ef = eigen_decompose(f, 0.0);

  GrassmannianProjection out{SymmetricMatrixField(dom, l, f.time()),
                             ScalarField(dom, "signature"), {}};
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    const auto lam = ef.eigenvalues(s);
    const auto frame = ef.frame(s);
    bool valid = true;
    int positive = 0;
    Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(l, l);
    for (int i = 0; i < l; ++i) {
      if (std::abs(lam[i]) < tol) valid = false;
      const double sign = lam[i] >= 0.0 ? 1.0 : -1.0;
      if (sign > 0.0) ++positive;
      proj += sign * frame.col(i) * frame.col(i).transpose();
    }
    // Symmetrize away solver roundoff before storing.
    proj = 0.5 * (proj + proj.transpose()).eval();
    out.field.set_matrix(s, proj);
    out.signature[s] = positive;
    if (!valid) out.invalid.push_back(s);
  }
  if (static_cast<std::int64_t>(out.invalid.size()) == dom.site_count())
    throw ProjectionError("projection failed: every site has an eigenvalue below tolerance");
  return out;
}

}  // namespace sgf
