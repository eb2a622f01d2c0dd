#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgf/lattice.hpp"

namespace sgf {

// Per-site real scalar samples over a domain.
struct ScalarField {
  ScalarField() = default;
  ScalarField(const LatticeDomain& dom, std::string label_, double init = 0.0)
      : domain(dom), label(std::move(label_)),
        values(static_cast<std::size_t>(dom.site_count()), init) {}

  LatticeDomain domain{2, 4, 1.0};
  std::string label;
  std::vector<double> values;

  double& operator[](std::int64_t site) { return values[static_cast<std::size_t>(site)]; }
  double operator[](std::int64_t site) const { return values[static_cast<std::size_t>(site)]; }
  double max() const;
  std::int64_t argmax() const;
  // Lattice integral: sum * h^m.
  double integral() const;
};

// One l x l real symmetric matrix per site. Only the lower triangle is stored
// (row-major, row i holds entries j <= i), so symmetry is exact by storage.
class SymmetricMatrixField {
 public:
  SymmetricMatrixField() = default;
  SymmetricMatrixField(const LatticeDomain& dom, int l, double t = 0.0);

  const LatticeDomain& domain() const { return dom_; }
  int matrix_size() const { return l_; }
  int tri_size() const { return l_ * (l_ + 1) / 2; }
  double time() const { return t_; }
  void set_time(double t) { t_ = t; }

  Eigen::MatrixXd matrix(std::int64_t site) const;
  void set_matrix(std::int64_t site, const Eigen::MatrixXd& sym);

  std::span<double> tri(std::int64_t site) {
    return {data_.data() + static_cast<std::size_t>(site) * tri_size(),
            static_cast<std::size_t>(tri_size())};
  }
  std::span<const double> tri(std::int64_t site) const {
    return {data_.data() + static_cast<std::size_t>(site) * tri_size(),
            static_cast<std::size_t>(tri_size())};
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  // Hilbert-Schmidt norm squared of the matrix at `site`.
  double hs_norm_sq(std::int64_t site) const;
  bool all_finite() const;

  static int triangle_index(int i, int j);  // requires j <= i

 private:
  LatticeDomain dom_{2, 4, 1.0};
  int l_ = 0;
  double t_ = 0.0;
  std::vector<double> data_;
};

// Per-site spatial derivatives: m symmetric matrices (one per axis).
class GradientField {
 public:
  GradientField(const LatticeDomain& dom, int l);

  const LatticeDomain& domain() const { return dom_; }
  int matrix_size() const { return l_; }
  int tri_size() const { return l_ * (l_ + 1) / 2; }

  std::span<double> tri(std::int64_t site, int axis) {
    const std::size_t base =
        (static_cast<std::size_t>(site) * dom_.dim() + axis) * tri_size();
    return {data_.data() + base, static_cast<std::size_t>(tri_size())};
  }
  std::span<const double> tri(std::int64_t site, int axis) const {
    const std::size_t base =
        (static_cast<std::size_t>(site) * dom_.dim() + axis) * tri_size();
    return {data_.data() + base, static_cast<std::size_t>(tri_size())};
  }

  Eigen::MatrixXd matrix(std::int64_t site, int axis) const;

  // Sum over axes of the Hilbert-Schmidt norm squared, i.e. |df|^2 at `site`.
  double df_norm_sq(std::int64_t site) const;

 private:
  LatticeDomain dom_;
  int l_;
  std::vector<double> data_;
};

// Per-site eigendecomposition: ascending eigenvalues, orthonormal frame
// columns, smallest eigenvalue gap, and a degeneracy flag.
class EigenField {
 public:
  EigenField(const LatticeDomain& dom, int l);

  const LatticeDomain& domain() const { return dom_; }
  int matrix_size() const { return l_; }

  std::span<double> eigenvalues(std::int64_t site) {
    return {lambda_.data() + static_cast<std::size_t>(site) * l_, static_cast<std::size_t>(l_)};
  }
  std::span<const double> eigenvalues(std::int64_t site) const {
    return {lambda_.data() + static_cast<std::size_t>(site) * l_, static_cast<std::size_t>(l_)};
  }
  // Column-major l x l frame; column i is the eigenvector of eigenvalue i.
  Eigen::Map<const Eigen::MatrixXd> frame(std::int64_t site) const {
    return {frames_.data() + static_cast<std::size_t>(site) * l_ * l_, l_, l_};
  }
  Eigen::Map<Eigen::MatrixXd> frame(std::int64_t site) {
    return {frames_.data() + static_cast<std::size_t>(site) * l_ * l_, l_, l_};
  }

  double gap(std::int64_t site) const { return gaps_[static_cast<std::size_t>(site)]; }
  bool degenerate(std::int64_t site) const { return degenerate_[static_cast<std::size_t>(site)] != 0; }
  void set_gap(std::int64_t site, double g, bool degen) {
    gaps_[static_cast<std::size_t>(site)] = g;
    degenerate_[static_cast<std::size_t>(site)] = degen ? 1 : 0;
  }
  std::int64_t degenerate_count() const;

 private:
  LatticeDomain dom_;
  int l_;
  std::vector<double> lambda_;
  std::vector<double> frames_;
  std::vector<double> gaps_;
  std::vector<char> degenerate_;
};

// --- constructors -----------------------------------------------------------

// Every site equal to `sym` (validated symmetric), time stamp 0.
SymmetricMatrixField constant_field(const LatticeDomain& dom, const Eigen::MatrixXd& sym);

// Involution-valued initial data: at every site exactly k eigenvalues are +1
// and l-k are -1. For l = 2, k = 1 the field rotates through
// [[cos t, sin t], [sin t, -cos t]] with t(x) = 2*pi*(winding . x)/period plus
// a seeded smooth frame perturbation of amplitude `perturbation`; other l pad
// the 2x2 block with constant +-1 diagonal entries.
SymmetricMatrixField grassmannian_winding_field(const LatticeDomain& dom, int l, int k,
                                                const std::vector<int>& winding,
                                                std::uint64_t seed,
                                                double perturbation = 0.0);

// --- calculus ----------------------------------------------------------------

// Central differences (f(x+he_j) - f(x-he_j)) / 2h with periodic wrap.
GradientField spatial_gradient(const SymmetricMatrixField& f);

// e_kin = (1/2) sum_j |d_j f|^2 per site.
ScalarField kinetic_density(const SymmetricMatrixField& f);

// d*df, the positive operator: -sum_j (f(x+he_j) - 2f(x) + f(x-he_j)) / h^2.
SymmetricMatrixField rough_laplacian(const SymmetricMatrixField& f);

// Per-site eigendecomposition; sites with gap < gap_tol are flagged, not fatal.
EigenField eigen_decompose(const SymmetricMatrixField& f, double gap_tol);

// Default degeneracy tolerance: 1e-8 * max |lambda| over the field.
double default_gap_tol(const SymmetricMatrixField& f);

struct EigenKineticIdentity {
  ScalarField direct;     // |df|^2 from spatial_gradient
  ScalarField eigenbasis; // sum |d lambda_i|^2 + sum (lambda_i-lambda_j)^2 <de_i,e_j>^2
  ScalarField mismatch;   // |direct - eigenbasis|, 0 at excluded sites
  std::vector<std::int64_t> excluded;  // degenerate sites, not evaluated
};

// Both sides of the eigenbasis kinetic decomposition. Frame derivatives use
// central differences with neighbor frames sign-aligned to the center frame.
EigenKineticIdentity eigen_kinetic_identity(const SymmetricMatrixField& f, double gap_tol);

struct GrassmannianProjection {
  SymmetricMatrixField field;   // eigenvalues replaced by their signs
  ScalarField signature;        // count of positive eigenvalues per site
  std::vector<std::int64_t> invalid;  // sites with some |lambda_i| < tol
};

// Nearest involution per site (lambda -> sign lambda). Throws ProjectionError
// when every site is invalid.
GrassmannianProjection project_to_grassmannian(const SymmetricMatrixField& f, double tol);

// --- triangle helpers (used by hot loops and tests) --------------------------

// |A|_HS^2 from a lower-triangle span.
double tri_hs_norm_sq(std::span<const double> tri, int l);
// <A, B>_HS from lower-triangle spans.
double tri_hs_dot(std::span<const double> a, std::span<const double> b, int l);

}  // namespace sgf
