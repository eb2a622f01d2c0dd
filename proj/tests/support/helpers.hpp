#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "sgf/field.hpp"
#include "sgf/potentials.hpp"

namespace sgf::test {

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int l, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::MatrixXd A(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = gauss(rng);
  return A;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int l) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd A(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) A(i, j) = gauss(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  return Q;
}

// Symmetric matrix with prescribed eigenvalues in a random frame.
inline Eigen::MatrixXd with_spectrum(std::mt19937_64& rng, const std::vector<double>& lambda) {
  const int l = static_cast<int>(lambda.size());
  const Eigen::MatrixXd Q = random_orthogonal(rng, l);
  Eigen::VectorXd d(l);
  for (int i = 0; i < l; ++i) d[i] = lambda[static_cast<std::size_t>(i)];
  return Q * d.asDiagonal() * Q.transpose();
}

// Random symmetric matrix with |eigenvalues| in [lo, hi], mixed signs.
inline Eigen::MatrixXd random_well_conditioned(std::mt19937_64& rng, int l, double lo = 0.3,
                                               double hi = 2.0) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> lambda;
  for (int i = 0; i < l; ++i) lambda.push_back(coin(rng) ? mag(rng) : -mag(rng));
  return with_spectrum(rng, lambda);
}

// Grid-independent smooth symmetric-matrix field: base + low-mode trig terms.
// Evaluating the same description on different grids gives the same continuum
// field, which is what the h-refinement tests need.
struct SmoothFieldSpec {
  Eigen::MatrixXd base;
  struct Term {
    Eigen::MatrixXd coef;
    std::vector<int> wave;  // integer wavevector
    double phase;
  };
  std::vector<Term> terms;

  Eigen::MatrixXd eval(const std::vector<double>& x, double period) const {
    Eigen::MatrixXd M = base;
    for (const Term& t : terms) {
      double arg = t.phase;
      for (std::size_t a = 0; a < x.size(); ++a)
        arg += 2.0 * M_PI * t.wave[a] * x[a] / period;
      M += std::sin(arg) * t.coef;
    }
    return M;
  }
};

inline SmoothFieldSpec random_smooth_spec(std::mt19937_64& rng, int m, int l,
                                          double base_gap = 2.0, double amp = 0.2) {
  SmoothFieldSpec spec;
  spec.base = Eigen::MatrixXd::Zero(l, l);
  for (int i = 0; i < l; ++i) spec.base(i, i) = -1.0 + base_gap * i;
  std::uniform_int_distribution<int> wave(-2, 2);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  for (int term = 0; term < 3; ++term) {
    SmoothFieldSpec::Term t;
    // Fixed coefficient norm keeps the total eigenvalue shift below
    // 3 * amp, so base_gap > 6 * amp guarantees a uniformly simple spectrum.
    t.coef = random_symmetric(rng, l, 1.0);
    t.coef *= amp / t.coef.norm();
    t.wave.resize(static_cast<std::size_t>(m));
    bool nonzero = false;
    for (int a = 0; a < m; ++a) {
      t.wave[static_cast<std::size_t>(a)] = wave(rng);
      nonzero = nonzero || t.wave[static_cast<std::size_t>(a)] != 0;
    }
    if (!nonzero) t.wave[0] = 1;
    t.phase = phase(rng);
    spec.terms.push_back(t);
  }
  return spec;
}

inline SymmetricMatrixField realize(const SmoothFieldSpec& spec, const LatticeDomain& dom,
                                    int l) {
  SymmetricMatrixField f(dom, l);
  std::vector<double> x(static_cast<std::size_t>(dom.dim()));
  for (std::int64_t s = 0; s < dom.site_count(); ++s) {
    const Coords c = dom.coords(s);
    for (int a = 0; a < dom.dim(); ++a) x[static_cast<std::size_t>(a)] = c[a] * dom.spacing();
    f.set_matrix(s, spec.eval(x, dom.period()));
  }
  return f;
}

// Five-point central second derivative of g at 0.
inline double second_derivative(const std::function<double(double)>& g, double step) {
  return (-g(-2 * step) + 16 * g(-step) - 30 * g(0) + 16 * g(step) - g(2 * step)) /
         (12 * step * step);
}

// Central first derivative of g at 0.
inline double first_derivative(const std::function<double(double)>& g, double step) {
  return (g(step) - g(-step)) / (2 * step);
}

}  // namespace sgf::test
