#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sgf/field.hpp"

namespace sgf {

enum class PotentialFamily {
  Singular,     // W(f)  = 1/2 tr(f^-2); blows up as det f -> 0
  Smoothed,     // W_b   = 1/2 tr((f^2 + bI)^-1)
  HigherPower,  // W_b^L = 1/(2L) tr((f^2L + bI)^-1)
};

struct PotentialSpec {
  PotentialFamily family = PotentialFamily::Smoothed;
  double b = 1.0;  // smoothing parameter; unused for Singular
  int L = 1;       // power; 1 for Singular/Smoothed
  int l = 2;       // matrix size

  static PotentialSpec singular(int l);
  static PotentialSpec smoothed(int l, double b);
  static PotentialSpec higher_power(int l, double b, int L);

  void validate() const;
  // Exponent base used in the epsilon_0 and bad-set scale rules: b^(1/L).
  double b_pow_inv_L() const;
};

// Scalar eigenvalue profiles. W(f) = sum_i w(lambda_i); the gradient and
// Hessian come from dw and d2w via the spectral calculus.
double potential_profile(const PotentialSpec& spec, double lambda);      // w
double potential_profile_d1(const PotentialSpec& spec, double lambda);   // w'
double potential_profile_d2(const PotentialSpec& spec, double lambda);   // w''

// W at one matrix, computed from eigenvalues.
double potential_value(const PotentialSpec& spec, const Eigen::MatrixXd& f);
double potential_value(const PotentialSpec& spec, std::span<const double> eigenvalues);

// grad W(f) = sum_i w'(lambda_i) e_i e_i^T.
Eigen::MatrixXd potential_gradient(const PotentialSpec& spec, const Eigen::MatrixXd& f);

// <d grad W(f), df> summed over the m directions: diagonal terms use
// w''(lambda_i), off-diagonal terms the divided difference
// (w'(lambda_i) - w'(lambda_j)) / (lambda_i - lambda_j), replaced by w'' at the
// midpoint when |lambda_i - lambda_j| < 1e-7 (1 + |lambda_i|).
double hessian_contraction(const PotentialSpec& spec, const Eigen::MatrixXd& f,
                           const std::vector<Eigen::MatrixXd>& df);

// Analytic stiffness coefficients for the smoothed families:
//   |hessian_contraction| <= uniform * |df|^2          (uniform ~ b^(-1-1/L))
//   |hessian_contraction| <= quadratic * e(f) * |df|^2 * 2   (quadratic ~ b^(-1/L))
// The b-independent prefactors are calibrated once per (l, L): the uniform one
// by a deterministic scan of |w''| in the scale-free variable, the quadratic
// one by seeded sampling with a safety margin. Throws ConfigError for the
// singular family, which admits no uniform bound.
struct HessianBound {
  double uniform = 0.0;
  double quadratic = 0.0;
};
HessianBound hessian_bound(const PotentialSpec& spec);

// Per-site e(f) = kinetic + W; propagates SingularPotentialError.
ScalarField energy_density(const PotentialSpec& spec, const SymmetricMatrixField& f);
ScalarField potential_density(const PotentialSpec& spec, const SymmetricMatrixField& f);
// grad W applied per site (hot path of the flow).
SymmetricMatrixField potential_gradient_field(const PotentialSpec& spec,
                                              const SymmetricMatrixField& f);

struct EnergyReport {
  double total = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double sup_e = 0.0;
  std::int64_t argmax_site = 0;
  double t = 0.0;
};
EnergyReport total_energy(const PotentialSpec& spec, const SymmetricMatrixField& f);

// Singular-family scaling identity check: builds ftilde(y) = f(lambda^2 y)/lambda
// on the torus of period P/lambda^2 by exact subsampling and returns
// (E(ftilde), lambda^-(2m-2) E(f)). lambda_sq must divide n_per_axis.
std::pair<double, double> scaling_check(const PotentialSpec& spec,
                                        const SymmetricMatrixField& f, int lambda_sq);

}  // namespace sgf
