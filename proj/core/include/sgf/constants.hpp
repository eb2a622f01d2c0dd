#pragma once

#include <string>

namespace sgf {

// The analytic statements assert existence of uniform constants; their values
// are fixed once by a calibration pass over the scenario matrix (see
// scenarios.hpp and the calibrate tool) and asserted thereafter. `defaults()`
// returns the frozen values from that pass.
struct CalibratedConstants {
  // Moser sup-vs-integral bounds, shared by the elliptic and parabolic checks.
  double moser_c1 = 1.0;
  double moser_c2 = 16.0;

  // Parabolic Gaussian-weighted inequality Psi(R) <= e^{c dR^2} Psi(R0) + Chat E0 dR^2.
  double psi_c = 0.0;
  double psi_chat = 1.0;

  // eps0 = b^(1/L) / (2 C); one constant per power.
  double eps_C_L1 = 1.0;
  double eps_C_L2 = 1.0;

  // sup e_b <= C min(b^-m E_b, E_b^(2m/(2m-2)) b^(-(2m-1)/(m-1))).
  double sup_e_C = 1.0;

  // Bad-set cover radius r = 2 sqrt(4 c b^(1+1/L)).
  double hausdorff_c = 1.0;

  static CalibratedConstants defaults();

  std::string to_json() const;
  static CalibratedConstants from_json(const std::string& text);
  void save(const std::string& path) const;
  static CalibratedConstants load(const std::string& path);

  double eps_C(int L) const;
};

}  // namespace sgf
