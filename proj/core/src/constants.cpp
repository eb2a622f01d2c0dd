#include "sgf/constants.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sgf/errors.hpp"

namespace sgf {

CalibratedConstants CalibratedConstants::defaults() {
  // Frozen by the calibration pass over the scenario matrix (tools/calibrate).
  CalibratedConstants c;
  c.moser_c1 = 1.0;
  c.moser_c2 = 32.0;
  c.psi_c = 0.0;
  c.psi_chat = 0.5;
  c.eps_C_L1 = 4.0;
  c.eps_C_L2 = 4.0;
  c.sup_e_C = 1.0;
  c.hausdorff_c = 1.0;
  return c;
}

double CalibratedConstants::eps_C(int L) const {
  if (L == 1) return eps_C_L1;
  if (L == 2) return eps_C_L2;
  throw ConfigError("no calibrated epsilon constant for L = " + std::to_string(L));
}

std::string CalibratedConstants::to_json() const {
  nlohmann::json j;
  j["moser_c1"] = moser_c1;
  j["moser_c2"] = moser_c2;
  j["psi_c"] = psi_c;
  j["psi_chat"] = psi_chat;
  j["eps_C_L1"] = eps_C_L1;
  j["eps_C_L2"] = eps_C_L2;
  j["sup_e_C"] = sup_e_C;
  j["hausdorff_c"] = hausdorff_c;
  return j.dump(2);
}

CalibratedConstants CalibratedConstants::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("constants file is not valid JSON: ") + e.what());
  }
  CalibratedConstants c = defaults();
  auto get = [&](const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
  };
  get("moser_c1", c.moser_c1);
  get("moser_c2", c.moser_c2);
  get("psi_c", c.psi_c);
  get("psi_chat", c.psi_chat);
  get("eps_C_L1", c.eps_C_L1);
  get("eps_C_L2", c.eps_C_L2);
  get("sup_e_C", c.sup_e_C);
  get("hausdorff_c", c.hausdorff_c);
  return c;
}

void CalibratedConstants::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write constants file " + path);
  out << to_json() << "\n";
}

CalibratedConstants CalibratedConstants::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read constants file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace sgf
