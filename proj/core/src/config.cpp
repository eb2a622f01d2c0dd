#include "sgf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sgf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) bad_key(key, "trailing characters in number '" + v + "'");
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    bad_key(key, "expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) bad_key(key, "trailing characters in integer '" + v + "'");
    return i;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    bad_key(key, "expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_key(key, "expected a boolean, got '" + v + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
  std::vector<T> out;
  std::istringstream ss(v);
  std::string tok;
  while (ss >> tok) out.push_back(parse(key, tok));
  if (out.empty()) bad_key(key, "expected a space-separated list");
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) bad_key(key, "empty value");

    if (key == "domain.m") cfg.m = static_cast<int>(parse_int(key, value));
    else if (key == "domain.n_per_axis") cfg.n_per_axis = static_cast<int>(parse_int(key, value));
    else if (key == "domain.period") cfg.period = parse_double(key, value);
    else if (key == "matrix.l") cfg.l = static_cast<int>(parse_int(key, value));
    else if (key == "matrix.k") cfg.k = static_cast<int>(parse_int(key, value));
    else if (key == "matrix.winding")
      cfg.winding = parse_list<int>(key, value, [](const std::string& k, const std::string& t) {
        return static_cast<int>(parse_int(k, t));
      });
    else if (key == "matrix.seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "matrix.perturbation") cfg.perturbation = parse_double(key, value);
    else if (key == "matrix.scale") cfg.scale = parse_double(key, value);
    else if (key == "potential.family") {
      if (value == "singular") cfg.family = PotentialFamily::Singular;
      else if (value == "smoothed") cfg.family = PotentialFamily::Smoothed;
      else if (value == "higher_power") cfg.family = PotentialFamily::HigherPower;
      else bad_key(key, "expected singular | smoothed | higher_power");
    } else if (key == "potential.b") cfg.b = parse_double(key, value);
    else if (key == "potential.L") cfg.L = static_cast<int>(parse_int(key, value));
    else if (key == "flow.integrator") {
      if (value == "explicit_euler") cfg.integrator = Integrator::ExplicitEuler;
      else if (value == "spectral_imex") cfg.integrator = Integrator::SpectralImex;
      else bad_key(key, "expected explicit_euler | spectral_imex");
    } else if (key == "flow.dt") {
      if (value == "auto") cfg.dt_auto = true;
      else {
        cfg.dt_auto = false;
        cfg.dt = parse_double(key, value);
      }
    } else if (key == "flow.safety") cfg.safety = parse_double(key, value);
    else if (key == "flow.t_end") cfg.t_end = parse_double(key, value);
    else if (key == "flow.stride") cfg.stride = static_cast<int>(parse_int(key, value));
    else if (key == "analysis.delta") cfg.delta = parse_double(key, value);
    else if (key == "analysis.rho") {
      if (value == "auto") cfg.rho_auto = true;
      else {
        cfg.rho_auto = false;
        cfg.rho = parse_double(key, value);
      }
    } else if (key == "analysis.radii")
      cfg.radii = parse_list<double>(key, value, parse_double);
    else if (key == "analysis.centers")
      cfg.centers =
          parse_list<std::int64_t>(key, value, [](const std::string& k, const std::string& t) {
            return static_cast<std::int64_t>(parse_int(k, t));
          });
    else if (key == "analysis.eps0") {
      if (value == "auto") cfg.eps0_auto = true;
      else {
        cfg.eps0_auto = false;
        cfg.eps0 = parse_double(key, value);
      }
    } else if (key == "analysis.b_sweep")
      cfg.b_sweep = parse_list<double>(key, value, parse_double);
    else if (key == "analysis.constants") cfg.constants_path = value;
    else if (key == "output.dir") cfg.out_dir = value;
    else if (key == "output.emit_snapshots") cfg.emit_snapshots = parse_bool(key, value);
    else bad_key(key, "unknown key");
  }

  // Cross-field validation, each error naming its key.
  if (cfg.m < 2 || cfg.m > kMaxDim) bad_key("domain.m", "must be in [2, " + std::to_string(kMaxDim) + "]");
  if (cfg.n_per_axis < 4) bad_key("domain.n_per_axis", "must be >= 4");
  if (!(cfg.period > 0.0)) bad_key("domain.period", "must be positive");
  if (cfg.l < 2) bad_key("matrix.l", "must be >= 2");
  if (cfg.k < 1 || cfg.k >= cfg.l) bad_key("matrix.k", "must satisfy 1 <= k < l");
  if (cfg.scale < 0.0) bad_key("matrix.scale", "must be >= 0");
  if (cfg.winding.empty()) {
    cfg.winding.assign(static_cast<std::size_t>(cfg.m), 0);
    cfg.winding[0] = 1;
  }
  if (static_cast<int>(cfg.winding.size()) != cfg.m)
    bad_key("matrix.winding", "length must equal domain.m");
  if (cfg.family != PotentialFamily::Singular && !(cfg.b > 0.0))
    bad_key("potential.b", "must be positive");
  if (cfg.L < 1) bad_key("potential.L", "must be >= 1");
  if (cfg.L > 1 && cfg.family != PotentialFamily::HigherPower)
    bad_key("potential.L", "powers L > 1 require potential.family = higher_power");
  if (!cfg.dt_auto && !(cfg.dt > 0.0)) bad_key("flow.dt", "must be positive");
  if (!(cfg.safety > 0.0) || cfg.safety > 1.0) bad_key("flow.safety", "must lie in (0, 1]");
  if (!(cfg.t_end > 0.0)) bad_key("flow.t_end", "must be positive");
  if (cfg.stride < 1) bad_key("flow.stride", "must be >= 1");
  if (!(cfg.delta > 0.0) || cfg.delta >= 1.0) bad_key("analysis.delta", "must lie in (0, 1)");
  if (!cfg.rho_auto && !(cfg.rho > 0.0)) bad_key("analysis.rho", "must be positive");
  for (double r : cfg.radii)
    if (!(r > 0.0)) bad_key("analysis.radii", "radii must be positive");
  for (double bv : cfg.b_sweep)
    if (!(bv > 0.0)) bad_key("analysis.b_sweep", "entries must be positive");
  if (!cfg.eps0_auto && !(cfg.eps0 > 0.0)) bad_key("analysis.eps0", "must be positive");

  const LatticeDomain dom = cfg.domain();  // validates geometry
  for (std::int64_t c : cfg.centers)
    if (c < 0 || c >= dom.site_count()) bad_key("analysis.centers", "site index out of range");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

LatticeDomain RunConfig::domain() const { return LatticeDomain(m, n_per_axis, period); }

PotentialSpec RunConfig::potential() const {
  switch (family) {
    case PotentialFamily::Singular:
      return PotentialSpec::singular(l);
    case PotentialFamily::Smoothed:
      return PotentialSpec::smoothed(l, b);
    case PotentialFamily::HigherPower:
      return PotentialSpec::higher_power(l, b, L);
  }
  throw ConfigError("unreachable potential family");
}

FlowConfig RunConfig::flow() const {
  FlowConfig fc;
  fc.dt_policy = dt_auto ? DtPolicy::adaptive(safety) : DtPolicy::fixed(dt);
  fc.t_end = t_end;
  fc.snapshot_stride = stride;
  fc.integrator = integrator;
  return fc;
}

SymmetricMatrixField RunConfig::initial_field() const {
  SymmetricMatrixField f = grassmannian_winding_field(domain(), l, k, winding, seed, perturbation);
  if (scale != 1.0)
    for (double& v : f.raw()) v *= scale;
  return f;
}

double RunConfig::resolved_rho() const {
  return rho_auto ? domain().cutoff_radius() / 2.0 : rho;
}

std::vector<double> RunConfig::resolved_radii() const {
  if (!radii.empty()) return radii;
  const LatticeDomain dom = domain();
  const double h = dom.spacing();
  std::vector<double> out;
  for (int mult : {2, 3, 4, 6, 8, 12, 16}) {
    const double R = mult * h;
    if (R < dom.cutoff_radius()) out.push_back(R);
  }
  while (out.size() > 5) out.erase(out.begin());
  return out;
}

std::vector<std::int64_t> RunConfig::resolved_centers() const {
  if (!centers.empty()) return centers;
  const LatticeDomain dom = domain();
  std::vector<std::int64_t> out;
  const int n = dom.sites_per_axis();
  for (int i = 0; i < 8; ++i) {
    Coords c{};
    for (int a = 0; a < dom.dim(); ++a) c[a] = (i * n / 8 + a * n / 3) % n;
    const std::int64_t s = dom.site_at(c);
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

std::string RunConfig::resolved_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "domain.m = " << m << "\n";
  os << "domain.n_per_axis = " << n_per_axis << "\n";
  os << "domain.period = " << period << "\n";
  os << "matrix.l = " << l << "\n";
  os << "matrix.k = " << k << "\n";
  os << "matrix.winding =";
  for (int w : winding) os << " " << w;
  os << "\n";
  os << "matrix.seed = " << seed << "\n";
  os << "matrix.perturbation = " << perturbation << "\n";
  os << "matrix.scale = " << scale << "\n";
  os << "potential.family = "
     << (family == PotentialFamily::Singular
             ? "singular"
             : family == PotentialFamily::Smoothed ? "smoothed" : "higher_power")
     << "\n";
  if (family != PotentialFamily::Singular) os << "potential.b = " << b << "\n";
  os << "potential.L = " << L << "\n";
  os << "flow.integrator = "
     << (integrator == Integrator::SpectralImex ? "spectral_imex" : "explicit_euler") << "\n";
  if (dt_auto)
    os << "flow.dt = auto\n";
  else
    os << "flow.dt = " << dt << "\n";
  os << "flow.safety = " << safety << "\n";
  os << "flow.t_end = " << t_end << "\n";
  os << "flow.stride = " << stride << "\n";
  os << "analysis.delta = " << delta << "\n";
  os << "analysis.rho = " << resolved_rho() << "\n";
  os << "analysis.radii =";
  for (double r : resolved_radii()) os << " " << r;
  os << "\n";
  os << "analysis.centers =";
  for (std::int64_t c : resolved_centers()) os << " " << c;
  os << "\n";
  if (eps0_auto)
    os << "analysis.eps0 = auto\n";
  else
    os << "analysis.eps0 = " << eps0 << "\n";
  if (!b_sweep.empty()) {
    os << "analysis.b_sweep =";
    for (double bv : b_sweep) os << " " << bv;
    os << "\n";
  }
  if (!constants_path.empty()) os << "analysis.constants = " << constants_path << "\n";
  os << "output.dir = " << out_dir << "\n";
  os << "output.emit_snapshots = " << (emit_snapshots ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace sgf
