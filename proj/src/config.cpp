#include "varflow/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace varflow {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for '" + key + "': " + v);
  }
}

int parse_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for '" + key + "': " + v);
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean for '" + key + "': " + v);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) items.push_back(cur);
  }
  return items;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(parse_int(item, key));
  return out;
}

std::vector<double> parse_double_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_double(item, key));
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt_double(v[i]);
  }
  return s;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::RotatingShallowWater: return "rotating_sw";
    case Scenario::RayleighTaylor: return "rayleigh_taylor";
    case Scenario::Custom: return "custom";
  }
  return "?";
}

std::string to_string(MeshKind k) {
  switch (k) {
    case MeshKind::Rectangle: return "rectangle";
    case MeshKind::Equilateral: return "equilateral";
    case MeshKind::File: return "file";
  }
  return "?";
}

std::string to_string(EosChoice e) {
  switch (e) {
    case EosChoice::ShallowWater: return "shallow_water";
    case EosChoice::BarotropicGas: return "barotropic";
    case EosChoice::PerfectGas: return "perfect_gas";
  }
  return "?";
}

std::string to_string(PotentialChoice p) {
  switch (p) {
    case PotentialChoice::None: return "none";
    case PotentialChoice::GravityY: return "gravity_y";
  }
  return "?";
}

std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Picard: return "picard";
    case SolveMethod::NewtonFd: return "newton_fd";
  }
  return "?";
}

namespace {

Scenario scenario_from(const std::string& v) {
  if (v == "rotating_sw") return Scenario::RotatingShallowWater;
  if (v == "rayleigh_taylor") return Scenario::RayleighTaylor;
  if (v == "custom") return Scenario::Custom;
  throw std::invalid_argument("config: unknown scenario '" + v + "'");
}

MeshKind meshkind_from(const std::string& v) {
  if (v == "rectangle") return MeshKind::Rectangle;
  if (v == "equilateral") return MeshKind::Equilateral;
  if (v == "file") return MeshKind::File;
  throw std::invalid_argument("config: unknown mesh kind '" + v + "'");
}

EosChoice eos_from(const std::string& v) {
  if (v == "shallow_water") return EosChoice::ShallowWater;
  if (v == "barotropic") return EosChoice::BarotropicGas;
  if (v == "perfect_gas") return EosChoice::PerfectGas;
  throw std::invalid_argument("config: unknown eos '" + v + "'");
}

PotentialChoice potential_from(const std::string& v) {
  if (v == "none") return PotentialChoice::None;
  if (v == "gravity_y") return PotentialChoice::GravityY;
  throw std::invalid_argument("config: unknown potential '" + v + "'");
}

SolveMethod method_from(const std::string& v) {
  if (v == "picard") return SolveMethod::Picard;
  if (v == "newton_fd") return SolveMethod::NewtonFd;
  throw std::invalid_argument("config: unknown solver method '" + v + "'");
}

}  // namespace

int RunConfig::steps() const {
  return static_cast<int>(std::lround(t_final / dt));
}

void RunConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be > 0");
  if (!(t_final >= dt)) throw std::invalid_argument("config: t_final must be >= dt");
  if (dg_degree < 0) throw std::invalid_argument("config: dg_degree must be >= 0");
  if (velocity_order < 0) throw std::invalid_argument("config: velocity_order must be >= 0");
  if (velocity_bdm && velocity_order < 1)
    throw std::invalid_argument("config: BDM requires velocity_order >= 1");
  if (nx < 1 || ny < 1) throw std::invalid_argument("config: nx, ny must be >= 1");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw std::invalid_argument("config: tolerances must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("config: max_iterations must be >= 1");
  if (!(eps_dg > 0.0)) throw std::invalid_argument("config: eps_dg must be positive");
  if (quad_degree < 0) throw std::invalid_argument("config: quad_degree must be >= 0");
  if (snapshot_every < 0) throw std::invalid_argument("config: snapshot_every must be >= 0");
  if (mesh_kind == MeshKind::File && mesh_file.empty())
    throw std::invalid_argument("config: mesh kind 'file' requires mesh_file");
}

std::string RunConfig::save() const {
  std::ostringstream out;
  out << "[scenario]\n";
  out << "name = " << to_string(scenario) << "\n";
  out << "\n[mesh]\n";
  out << "kind = " << to_string(mesh_kind) << "\n";
  out << "x0 = " << fmt_double(x0) << "\n";
  out << "x1 = " << fmt_double(x1) << "\n";
  out << "y0 = " << fmt_double(y0) << "\n";
  out << "y1 = " << fmt_double(y1) << "\n";
  out << "nx = " << nx << "\n";
  out << "ny = " << ny << "\n";
  out << "file = " << mesh_file << "\n";
  out << "\n[spaces]\n";
  out << "dg_degree = " << dg_degree << "\n";
  out << "velocity_family = " << (velocity_bdm ? "BDM" : "RT") << "\n";
  out << "velocity_order = " << velocity_order << "\n";
  out << "\n[physics]\n";
  out << "eos = " << to_string(eos) << "\n";
  out << "gamma = " << fmt_double(gamma) << "\n";
  out << "K = " << fmt_double(eos_K) << "\n";
  out << "Cv = " << fmt_double(heat_capacity) << "\n";
  out << "omega = " << fmt_double(omega) << "\n";
  out << "potential = " << to_string(potential) << "\n";
  out << "gravity = " << fmt_double(gravity) << "\n";
  out << "quad_degree = " << quad_degree << "\n";
  out << "\n[time]\n";
  out << "dt = " << fmt_double(dt) << "\n";
  out << "t_final = " << fmt_double(t_final) << "\n";
  out << "\n[solver]\n";
  out << "method = " << to_string(method) << "\n";
  out << "abs_tol = " << fmt_double(abs_tol) << "\n";
  out << "rel_tol = " << fmt_double(rel_tol) << "\n";
  out << "max_iterations = " << max_iterations << "\n";
  out << "newton_fallback = " << (newton_fallback ? "true" : "false") << "\n";
  out << "eps_dg = " << fmt_double(eps_dg) << "\n";
  out << "\n[output]\n";
  out << "directory = " << output_dir << "\n";
  out << "snapshot_every = " << snapshot_every << "\n";
  out << "\n[study]\n";
  out << "kind = " << (study_temporal ? "temporal" : "spatial") << "\n";
  out << "nx_list = " << join_ints(study_nx) << "\n";
  out << "r_list = " << join_ints(study_r) << "\n";
  out << "dt_list = " << join_doubles(study_dt) << "\n";
  out << "reference_nx = " << reference_nx << "\n";
  out << "reference_r = " << reference_r << "\n";
  out << "reference_dt = " << fmt_double(reference_dt) << "\n";
  return out.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw std::invalid_argument("config: malformed section at line " +
                                    std::to_string(lineno));
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected 'key = value' at line " +
                                  std::to_string(lineno));
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "scenario.name") cfg.scenario = scenario_from(val);
    else if (qual == "mesh.kind") cfg.mesh_kind = meshkind_from(val);
    else if (qual == "mesh.x0") cfg.x0 = parse_double(val, qual);
    else if (qual == "mesh.x1") cfg.x1 = parse_double(val, qual);
    else if (qual == "mesh.y0") cfg.y0 = parse_double(val, qual);
    else if (qual == "mesh.y1") cfg.y1 = parse_double(val, qual);
    else if (qual == "mesh.nx") cfg.nx = parse_int(val, qual);
    else if (qual == "mesh.ny") cfg.ny = parse_int(val, qual);
    else if (qual == "mesh.file") cfg.mesh_file = val;
    else if (qual == "spaces.dg_degree") cfg.dg_degree = parse_int(val, qual);
    else if (qual == "spaces.velocity_family") {
      if (val == "RT") cfg.velocity_bdm = false;
      else if (val == "BDM") cfg.velocity_bdm = true;
      else throw std::invalid_argument("config: unknown velocity family '" + val + "'");
    }
    else if (qual == "spaces.velocity_order") cfg.velocity_order = parse_int(val, qual);
    else if (qual == "physics.eos") cfg.eos = eos_from(val);
    else if (qual == "physics.gamma") cfg.gamma = parse_double(val, qual);
    else if (qual == "physics.K") cfg.eos_K = parse_double(val, qual);
    else if (qual == "physics.Cv") cfg.heat_capacity = parse_double(val, qual);
    else if (qual == "physics.omega") cfg.omega = parse_double(val, qual);
    else if (qual == "physics.potential") cfg.potential = potential_from(val);
    else if (qual == "physics.gravity") cfg.gravity = parse_double(val, qual);
    else if (qual == "physics.quad_degree") cfg.quad_degree = parse_int(val, qual);
    else if (qual == "time.dt") cfg.dt = parse_double(val, qual);
    else if (qual == "time.t_final") cfg.t_final = parse_double(val, qual);
    else if (qual == "solver.method") cfg.method = method_from(val);
    else if (qual == "solver.abs_tol") cfg.abs_tol = parse_double(val, qual);
    else if (qual == "solver.rel_tol") cfg.rel_tol = parse_double(val, qual);
    else if (qual == "solver.max_iterations") cfg.max_iterations = parse_int(val, qual);
    else if (qual == "solver.newton_fallback") cfg.newton_fallback = parse_bool(val, qual);
    else if (qual == "solver.eps_dg") cfg.eps_dg = parse_double(val, qual);
    else if (qual == "output.directory") cfg.output_dir = val;
    else if (qual == "output.snapshot_every") cfg.snapshot_every = parse_int(val, qual);
    else if (qual == "study.kind") {
      if (val == "spatial") cfg.study_temporal = false;
      else if (val == "temporal") cfg.study_temporal = true;
      else throw std::invalid_argument("config: unknown study kind '" + val + "'");
    }
    else if (qual == "study.nx_list") cfg.study_nx = parse_int_list(val, qual);
    else if (qual == "study.r_list") cfg.study_r = parse_int_list(val, qual);
    else if (qual == "study.dt_list") cfg.study_dt = parse_double_list(val, qual);
    else if (qual == "study.reference_nx") cfg.reference_nx = parse_int(val, qual);
    else if (qual == "study.reference_r") cfg.reference_r = parse_int(val, qual);
    else if (qual == "study.reference_dt") cfg.reference_dt = parse_double(val, qual);
    else
      throw std::invalid_argument("config: unknown key '" + qual + "' at line " +
                                  std::to_string(lineno));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << save();
}

}  // namespace varflow
