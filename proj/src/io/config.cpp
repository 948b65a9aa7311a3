#include "mmdcc/io/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mmdcc/io/csv.hpp"

namespace mmdcc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& s, const std::string& path, int line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw parse_error("expected a number, got '" + s + "'", path, line);
  return v;
}

}  // namespace

ConfigFile parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ConfigFile cfg;
  cfg.path = path;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw parse_error("malformed section header", path, line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw parse_error("empty section name", path, line_no);
      cfg.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw parse_error("expected 'key = value'", path, line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw parse_error("empty key", path, line_no);
    if (section.empty())
      throw parse_error("key '" + key + "' outside any [section]", path, line_no);
    cfg.sections[section][key] = {value, line_no};
  }
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  if (s == sections.end() || !s->second.count(key))
    throw std::runtime_error(path + ": missing required key [" + section + "] " + key);
  return s->second.at(key).value;
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  if (!has(section, key)) return fallback;
  const auto& e = sections.at(section).at(key);
  return parse_double(e.value, path, e.line);
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
  const double v = get_double(section, key, static_cast<double>(fallback));
  return static_cast<int>(v);
}

std::vector<double> ConfigFile::get_doubles(const std::string& section,
                                            const std::string& key) const {
  const auto& e = sections.at(section).at(key);
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string tok;
  while (ss >> tok) out.push_back(parse_double(tok, path, e.line));
  return out;
}

void ConfigFile::fail(const std::string& section, const std::string& key,
                      const std::string& message) const {
  int line = 0;
  const auto s = sections.find(section);
  if (s != sections.end()) {
    const auto k = s->second.find(key);
    if (k != s->second.end()) line = k->second.line;
  }
  throw parse_error("[" + section + "] " + key + ": " + message, path, line);
}

std::string to_string(Application a) {
  switch (a) {
    case Application::collision_single:
      return "collision-single";
    case Application::collision_multi:
      return "collision-multi";
    case Application::tracking:
      return "tracking";
  }
  return "?";
}

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::rkhs:
      return "rkhs";
    case SolverKind::scenario:
      return "scenario";
    case SolverKind::saa:
      return "saa";
    case SolverKind::meanvar:
      return "meanvar";
  }
  return "?";
}

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text,
                                       const std::string& path, int line) {
  std::vector<std::uint64_t> seeds;
  std::string cleaned = text;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::stringstream ss(cleaned);
  std::string tok;
  while (ss >> tok) {
    const auto dots = tok.find("..");
    if (dots != std::string::npos) {
      const auto lo = static_cast<std::uint64_t>(
          parse_double(tok.substr(0, dots), path, line));
      const auto hi = static_cast<std::uint64_t>(
          parse_double(tok.substr(dots + 2), path, line));
      if (hi < lo) throw parse_error("seed range is reversed", path, line);
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(static_cast<std::uint64_t>(parse_double(tok, path, line)));
    }
  }
  if (seeds.empty()) throw parse_error("empty seeds list", path, line);
  return seeds;
}

AgentState parse_agent(const std::vector<double>& v, const ConfigFile& cfg,
                       const std::string& key) {
  if (v.size() != 5)
    cfg.fail("geometry", key, "expected 'x y xdot ydot radius'");
  AgentState s;
  s.position = Eigen::Vector2d(v[0], v[1]);
  s.velocity = Eigen::Vector2d(v[2], v[3]);
  s.radius = v[4];
  if (!(s.radius > 0.0)) cfg.fail("geometry", key, "radius must be > 0");
  return s;
}

NoiseShape parse_noise(const ConfigFile& cfg, const std::string& key,
                       const NoiseShape& fallback) {
  if (!cfg.has("noise", key)) return fallback;
  const auto v = cfg.get_doubles("noise", key);
  if (v.size() != 3)
    cfg.fail("noise", key, "expected 'variance skewness kurtosis'");
  return NoiseShape{v[0], v[1], v[2]};
}

FourMomentSpec parse_moment_noise(const ConfigFile& cfg, const std::string& key,
                                  const FourMomentSpec& fallback) {
  if (!cfg.has("arm", key)) return fallback;
  const auto v = cfg.get_doubles("arm", key);
  if (v.size() != 3)
    cfg.fail("arm", key, "expected 'variance skewness kurtosis'");
  FourMomentSpec s{0.0, v[0], v[1], v[2]};
  s.validate();
  return s;
}

}  // namespace

SolverConfig ExperimentConfig::solver_config(std::uint64_t seed) const {
  SolverConfig sc;
  sc.rho1 = rho1;
  sc.rho2 = rho2;
  sc.degree = degree;
  sc.target_eta = target_eta;
  sc.grid_resolution = grid_resolution;
  sc.horizon = u_max;
  sc.seed = seed;
  sc.bounds = Bounds::scalar(0.0, u_max);
  return sc;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  const ConfigFile cfg = parse_config(path);
  ExperimentConfig ec;

  const std::string app = cfg.get("experiment", "application");
  if (app == "collision-single")
    ec.application = Application::collision_single;
  else if (app == "collision-multi")
    ec.application = Application::collision_multi;
  else if (app == "tracking")
    ec.application = Application::tracking;
  else
    cfg.fail("experiment", "application",
             "expected collision-single, collision-multi or tracking");

  const std::string solver = cfg.get_or("experiment", "solver", "rkhs");
  if (solver == "rkhs")
    ec.solver = SolverKind::rkhs;
  else if (solver == "scenario")
    ec.solver = SolverKind::scenario;
  else if (solver == "saa")
    ec.solver = SolverKind::saa;
  else if (solver == "meanvar")
    ec.solver = SolverKind::meanvar;
  else
    cfg.fail("experiment", "solver", "expected rkhs, scenario, saa or meanvar");

  ec.degree = cfg.get_int("experiment", "degree", ec.degree);
  ec.rho1 = cfg.get_double("experiment", "rho1", ec.rho1);
  ec.rho2 = cfg.get_double("experiment", "rho2", ec.rho2);
  ec.n = cfg.get_int("experiment", "n", ec.n);
  ec.n_scenario = cfg.get_int("experiment", "n_scenario", ec.n_scenario);
  ec.trials = cfg.get_int("experiment", "trials", ec.trials);
  ec.holdout = cfg.get_int("experiment", "holdout", static_cast<int>(ec.holdout));
  ec.out_dir = cfg.get_or("experiment", "out_dir", ec.out_dir);
  ec.u_max = cfg.get_double("experiment", "u_max", ec.u_max);
  ec.grid_resolution =
      cfg.get_double("experiment", "grid_resolution", ec.grid_resolution);
  ec.target_eta = cfg.get_double("experiment", "target_eta", ec.target_eta);
  ec.baseline_n = cfg.get_int("experiment", "baseline_n", ec.baseline_n);
  ec.meanvar_epsilon =
      cfg.get_double("experiment", "meanvar_epsilon", ec.meanvar_epsilon);
  if (cfg.has("experiment", "seeds")) {
    const auto& e = cfg.sections.at("experiment").at("seeds");
    ec.seeds = parse_seeds(e.value, path, e.line);
  }

  if (ec.n < 1) cfg.fail("experiment", "n", "must be >= 1");
  if (ec.n_scenario < 1) cfg.fail("experiment", "n_scenario", "must be >= 1");
  if (ec.trials < 1) cfg.fail("experiment", "trials", "must be >= 1");
  if (ec.holdout < 1) cfg.fail("experiment", "holdout", "must be >= 1");
  if (ec.degree < 1) cfg.fail("experiment", "degree", "must be >= 1");
  if (ec.baseline_n < 1) cfg.fail("experiment", "baseline_n", "must be >= 1");

  if (ec.application != Application::tracking) {
    if (cfg.has("geometry", "robot"))
      ec.robot = parse_agent(cfg.get_doubles("geometry", "robot"), cfg, "robot");
    for (int k = 1;; ++k) {
      const std::string key = "obstacle" + std::to_string(k);
      const std::string alt = k == 1 ? "obstacle" : key;
      if (cfg.has("geometry", key))
        ec.obstacles.push_back(parse_agent(cfg.get_doubles("geometry", key), cfg, key));
      else if (k == 1 && cfg.has("geometry", alt))
        ec.obstacles.push_back(parse_agent(cfg.get_doubles("geometry", alt), cfg, alt));
      else
        break;
    }
    if (ec.obstacles.empty())
      ec.obstacles.push_back(AgentState{{5.0, 2.0}, {-1.0, -0.8}, 0.4});
    if (ec.application == Application::collision_single && ec.obstacles.size() != 1)
      cfg.fail("geometry", "obstacle", "collision-single expects exactly one obstacle");
    ec.robot_pos_noise = parse_noise(cfg, "robot_pos", ec.robot_pos_noise);
    ec.robot_vel_noise = parse_noise(cfg, "robot_vel", ec.robot_vel_noise);
    ec.obstacle_pos_noise = parse_noise(cfg, "obstacle_pos", ec.obstacle_pos_noise);
    ec.obstacle_vel_noise = parse_noise(cfg, "obstacle_vel", ec.obstacle_vel_noise);
  } else {
    if (ec.solver == SolverKind::saa)
      cfg.fail("experiment", "solver",
               "the sample-average baseline is not available for tracking");
    ec.arm.l1 = cfg.get_double("arm", "l1", ec.arm.l1);
    ec.arm.l2 = cfg.get_double("arm", "l2", ec.arm.l2);
    ec.arm.m1 = cfg.get_double("arm", "m1", ec.arm.m1);
    ec.arm.m2 = cfg.get_double("arm", "m2", ec.arm.m2);
    ec.arm.gravity = cfg.get_double("arm", "gravity", ec.arm.gravity);
    ec.arm.tau_max = cfg.get_double("arm", "tau_max", ec.arm.tau_max);
    ec.arm.qdd_max = cfg.get_double("arm", "qdd_max", ec.arm.qdd_max);
    ec.arm.k_p = cfg.get_double("arm", "kp", ec.arm.k_p);
    ec.arm.validate();
    ec.dt = cfg.get_double("arm", "dt", ec.dt);
    ec.steps = cfg.get_int("arm", "steps", ec.steps);
    if (ec.steps < 1) cfg.fail("arm", "steps", "must be >= 1");
    ec.q_noise = parse_moment_noise(cfg, "q_noise", ec.q_noise);
    ec.qd_noise = parse_moment_noise(cfg, "qd_noise", ec.qd_noise);
    ec.reference_csv = cfg.get_or("arm", "reference_csv", "");
    if (cfg.has("arm", "reference")) {
      const auto v = cfg.get_doubles("arm", "reference");
      if (v.size() != 5)
        cfg.fail("arm", "reference", "expected 'cx cy radius omega phase'");
      ec.ref_center = Eigen::Vector2d(v[0], v[1]);
      ec.ref_radius = v[2];
      ec.ref_omega = v[3];
      ec.ref_phase = v[4];
    }
    if (cfg.has("arm", "q0")) {
      const std::string q0 = cfg.get("arm", "q0");
      if (q0 == "auto") {
        ec.q0_auto = true;
      } else {
        const auto v = cfg.get_doubles("arm", "q0");
        if (v.size() != 2) cfg.fail("arm", "q0", "expected 'auto' or two angles");
        ec.q0_auto = false;
        ec.q0 = Eigen::Vector2d(v[0], v[1]);
      }
    }
    if (cfg.has("arm", "qd0")) {
      const auto v = cfg.get_doubles("arm", "qd0");
      if (v.size() != 2) cfg.fail("arm", "qd0", "expected two rates");
      ec.qd0 = Eigen::Vector2d(v[0], v[1]);
    }
  }

  // shared sanity checks routed through SolverConfig::validate
  ec.solver_config(0).validate();
  return ec;
}

}  // namespace mmdcc
