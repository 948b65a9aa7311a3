#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmdcc/collision.hpp"
#include "mmdcc/manipulator.hpp"

namespace mmdcc {

// Flat [section] key = value text config; values keep their raw string form
// with line numbers for error reporting.
struct ConfigFile {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::string path;

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const;
  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& message) const;
};

ConfigFile parse_config(const std::string& path);

enum class Application { collision_single, collision_multi, tracking };
enum class SolverKind { rkhs, scenario, saa, meanvar };

std::string to_string(Application a);
std::string to_string(SolverKind s);

struct ExperimentConfig {
  Application application = Application::collision_single;
  SolverKind solver = SolverKind::rkhs;

  int degree = 3;
  double rho1 = 10.0;
  double rho2 = 1.0;
  int n = 40;            // embedding samples per uncertain parameter
  int n_scenario = 20;   // desired-subset size per parameter
  int trials = 50;       // scenario subset draws
  long long holdout = 100000;  // held-out validation pairs
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir = "out";
  double u_max = 5.0;
  double grid_resolution = 1e-3;
  double target_eta = 0.9;
  int baseline_n = 200;         // samples per side for scenario/saa/meanvar
  double meanvar_epsilon = 0.0; // 0 -> Cantelli inversion of target_eta

  // collision geometry and noise
  AgentState robot{{0.0, 0.0}, {1.0, 0.0}, 0.4};
  std::vector<AgentState> obstacles;
  NoiseShape robot_pos_noise{0.005, 0.3, 3.6};
  NoiseShape robot_vel_noise{0.001, -0.3, 3.6};
  NoiseShape obstacle_pos_noise{0.005, 0.3, 3.6};
  NoiseShape obstacle_vel_noise{0.001, -0.3, 3.6};

  // manipulator
  ArmParams arm;
  double dt = 0.05;
  int steps = 100;
  FourMomentSpec q_noise{0.0, 4e-4, 0.3, 3.6};
  FourMomentSpec qd_noise{0.0, 2.5e-3, -0.3, 3.6};
  std::string reference_csv;  // empty -> built-in circle
  Eigen::Vector2d ref_center{0.9, 0.9};
  double ref_radius = 0.7, ref_omega = 1.8, ref_phase = 3.9269908169872414;
  bool q0_auto = true;
  Eigen::Vector2d q0{0.0, 0.0}, qd0{0.0, 0.0};

  SolverConfig solver_config(std::uint64_t seed) const;

  static ExperimentConfig load(const std::string& path);
};

}  // namespace mmdcc
