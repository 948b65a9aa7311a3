#include "mmdcc/io/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "mmdcc/desired.hpp"
#include "mmdcc/io/csv.hpp"
#include "mmdcc/random.hpp"

namespace mmdcc {

namespace {

bool timing_enabled() {
  const char* env = std::getenv("RKHS_CC_TIMING");
  return env != nullptr && std::atoi(env) != 0;
}

int holdout_side(long long target_pairs) {
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(target_pairs))));
}

struct CollisionData {
  std::vector<Eigen::VectorXd> robot;
  std::vector<std::vector<Eigen::VectorXd>> obstacles;
  std::vector<Eigen::VectorXd> holdout_robot;
  std::vector<std::vector<Eigen::VectorXd>> holdout_obstacles;
};

CollisionData draw_collision_data(const ExperimentConfig& config, std::uint64_t seed,
                                  int n_per_side) {
  CollisionData data;
  const AgentSampler robot_sampler(config.robot, config.robot_pos_noise,
                                   config.robot_vel_noise);
  Rng pool_rng(derive_seed(seed, 11));
  data.robot = robot_sampler.sample_many(n_per_side, pool_rng);
  for (std::size_t o = 0; o < config.obstacles.size(); ++o) {
    const AgentSampler s(config.obstacles[o], config.obstacle_pos_noise,
                         config.obstacle_vel_noise);
    data.obstacles.push_back(s.sample_many(n_per_side, pool_rng));
  }
  const int side = holdout_side(config.holdout);
  Rng holdout_rng(derive_seed(seed, 13));
  data.holdout_robot = robot_sampler.sample_many(side, holdout_rng);
  for (std::size_t o = 0; o < config.obstacles.size(); ++o) {
    const AgentSampler s(config.obstacles[o], config.obstacle_pos_noise,
                         config.obstacle_vel_noise);
    data.holdout_obstacles.push_back(s.sample_many(side, holdout_rng));
  }
  return data;
}

void attach_holdout_etas(SolverReport& rep, const ExperimentConfig& config,
                         const CollisionData& data, double u) {
  rep.per_constraint_eta.clear();
  double min_eta = 1.0;
  long long pairs = 0;
  for (std::size_t o = 0; o < data.holdout_obstacles.size(); ++o) {
    const auto constraint = collision_constraint(config.robot.radius,
                                                 config.obstacles[o].radius);
    const double eta = validate_eta(constraint, u, data.holdout_robot,
                                    data.holdout_obstacles[o], Pairing::grid);
    rep.per_constraint_eta.push_back(eta);
    min_eta = std::min(min_eta, eta);
    pairs += static_cast<long long>(data.holdout_robot.size()) *
             static_cast<long long>(data.holdout_obstacles[o].size());
  }
  rep.empirical_eta = min_eta;
  rep.holdout_pairs = pairs;
}

SolverReport run_collision(const ExperimentConfig& config, std::uint64_t seed) {
  const SolverConfig sc = config.solver_config(seed);
  const Polynomial J({1.0, -2.0, 1.0});

  if (config.solver == SolverKind::rkhs) {
    const CollisionData data = draw_collision_data(config, seed, config.n);
    AvoidanceInstance inst;
    inst.robot_radius = config.robot.radius;
    for (const auto& o : config.obstacles) inst.obstacle_radii.push_back(o.radius);
    inst.robot_samples = data.robot;
    inst.obstacle_samples = data.obstacles;
    inst.holdout_robot = data.holdout_robot;
    inst.holdout_obstacles = data.holdout_obstacles;
    inst.n_scenario = config.n_scenario;
    inst.trials = config.trials;
    return avoid_step(inst, sc);
  }

  const CollisionData data = draw_collision_data(config, seed, config.baseline_n);
  std::vector<PolynomialChanceConstraint> constraints;
  for (const auto& o : config.obstacles)
    constraints.push_back(collision_constraint(config.robot.radius, o.radius));

  SolverReport rep;
  if (config.solver == SolverKind::scenario) {
    if (constraints.size() == 1) {
      rep = baseline_scenario(constraints[0], data.robot, data.obstacles[0], J, sc);
    } else {
      std::vector<ScenarioSets> sets;
      for (const auto& pool : data.obstacles)
        sets.push_back(ScenarioSets{data.robot, pool});
      const double u = solve_scenario(constraints, sets, J, sc.bounds.lo(0),
                                      std::isfinite(sc.bounds.hi(0))
                                          ? sc.bounds.hi(0)
                                          : sc.horizon);
      rep.u_star = Eigen::VectorXd::Constant(1, u);
      rep.cost_value = J(u);
      rep.objective_value = rep.cost_value;
      rep.n = static_cast<int>(data.robot.size());
    }
  } else if (config.solver == SolverKind::saa) {
    if (constraints.size() == 1) {
      rep = baseline_saa(constraints[0], data.robot, data.obstacles[0], J,
                         config.target_eta, sc);
    } else {
      // joint feasibility: every obstacle's satisfied fraction reaches gamma
      std::vector<SatisfactionGrid> grids;
      for (std::size_t o = 0; o < constraints.size(); ++o)
        grids.emplace_back(constraints[o], data.robot, data.obstacles[o]);
      const double lo = sc.bounds.lo(0);
      const double hi = std::isfinite(sc.bounds.hi(0)) ? sc.bounds.hi(0) : sc.horizon;
      bool found = false;
      double best_u = 0.0, best_j = 0.0;
      const long long steps =
          static_cast<long long>(std::floor((hi - lo) / sc.grid_resolution));
      for (long long k = 0; k <= steps; ++k) {
        const double u = lo + static_cast<double>(k) * sc.grid_resolution;
        bool ok = true;
        for (const auto& g : grids)
          if (g.fraction(u) < config.target_eta) {
            ok = false;
            break;
          }
        if (!ok) continue;
        const double j = J(u);
        if (!found || j < best_j) {
          found = true;
          best_j = j;
          best_u = u;
        }
      }
      if (!found)
        throw infeasible_baseline_error(
            "sample-average approximation: no grid point reaches the target fraction");
      rep.u_star = Eigen::VectorXd::Constant(1, best_u);
      rep.cost_value = best_j;
      rep.objective_value = best_j;
      rep.n = static_cast<int>(data.robot.size());
    }
  } else {  // meanvar
    const double eps = config.meanvar_epsilon > 0.0
                           ? config.meanvar_epsilon
                           : cantelli_epsilon(config.target_eta);
    if (constraints.size() == 1) {
      rep = baseline_mean_var(constraints[0], data.robot, data.obstacles[0], eps, J, sc);
    } else {
      std::vector<std::pair<Polynomial, Polynomial>> stats;
      for (std::size_t o = 0; o < constraints.size(); ++o)
        stats.push_back(mean_var_polynomials(constraints[o], data.robot,
                                             data.obstacles[o]));
      const double lo = sc.bounds.lo(0);
      const double hi = std::isfinite(sc.bounds.hi(0)) ? sc.bounds.hi(0) : sc.horizon;
      bool found = false;
      double best_u = 0.0, best_j = 0.0;
      const long long steps =
          static_cast<long long>(std::floor((hi - lo) / sc.grid_resolution));
      for (long long k = 0; k <= steps; ++k) {
        const double u = lo + static_cast<double>(k) * sc.grid_resolution;
        bool ok = true;
        for (const auto& [mean, second] : stats) {
          const double e = mean(u);
          const double var = std::max(second(u) - e * e, 0.0);
          if (e + eps * std::sqrt(var) > 0.0) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        const double j = J(u);
        if (!found || j < best_j) {
          found = true;
          best_j = j;
          best_u = u;
        }
      }
      if (!found)
        throw infeasible_baseline_error("mean-variance surrogate infeasible");
      rep.u_star = Eigen::VectorXd::Constant(1, best_u);
      rep.cost_value = best_j;
      rep.objective_value = best_j;
      rep.implied_eta_stated = eta_bound_stated(eps);
      rep.implied_eta_cantelli = eta_bound_cantelli(eps);
      rep.n = static_cast<int>(data.robot.size());
    }
  }
  attach_holdout_etas(rep, config, data, rep.u_star(0));
  return rep;
}

std::vector<TrackingTarget> load_reference(const ExperimentConfig& config) {
  if (config.reference_csv.empty())
    return circle_reference(config.ref_center, config.ref_radius, config.ref_omega,
                            config.ref_phase, config.steps, config.dt);
  const SampleTable table = ingest_samples(
      config.reference_csv, {"t", "x", "y", "xdot", "ydot", "xddot", "yddot"});
  std::vector<TrackingTarget> ref;
  const auto col = [&](const std::string& name) {
    return static_cast<Eigen::Index>(
        std::find(table.columns.begin(), table.columns.end(), name) -
        table.columns.begin());
  };
  const auto cx = col("x"), cy = col("y"), cxd = col("xdot"), cyd = col("ydot"),
             cxdd = col("xddot"), cydd = col("yddot");
  for (const auto& row : table.rows) {
    TrackingTarget t;
    t.x = Eigen::Vector2d(row(cx), row(cy));
    t.xdot = Eigen::Vector2d(row(cxd), row(cyd));
    t.xddot = Eigen::Vector2d(row(cxdd), row(cydd));
    ref.push_back(t);
  }
  return ref;
}

SolverReport run_tracking_app(const ExperimentConfig& config, std::uint64_t seed) {
  const SolverConfig sc = config.solver_config(seed);
  const auto reference = load_reference(config);

  Eigen::Vector2d q0 = config.q0, qd0 = config.qd0;
  if (config.q0_auto) {
    const auto ik = inverse_kinematics(reference.front().x, config.arm);
    if (!ik.has_value())
      throw std::runtime_error("tracking: reference start is out of reach");
    q0 = *ik;
    const Eigen::Matrix2d Jac = dynamics_terms(q0, Eigen::Vector2d::Zero(),
                                               config.arm).jacobian;
    qd0 = Jac.colPivHouseholderQr().solve(reference.front().xdot);
  }

  TrackingSolver solver = TrackingSolver::rkhs;
  if (config.solver == SolverKind::scenario) solver = TrackingSolver::scenario;
  if (config.solver == SolverKind::meanvar) solver = TrackingSolver::meanvar;

  const TrackingHistory hist = run_tracking(
      reference, config.arm, config.q_noise, config.qd_noise, config.n,
      config.n_scenario, config.trials, sc, config.dt, q0, qd0, seed, solver,
      config.meanvar_epsilon);

  SolverReport rep;
  rep.u_star = hist.qdd.back();
  const double steps = static_cast<double>(hist.cost.size());
  rep.cost_value = 0.0;
  rep.mmd_value = 0.0;
  for (const double c : hist.cost) rep.cost_value += c;
  for (const double m : hist.mmd) rep.mmd_value += m;
  rep.cost_value /= steps;
  rep.mmd_value /= steps;
  rep.rho1 = config.solver == SolverKind::rkhs ? sc.rho1 : 0.0;
  rep.rho2 = config.solver == SolverKind::rkhs ? sc.rho2 : 1.0;
  rep.objective_value = rep.rho1 * rep.mmd_value + rep.rho2 * rep.cost_value;
  rep.empirical_eta = hist.satisfaction;
  rep.n = config.n;
  rep.n_w1 = config.n_scenario;
  rep.n_w2 = config.n_scenario;
  rep.holdout_pairs = static_cast<long long>(steps) * config.n;
  return rep;
}

double mean_of(const std::vector<SeedRow>& rows, double SolverReport::*field) {
  double sum = 0.0;
  for (const auto& r : rows) sum += r.report.*field;
  return sum / static_cast<double>(rows.size());
}

}  // namespace

std::vector<std::string> report_columns(const ExperimentConfig& config) {
  std::vector<std::string> cols{"seed", "solver", "d", "rho1", "rho2"};
  if (config.application == Application::tracking) {
    cols.push_back("u1");
    cols.push_back("u2");
  } else {
    cols.push_back("u_star");
  }
  for (const char* c : {"J", "mmd", "objective", "empirical_eta", "n", "n_w1",
                        "n_w2", "N_holdout", "wall_ms"})
    cols.push_back(c);
  return cols;
}

SolverReport run_single(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.application == Application::tracking)
    return run_tracking_app(config, seed);
  return run_collision(config, seed);
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);

  ExperimentOutput out;
  out.rows.resize(config.seeds.size());
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    out.rows[i].seed = config.seeds[i];
    out.rows[i].report = run_single(config, config.seeds[i]);
  }

  const bool timing = timing_enabled();
  out.report_path = (fs::path(config.out_dir) / "report.csv").string();
  {
    std::ofstream f(out.report_path);
    if (!f) throw std::runtime_error("cannot write " + out.report_path);
    const auto cols = report_columns(config);
    f << "# schema:";
    for (const auto& c : cols) f << ' ' << c;
    f << '\n';
    for (std::size_t c = 0; c < cols.size(); ++c) f << (c ? "," : "") << cols[c];
    f << '\n';
    for (const auto& row : out.rows) {
      const auto& r = row.report;
      f << row.seed << ',' << to_string(config.solver) << ',' << config.degree << ','
        << format_double(r.rho1) << ',' << format_double(r.rho2);
      for (Eigen::Index k = 0; k < r.u_star.size(); ++k)
        f << ',' << format_double(r.u_star(k));
      f << ',' << format_double(r.cost_value) << ',' << format_double(r.mmd_value)
        << ',' << format_double(r.objective_value) << ','
        << format_double(r.empirical_eta) << ',' << r.n << ',' << r.n_w1 << ','
        << r.n_w2 << ',' << r.holdout_pairs << ','
        << format_double(timing ? r.wall_ms : 0.0) << '\n';
    }
  }

  out.summary_path = (fs::path(config.out_dir) / "summary.csv").string();
  {
    std::ofstream f(out.summary_path);
    if (!f) throw std::runtime_error("cannot write " + out.summary_path);
    f << "# schema: application solver d rho1 rho2 seeds mean_J mean_mmd "
         "mean_eta n n_w1 n_w2 N_holdout\n";
    f << "application,solver,d,rho1,rho2,seeds,mean_J,mean_mmd,mean_eta,n,"
         "n_w1,n_w2,N_holdout\n";
    f << to_string(config.application) << ',' << to_string(config.solver) << ','
      << config.degree << ',' << format_double(config.rho1) << ','
      << format_double(config.rho2) << ',' << out.rows.size() << ','
      << format_double(mean_of(out.rows, &SolverReport::cost_value)) << ','
      << format_double(mean_of(out.rows, &SolverReport::mmd_value)) << ','
      << format_double(mean_of(out.rows, &SolverReport::empirical_eta)) << ','
      << out.rows.front().report.n << ',' << out.rows.front().report.n_w1 << ','
      << out.rows.front().report.n_w2 << ','
      << out.rows.front().report.holdout_pairs << '\n';
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                const std::string& param,
                                const std::vector<double>& values) {
  namespace fs = std::filesystem;
  if (values.empty()) throw std::invalid_argument("sweep: empty value list");
  std::vector<SweepRow> rows;
  for (const double v : values) {
    ExperimentConfig c = config;
    if (param == "d" || param == "degree")
      c.degree = static_cast<int>(v);
    else if (param == "rho1")
      c.rho1 = v;
    else if (param == "rho2")
      c.rho2 = v;
    else if (param == "n")
      c.n = static_cast<int>(v);
    else
      throw std::invalid_argument("sweep: unknown parameter '" + param + "'");
    c.out_dir = (fs::path(config.out_dir) /
                 (param + "_" + format_double(v))).string();
    const ExperimentOutput out = run_experiment(c);
    SweepRow row;
    row.value = v;
    row.seeds = static_cast<int>(out.rows.size());
    for (const auto& r : out.rows) {
      row.mean_cost += r.report.cost_value;
      row.mean_eta += r.report.empirical_eta;
      row.mean_mmd += r.report.mmd_value;
    }
    row.mean_cost /= row.seeds;
    row.mean_eta /= row.seeds;
    row.mean_mmd /= row.seeds;
    rows.push_back(row);
  }

  fs::create_directories(config.out_dir);
  const std::string path =
      (fs::path(config.out_dir) / ("sweep_" + param + ".csv")).string();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "# schema: " << param << " seeds mean_J mean_mmd mean_eta\n";
  f << param << ",seeds,mean_J,mean_mmd,mean_eta\n";
  for (const auto& row : rows)
    f << format_double(row.value) << ',' << row.seeds << ','
      << format_double(row.mean_cost) << ',' << format_double(row.mean_mmd) << ','
      << format_double(row.mean_eta) << '\n';
  return rows;
}

}  // namespace mmdcc
