#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "mmdcc/desired.hpp"
#include "mmdcc/io/csv.hpp"
#include "mmdcc/io/experiment.hpp"
#include "mmdcc/objective.hpp"
#include "mmdcc/random.hpp"
#include "mmdcc/reduced_set.hpp"
#include "mmdcc/simd/ops.hpp"

namespace {

using namespace mmdcc;

int cmd_solve(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
  ExperimentConfig config = ExperimentConfig::load(config_path);
  if (seed.has_value()) config.seeds = {*seed};
  if (!out_dir.empty()) config.out_dir = out_dir;
  const ExperimentOutput out = run_experiment(config);
  double mean_eta = 0.0, mean_cost = 0.0;
  for (const auto& r : out.rows) {
    mean_eta += r.report.empirical_eta;
    mean_cost += r.report.cost_value;
  }
  mean_eta /= static_cast<double>(out.rows.size());
  mean_cost /= static_cast<double>(out.rows.size());
  std::cout << "wrote " << out.report_path << " (" << out.rows.size()
            << " seeds), mean J = " << format_double(mean_cost)
            << ", mean empirical eta = " << format_double(mean_eta) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param_spec,
              const std::string& out_dir) {
  const auto eq = param_spec.find('=');
  if (eq == std::string::npos) {
    std::cerr << "--param expects name=v1,v2,...\n";
    return 2;
  }
  const std::string name = param_spec.substr(0, eq);
  std::vector<double> values;
  std::string rest = param_spec.substr(eq + 1);
  for (char& c : rest)
    if (c == ',') c = ' ';
  std::stringstream ss(rest);
  double v;
  while (ss >> v) values.push_back(v);

  ExperimentConfig config = ExperimentConfig::load(config_path);
  if (!out_dir.empty()) config.out_dir = out_dir;
  const auto rows = run_sweep(config, name, values);
  for (const auto& row : rows)
    std::cout << name << " = " << format_double(row.value)
              << ": mean J = " << format_double(row.mean_cost)
              << ", mean eta = " << format_double(row.mean_eta) << "\n";
  return 0;
}

int cmd_validate(const std::string& config_path, const std::string& report_path,
                 const std::string& holdout_path) {
  const ExperimentConfig config = ExperimentConfig::load(config_path);
  if (config.application == Application::tracking) {
    std::cerr << "validate supports the collision applications\n";
    return 2;
  }
  const SampleTable report = ingest_samples(report_path);
  const auto ucol = std::find(report.columns.begin(), report.columns.end(), "u_star");
  if (ucol == report.columns.end()) {
    std::cerr << "report is missing a u_star column\n";
    return 2;
  }
  const Eigen::Index uc = ucol - report.columns.begin();

  const SampleTable holdout = ingest_samples(holdout_path, {"x", "y", "xdot", "ydot"});
  const auto idx = [&](const std::string& name) {
    const auto it = std::find(holdout.columns.begin(), holdout.columns.end(), name);
    if (it == holdout.columns.end())
      throw std::runtime_error("holdout is missing column " + name);
    return static_cast<Eigen::Index>(it - holdout.columns.begin());
  };
  std::vector<Eigen::VectorXd> w1;
  for (const auto& row : holdout.rows) {
    Eigen::VectorXd v(4);
    v << row(idx("x")), row(idx("y")), row(idx("xdot")), row(idx("ydot"));
    w1.push_back(v);
  }
  std::vector<std::vector<Eigen::VectorXd>> w2(config.obstacles.size());
  for (std::size_t o = 0; o < config.obstacles.size(); ++o) {
    const std::string p = "o" + std::to_string(o + 1) + "_";
    for (const auto& row : holdout.rows) {
      Eigen::VectorXd v(4);
      v << row(idx(p + "x")), row(idx(p + "y")), row(idx(p + "xdot")),
          row(idx(p + "ydot"));
      w2[o].push_back(v);
    }
  }

  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const double u = report.rows[r](uc);
    double min_eta = 1.0;
    for (std::size_t o = 0; o < config.obstacles.size(); ++o) {
      const auto constraint =
          collision_constraint(config.robot.radius, config.obstacles[o].radius);
      min_eta = std::min(min_eta,
                         validate_eta(constraint, u, w1, w2[o], Pairing::paired));
    }
    std::cout << "row " << r << ": u = " << format_double(u)
              << ", empirical eta = " << format_double(min_eta) << "\n";
  }
  return 0;
}

int cmd_reduce(const std::string& full_path, int n, const std::string& kernel,
               double bandwidth, std::uint64_t seed, const std::string& out_path) {
  if (kernel != "rbf") {
    std::cerr << "only the rbf kernel is supported for reduction\n";
    return 2;
  }
  const SampleTable table = ingest_samples(full_path);
  if (n < 1 || n > static_cast<int>(table.rows.size())) {
    std::cerr << "--n out of range (1.." << table.rows.size() << ")\n";
    return 2;
  }
  const KernelSpec spec = KernelSpec::rbf(
      bandwidth > 0.0 ? bandwidth : median_pairwise_distance(table.rows));
  Rng rng(seed);
  const auto idx = rng.choose(static_cast<int>(table.rows.size()), n);
  std::vector<Eigen::VectorXd> reduced;
  for (const int i : idx) reduced.push_back(table.rows[static_cast<std::size_t>(i)]);

  const ReducedSetFit fit = solve_weights(table.rows, reduced, spec);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  const double uniform_residual =
      embedding_residual(table.rows, reduced, uniform, spec);
  std::cout << "reduced " << fit.source_size << " -> " << fit.reduced_size
            << " samples; residual " << format_double(fit.residual)
            << " (uniform " << format_double(uniform_residual) << ")\n";
  if (fit.low_weight_warning)
    std::cout << "warning: a fitted weight is below -0.1\n";
  if (!out_path.empty()) {
    write_samples(out_path, table.columns, reduced, &fit.weights);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

// Quick independent spot checks of the core identities.
int cmd_oracle() {
  int failures = 0;
  const auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    const KernelSpec k3 = KernelSpec::polynomial(3, 1.0, 1.0);
    const KernelSpec k2 = KernelSpec::polynomial(2, 1.0, 1.0);
    report("polynomial kernel closed forms",
           poly_kernel(0.0, 7.3, k3) == 1.0 && poly_kernel(1.0, 1.0, k2) == 4.0 &&
               poly_kernel(2.0, 3.0, k2) == 49.0);
  }

  {
    // degree-2 kernel trick against the explicit feature map (1, sqrt2 x, x^2)
    Rng rng(2024);
    bool ok = true;
    for (int rep = 0; rep < 20 && ok; ++rep) {
      Eigen::VectorXd xs(12), ys(9);
      for (Eigen::Index i = 0; i < xs.size(); ++i) xs(i) = rng.uniform(-2, 2);
      for (Eigen::Index i = 0; i < ys.size(); ++i) ys(i) = rng.uniform(-2, 2);
      const auto P = WeightedSampleSet::uniform(xs);
      const auto Q = WeightedSampleSet::uniform(ys);
      const double direct = mmd_squared(P, Q, KernelSpec::polynomial(2, 1.0, 1.0));
      const auto lift = [](const WeightedSampleSet& S) {
        Eigen::Vector3d phi = Eigen::Vector3d::Zero();
        for (Eigen::Index i = 0; i < S.size(); ++i)
          phi += S.weights(i) * Eigen::Vector3d(1.0, std::sqrt(2.0) * S.values(i),
                                                S.values(i) * S.values(i));
        return phi;
      };
      const double feature = (lift(P) - lift(Q)).squaredNorm();
      ok = std::abs(direct - feature) <= 1e-10;
    }
    report("kernel-trick equivalence (d = 2 feature map)", ok);
  }

  {
    // assembled MMD polynomial vs direct evaluation through the embedding
    Rng rng(77);
    bool ok = true;
    for (int rep = 0; rep < 5 && ok; ++rep) {
      AgentState robot{{0, 0}, {1, 0}, 0.4};
      AgentState obstacle{{rng.uniform(3, 6), rng.uniform(1, 2)},
                          {-1, rng.uniform(-1.0, -0.4)},
                          0.4};
      const AgentSampler rs(robot, {0.02, 0.3, 3.6}, {0.005, -0.3, 3.6});
      const AgentSampler os(obstacle, {0.02, 0.3, 3.6}, {0.005, -0.3, 3.6});
      const auto pool1 = rs.sample_many(12, rng);
      const auto pool2 = os.sample_many(12, rng);
      const auto constraint = collision_constraint(0.4, 0.4);
      const auto sets = select_scenario_sets(constraint, pool1, pool2, 8, 8, 20,
                                             0.5, rng.next_u64());
      double u_nom;
      try {
        u_nom = solve_scenario(constraint, sets, Polynomial({1, -2, 1}), 0.0, 5.0);
      } catch (const infeasible_scenario_error&) {
        continue;
      }
      const auto desired =
          build_desired(constraint, sets, u_nom, pool1, pool2, std::nullopt);
      const Eigen::VectorXd uw = Eigen::VectorXd::Constant(12, 1.0 / 12.0);
      const auto cm =
          evaluate_coefficient_matrices(constraint, pool1, uw, pool2, uw);
      const KernelSpec spec = KernelSpec::polynomial(3, 1.0, 1.0);
      const auto obj = assemble_univariate(cm, desired, spec);
      for (int t = 0; t < 20 && ok; ++t) {
        const double u = rng.uniform(0.0, 3.0);
        WeightedSampleSet embedded = embed_at(cm, u);
        embedded.values /= obj.scale_factor;
        WeightedSampleSet target(desired.values / obj.scale_factor, desired.weights);
        const double direct = mmd_squared(embedded, target, spec);
        ok = std::abs(obj(u) - direct) <= 1e-8 * (1.0 + std::abs(obj(u)));
      }
    }
    report("assembled objective matches direct mmd at random u", ok);
  }

  {
    Rng rng(5150);
    std::vector<Eigen::VectorXd> full;
    for (int i = 0; i < 60; ++i) {
      Eigen::VectorXd v(2);
      v << rng.normal(), rng.normal();
      full.push_back(v);
    }
    std::vector<Eigen::VectorXd> reduced(full.begin(), full.begin() + 10);
    const KernelSpec spec = KernelSpec::rbf(median_pairwise_distance(full));
    const auto fit = solve_weights(full, reduced, spec);
    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(10, 0.1);
    const double uni = embedding_residual(full, reduced, uniform, spec);
    report("reduced-set fit dominates uniform weights",
           fit.residual <= uni + 1e-12 && std::abs(fit.weights.sum() - 1.0) <= 1e-9);
  }

  {
    Rng rng(31337);
    bool ok = true;
    for (int rep = 0; rep < 5 && ok; ++rep) {
      UnivariatePolyObjective obj;
      obj.poly = Polynomial({rng.uniform(-1, 1), rng.uniform(-1, 1),
                             rng.uniform(-1, 1), rng.uniform(-0.5, 0.5),
                             rng.uniform(0.5, 2.0)});
      const Polynomial J({rng.uniform(-1, 1), rng.uniform(-2, 2), 1.0});
      SolverConfig cfg;
      cfg.rho1 = 1.0;
      cfg.rho2 = 1.0;
      cfg.bounds = Bounds::scalar(0.0, 4.0);
      cfg.grid_resolution = 1e-3;
      const auto rep_solver = minimize_univariate(obj, J, cfg);
      const Polynomial total = obj.poly + J;
      double best_u = 0.0, best_v = total(0.0);
      for (long long k = 1; k <= 400000; ++k) {
        const double u = static_cast<double>(k) * 1e-5;
        const double v = total(u);
        if (v < best_v) {
          best_v = v;
          best_u = u;
        }
      }
      ok = std::abs(rep_solver.u_star(0) - best_u) <= 1e-4;
    }
    report("scalar solver matches fine-grid search", ok);
  }

  {
    Rng rng(99);
    bool ok = true;
    for (int rep = 0; rep < 100 && ok; ++rep) {
      AgentState robot{{rng.uniform(-3, 3), rng.uniform(-3, 3)},
                       {rng.uniform(-2, 2), rng.uniform(-2, 2)},
                       rng.uniform(0.2, 0.6)};
      AgentState obstacle{{rng.uniform(-3, 3), rng.uniform(-3, 3)},
                          {rng.uniform(-2, 2), rng.uniform(-2, 2)},
                          rng.uniform(0.2, 0.6)};
      const auto h = collision_coefficients(robot, obstacle);
      const double u = rng.uniform(0.0, 3.0);
      const Eigen::Vector2d r = robot.position - obstacle.position;
      const Eigen::Vector2d v = u * robot.velocity - obstacle.velocity;
      const double R = robot.radius + obstacle.radius;
      const double direct =
          r.dot(v) * r.dot(v) - (r.squaredNorm() - R * R) * v.squaredNorm();
      const double viaCoeffs = h.h0 + h.h1 * u + h.h2 * u * u;
      ok = std::abs(direct - viaCoeffs) <= 1e-9 * (1.0 + std::abs(direct));
    }
    report("collision coefficients match the direct cone formula", ok);
  }

  std::cout << (failures == 0 ? "all oracle checks passed\n"
                              : "oracle checks FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chance-constrained optimization through kernel mean embeddings"};
  app.require_subcommand(1);

  std::string config_path, out_dir, param_spec, report_path, holdout_path;
  std::string full_path, kernel = "rbf", reduce_out;
  std::uint64_t seed_value = 0, reduce_seed = 0;
  bool seed_given = false;
  int reduce_n = 20;
  double bandwidth = 0.0;

  auto* solve = app.add_subcommand("solve", "run the configured experiment");
  solve->add_option("--config", config_path, "config file")->required();
  solve->add_option("--seed", seed_value, "override the config seed list")
      ->each([&](const std::string&) { seed_given = true; });
  solve->add_option("--out", out_dir, "output directory override");

  auto* sweep = app.add_subcommand("sweep", "sweep one parameter");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--param", param_spec, "name=v1,v2,... (d, rho1, rho2, n)")
      ->required();
  sweep->add_option("--out", out_dir, "output directory override");

  auto* validate = app.add_subcommand("validate", "recount empirical eta from a holdout");
  validate->add_option("--config", config_path, "config file (for the geometry)")
      ->required();
  validate->add_option("--report", report_path, "report csv")->required();
  validate->add_option("--holdout", holdout_path, "holdout sample csv")->required();

  auto* reduce = app.add_subcommand("reduce", "fit reduced-set weights for a sample file");
  reduce->add_option("--full", full_path, "sample csv")->required();
  reduce->add_option("--n", reduce_n, "reduced size")->required();
  reduce->add_option("--kernel", kernel, "kernel family (rbf)");
  reduce->add_option("--bandwidth", bandwidth, "rbf bandwidth (default: median heuristic)");
  reduce->add_option("--seed", reduce_seed, "subset selection seed");
  reduce->add_option("--out", reduce_out, "write the reduced set + weights here");

  auto* oracle = app.add_subcommand("oracle", "run the built-in oracle spot checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return cmd_solve(config_path,
                       seed_given ? std::optional<std::uint64_t>(seed_value)
                                  : std::nullopt,
                       out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, param_spec, out_dir);
    if (validate->parsed()) return cmd_validate(config_path, report_path, holdout_path);
    if (reduce->parsed())
      return cmd_reduce(full_path, reduce_n, kernel, bandwidth, reduce_seed, reduce_out);
    if (oracle->parsed()) return cmd_oracle();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
