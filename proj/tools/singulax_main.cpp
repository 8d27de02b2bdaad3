// singulax — command-line driver for the minimax descriptor-system observer.
//
// Subcommands:
//   simulate        write a trajectory CSV for the configured system
//   estimate        run the online observer over measurements, write step records
//   compare-kalman  deviation between the unit-weight observer and the
//                   deterministic-fit recursion (requires regular steps)
//   verify          cross-check the recursion against the batch oracles

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <singulax/config.hpp>
#include <singulax/csvio.hpp>
#include <singulax/kalman.hpp>
#include <singulax/model.hpp>
#include <singulax/observer.hpp>
#include <singulax/oracle.hpp>
#include <singulax/random.hpp>

namespace sx = singulax;
using json = nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  int steps = -1;           // -1: take from config
  double tol = -1.0;        // <0: take from config
  std::int64_t seed = -1;   // <0: take from config
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")->required();
  cmd->add_option("--out", args.out_path, "output file path")->required();
  cmd->add_option("--steps", args.steps, "override the configured horizon N");
  cmd->add_option("--tol", args.tol, "override the relative rank tolerance");
  cmd->add_option("--seed", args.seed, "override the RNG seed");
}

sx::RunConfig load(const CommonArgs& args) {
  sx::RunConfig cfg = sx::load_config(args.config_path);
  if (args.steps >= 0) cfg.steps = args.steps;
  if (args.tol >= 0) cfg.tol = args.tol;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  return cfg;
}

void write_sidecar(const std::string& out_path, const json& meta) {
  std::ofstream out(out_path + ".meta.json");
  out << meta.dump(2) << "\n";
}

sx::Trajectory simulate_from_config(const sx::RunConfig& cfg) {
  const sx::NoiseRealization nr = sx::make_noise(cfg, cfg.steps);
  auto fg = [&nr](int k) { return nr.f[static_cast<size_t>(k)]; };
  auto gg = [&nr](int k) { return nr.g[static_cast<size_t>(k)]; };
  auto rg = [&nr](int k) { return nr.free_motion[static_cast<size_t>(k)]; };
  return sx::simulate(cfg.system, cfg.steps, cfg.x0, fg, gg, rg);
}

int cmd_simulate(const CommonArgs& args) {
  const sx::RunConfig cfg = load(args);
  const sx::Trajectory t = simulate_from_config(cfg);

  std::vector<std::string> cols = {"k"};
  for (sx::Index i = 0; i < cfg.system.n; ++i) cols.push_back("x_" + std::to_string(i + 1));
  for (sx::Index i = 0; i < cfg.system.m; ++i) cols.push_back("f_" + std::to_string(i + 1));
  for (sx::Index i = 0; i < cfg.system.p; ++i) cols.push_back("g_" + std::to_string(i + 1));
  for (sx::Index i = 0; i < cfg.system.p; ++i) cols.push_back("y_" + std::to_string(i + 1));

  std::vector<std::vector<std::string>> rows;
  for (int k = 0; k <= cfg.steps; ++k) {
    std::vector<std::string> row = {std::to_string(k)};
    for (sx::Index i = 0; i < cfg.system.n; ++i)
      row.push_back(sx::fmt17(t.x[static_cast<size_t>(k)](i)));
    for (sx::Index i = 0; i < cfg.system.m; ++i)
      row.push_back(k < cfg.steps ? sx::fmt17(t.f[static_cast<size_t>(k)](i)) : "");
    for (sx::Index i = 0; i < cfg.system.p; ++i)
      row.push_back(sx::fmt17(t.g[static_cast<size_t>(k)](i)));
    for (sx::Index i = 0; i < cfg.system.p; ++i)
      row.push_back(sx::fmt17(t.y[static_cast<size_t>(k)](i)));
    rows.push_back(std::move(row));
  }
  sx::write_csv(args.out_path, cols, rows);

  write_sidecar(args.out_path, json{{"command", "simulate"},
                                    {"system", cfg.system_name},
                                    {"steps", cfg.steps},
                                    {"seed", cfg.seed},
                                    {"constraint_value", t.constraint_value}});
  std::cout << "wrote " << rows.size() << " rows to " << args.out_path
            << " (constraint_value = " << sx::fmt17(t.constraint_value) << ")\n";
  return 0;
}

struct Measurements {
  std::vector<sx::Vector> y;
  std::vector<sx::Vector> x;  // empty when the file has no truth columns
};

Measurements read_measurements(const std::string& path, sx::Index n, sx::Index p) {
  const sx::CsvTable t = sx::read_csv(path);
  Measurements m;
  std::vector<int> ycols, xcols;
  for (sx::Index i = 0; i < p; ++i) {
    const int c = t.column("y_" + std::to_string(i + 1));
    if (c < 0) throw sx::ConfigError(path + ": missing column y_" + std::to_string(i + 1));
    ycols.push_back(c);
  }
  bool have_x = true;
  for (sx::Index i = 0; i < n; ++i) {
    const int c = t.column("x_" + std::to_string(i + 1));
    if (c < 0) have_x = false;
    xcols.push_back(c);
  }
  for (const auto& row : t.rows) {
    sx::Vector y(p);
    for (sx::Index i = 0; i < p; ++i) y(i) = sx::parse_double(row.at(static_cast<size_t>(ycols[static_cast<size_t>(i)])));
    m.y.push_back(y);
    if (have_x) {
      sx::Vector x(n);
      for (sx::Index i = 0; i < n; ++i) x(i) = sx::parse_double(row.at(static_cast<size_t>(xcols[static_cast<size_t>(i)])));
      m.x.push_back(x);
    }
  }
  return m;
}

int cmd_estimate(const CommonArgs& args, const std::string& measurements_path) {
  const sx::RunConfig cfg = load(args);

  Measurements data;
  if (!measurements_path.empty()) {
    data = read_measurements(measurements_path, cfg.system.n, cfg.system.p);
    if (data.y.empty()) throw sx::ConfigError(measurements_path + ": no data rows");
  } else {
    const sx::Trajectory t = simulate_from_config(cfg);
    data.y = t.y;
    data.x = t.x;
  }

  const std::vector<sx::Vector> dirs = sx::effective_directions(cfg);
  const auto reports = sx::run(cfg.system, data.y, dirs, cfg.tol);
  const bool have_x = !data.x.empty();

  std::vector<std::string> cols = {"k"};
  if (have_x)
    for (sx::Index i = 0; i < cfg.system.n; ++i) cols.push_back("x_" + std::to_string(i + 1));
  for (sx::Index i = 0; i < cfg.system.n; ++i) cols.push_back("xhat_" + std::to_string(i + 1));
  if (have_x)
    for (sx::Index i = 0; i < cfg.system.n; ++i) cols.push_back("abs_err_" + std::to_string(i + 1));
  for (size_t d = 0; d < dirs.size(); ++d) cols.push_back("sigma_" + std::to_string(d + 1));
  cols.push_back("I");
  cols.push_back("rho");
  cols.push_back("beta");

  std::vector<std::vector<std::string>> rows;
  for (const auto& rep : reports) {
    std::vector<std::string> row = {std::to_string(rep.k)};
    const size_t k = static_cast<size_t>(rep.k);
    if (have_x)
      for (sx::Index i = 0; i < cfg.system.n; ++i) row.push_back(sx::fmt17(data.x[k](i)));
    for (sx::Index i = 0; i < cfg.system.n; ++i) row.push_back(sx::fmt17(rep.estimate(i)));
    if (have_x)
      for (sx::Index i = 0; i < cfg.system.n; ++i)
        row.push_back(sx::fmt17(std::abs(data.x[k](i) - rep.estimate(i))));
    for (const auto& de : rep.directional) row.push_back(sx::fmt17(de.sigma));
    row.push_back(std::to_string(rep.causality_index));
    row.push_back(sx::fmt17(rep.rho));
    row.push_back(sx::fmt17(rep.beta));
    rows.push_back(std::move(row));
  }
  sx::write_csv(args.out_path, cols, rows);

  write_sidecar(args.out_path, json{{"command", "estimate"},
                                    {"system", cfg.system_name},
                                    {"steps", static_cast<int>(reports.size()) - 1},
                                    {"directions", dirs.size()},
                                    {"final_causality_index", reports.back().causality_index},
                                    {"final_beta", reports.back().beta}});
  std::cout << "wrote " << rows.size() << " step records to " << args.out_path << "\n";
  return 0;
}

int cmd_compare_kalman(const CommonArgs& args) {
  const sx::RunConfig cfg = load(args);
  const sx::Trajectory t = simulate_from_config(cfg);

  const sx::EquivalenceReport rep =
      sx::equivalence_report(cfg.system, t.q, t.y, cfg.steps, cfg.tol);

  std::vector<std::vector<std::string>> rows;
  for (size_t k = 0; k < rep.per_step.size(); ++k) {
    rows.push_back({std::to_string(k), sx::fmt17(rep.per_step[k])});
  }
  sx::write_csv(args.out_path, {"k", "deviation"}, rows);
  write_sidecar(args.out_path, json{{"command", "compare-kalman"},
                                    {"system", cfg.system_name},
                                    {"steps", cfg.steps},
                                    {"max_deviation", rep.max_state_deviation},
                                    {"max_pq_deviation", rep.max_pq_deviation}});
  std::cout << "max deviation " << sx::fmt17(rep.max_state_deviation) << " over "
            << rep.per_step.size() << " steps\n";
  return 0;
}

int cmd_verify(const CommonArgs& args, int trials) {
  const sx::RunConfig cfg = load(args);

  json report;
  report["command"] = "verify";
  report["system"] = cfg.system_name;
  json checks = json::array();
  bool all_pass = true;

  auto append = [&](const std::string& scope, const std::vector<sx::CheckResult>& results) {
    for (const auto& c : results) {
      checks.push_back(json{{"scope", scope},
                            {"name", c.name},
                            {"pass", c.pass},
                            {"residual", c.residual},
                            {"details", c.details}});
      all_pass = all_pass && c.pass;
      std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << scope << "/" << c.name
                << " residual=" << sx::fmt17(c.residual)
                << (c.details.empty() ? "" : " (" + c.details + ")") << "\n";
    }
  };

  {
    const sx::Trajectory t = simulate_from_config(cfg);
    append("configured", sx::cross_check(cfg.system, t.y, cfg.steps,
                                         sx::effective_directions(cfg), cfg.tol));
  }

  sx::Rng rng(cfg.seed);
  for (int trial = 0; trial < trials; ++trial) {
    sx::RandomSystemOptions opts;
    opts.n = 1 + static_cast<sx::Index>(rng() % 4);
    opts.m = 1 + static_cast<sx::Index>(rng() % 4);
    opts.p = 1 + static_cast<sx::Index>(rng() % 3);
    opts.horizon = 1 + static_cast<int>(rng() % 10);
    const sx::DescriptorSystem sys = sx::random_system(rng, opts);
    const sx::FeasibleData data = sx::random_feasible_measurements(rng, sys, opts.horizon);
    std::vector<sx::Vector> dirs;
    for (sx::Index i = 0; i < opts.n; ++i) {
      sx::Vector e = sx::Vector::Zero(opts.n);
      e(i) = 1.0;
      dirs.push_back(e);
    }
    append("random_trial_" + std::to_string(trial),
           sx::cross_check(sys, data.y, opts.horizon, dirs, cfg.tol));
  }

  report["checks"] = checks;
  report["all_pass"] = all_pass;
  std::ofstream out(args.out_path);
  out << report.dump(2) << "\n";
  std::cout << (all_pass ? "verification passed" : "verification FAILED") << ", report at "
            << args.out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online minimax observer for descriptor systems"};
  app.require_subcommand(1);

  CommonArgs sim_args, est_args, kal_args, ver_args;
  std::string measurements_path;
  int trials = 10;

  CLI::App* sim = app.add_subcommand("simulate", "simulate a trajectory and write it as CSV");
  add_common(sim, sim_args);

  CLI::App* est = app.add_subcommand("estimate", "run the online observer");
  add_common(est, est_args);
  est->add_option("--measurements", measurements_path,
                  "CSV with y_* columns (default: simulate internally)");

  CLI::App* kal = app.add_subcommand("compare-kalman",
                                     "compare against the deterministic-fit recursion");
  add_common(kal, kal_args);

  CLI::App* ver = app.add_subcommand("verify", "cross-check recursion vs batch oracles");
  add_common(ver, ver_args);
  ver->add_option("--trials", trials, "number of random verification sweeps");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (est->parsed()) return cmd_estimate(est_args, measurements_path);
    if (kal->parsed()) return cmd_compare_kalman(kal_args);
    if (ver->parsed()) return cmd_verify(ver_args, trials);
  } catch (const sx::Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
