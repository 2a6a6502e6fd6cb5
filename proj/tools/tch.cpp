// Command line front end: simulation runs, the iteration/runtime studies,
// the eigenvalue check, the EOC study and morphology thresholding.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tch/bench.hpp"
#include "tch/config.hpp"
#include "tch/fit.hpp"
#include "tch/io.hpp"
#include "tch/simulation.hpp"

namespace fs = std::filesystem;
using namespace tch;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;
constexpr int kDivergence = 4;

struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
};

RunConfig load(const Common& c, const std::string& mode) {
  RunConfig cfg = c.config_path.empty() ? default_bench_config() : load_config(c.config_path);
  if (!c.out_dir.empty()) cfg.output.dir = c.out_dir;
  if (c.seed) cfg.model.seed = *c.seed;
  if (c.deterministic) cfg.solver.deterministic = true;
  cfg.bench.mode = mode;
  return cfg;
}

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output.dir);
  fs::create_directories(dir);
  write_text(dir / "config.ini", emit_config(cfg));
  return dir;
}

std::string g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string mesh_name(const std::array<int, 3>& m) {
  std::string s = std::to_string(m[0]) + "x" + std::to_string(m[1]);
  if (m[2] > 0) s += "x" + std::to_string(m[2]);
  return s;
}

void write_snapshot(const MeshGrid& mesh, const PhaseState& s, const fs::path& dir,
                    const std::string& tag) {
  write_field_vtk(mesh, s.phi_p, "phi_p", dir / ("phi_p_" + tag + ".vtk"));
  write_field_vtk(mesh, s.phi_nfa, "phi_nfa", dir / ("phi_nfa_" + tag + ".vtk"));
}

int cmd_run(const RunConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  const MeshGrid mesh = make_mesh(cfg.mesh);
  RunCallbacks cb;
  cb.snapshot_times = cfg.output.snapshot_times;
  if (cfg.output.write_vtk) {
    cb.on_snapshot = [&](std::int64_t step, double, const PhaseState& s) {
      write_snapshot(mesh, s, dir, "step" + std::to_string(step));
    };
  }
  std::vector<StepRecord> records;
  cb.on_step = [&](const StepRecord& r) { records.push_back(r); };
  int code = kOk;
  try {
    const RunResult res = run(mesh, cfg.model, cfg.solver, cb);
    if (cfg.output.write_vtk) write_snapshot(mesh, res.final_state, dir, "final");
    std::cout << "completed " << res.records.size() << " steps, t = " << res.final_state.t << "\n";
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    code = kSolverFailure;
  } catch (const ModelDivergence& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    code = kDivergence;
  }
  if (cfg.output.write_stats) write_stats(records, dir / "stats.csv");
  return code;
}

int cmd_bench_mesh(const RunConfig& cfg, bool warm) {
  const fs::path dir = prepare_output(cfg);
  const auto meshes = cfg.bench.meshes;
  const auto entries = bench_mesh_sweep(cfg, meshes, cfg.bench.steps, warm ? cfg.bench.warm_steps : 0);
  std::ofstream csv(dir / "mesh_sweep.csv");
  csv << "mesh,nodes,worst_iterations,mean_solve_seconds,max_solve_seconds,setup_seconds,status\n";
  std::vector<double> nodes, times;
  std::printf("%-14s %10s %8s %14s %14s\n", "mesh", "nodes", "max_it", "solve_s/step", "setup_s");
  for (const auto& e : entries) {
    const std::string name = mesh_name(e.counts);
    csv << name << ',' << e.nodes << ',' << e.worst_iterations << ',' << g(e.mean_solve_seconds) << ','
        << g(e.max_solve_seconds) << ',' << g(e.setup_seconds) << ','
        << (e.failed ? "failed" : "ok") << '\n';
    if (e.failed) {
      std::printf("%-14s failed: %s\n", name.c_str(), e.error.c_str());
      continue;
    }
    std::printf("%-14s %10lld %8d %14.5f %14.5f\n", name.c_str(), static_cast<long long>(e.nodes),
                e.worst_iterations, e.mean_solve_seconds, e.setup_seconds);
    if (cfg.output.write_stats) write_stats(e.records, dir / ("stats_" + name + ".csv"));
    nodes.push_back(static_cast<double>(e.nodes));
    times.push_back(e.mean_solve_seconds);
  }
  if (nodes.size() >= 2) {
    std::printf("runtime slope vs nodes (log-log): %.3f\n", loglog_slope(nodes, times));
  }
  const bool any_failed =
      std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.failed; });
  return any_failed ? kSolverFailure : kOk;
}

int cmd_bench_params(const RunConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  const auto entries = bench_param_sweep(cfg, cfg.bench.eps_list, cfg.bench.tau_list, cfg.bench.steps,
                                         cfg.bench.stability_steps);
  std::ofstream csv(dir / "param_sweep.csv");
  csv << "axis,eps,tau,worst_iterations,mean_solve_seconds,status,diverged_step\n";
  std::printf("%-4s %10s %10s %8s %14s  %s\n", "axis", "eps", "tau", "max_it", "solve_s/step", "status");
  for (const auto& e : entries) {
    const char* status = e.diverged ? "diverged" : e.failed ? "failed" : "ok";
    csv << (e.axis == SweepAxis::eps ? "eps" : "tau") << ',' << g(e.eps) << ',' << g(e.tau) << ','
        << e.worst_iterations << ',' << g(e.mean_solve_seconds) << ',' << status << ','
        << e.diverged_step << '\n';
    std::printf("%-4s %10.3g %10.3g %8d %14.5f  %s", e.axis == SweepAxis::eps ? "eps" : "tau", e.eps,
                e.tau, e.worst_iterations, e.mean_solve_seconds, status);
    if (e.diverged) std::printf(" (step %lld)", static_cast<long long>(e.diverged_step));
    std::printf("\n");
  }
  return kOk;
}

int cmd_eoc(const RunConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  const MeshGrid mesh = make_mesh(cfg.mesh);
  const EocResult r = eoc_study(mesh, cfg.model, cfg.solver, cfg.bench.eoc_taus, cfg.bench.eoc_tau_ref,
                                cfg.bench.eoc_final_time);
  std::ofstream csv(dir / "eoc.csv");
  csv << "tau,error_p,error_nfa\n";
  for (std::size_t i = 0; i < r.error_p.size(); ++i) {
    csv << g(r.taus[i]) << ',' << g(r.error_p[i]) << ',' << g(r.error_nfa[i]) << '\n';
    std::printf("tau %-10.3g  err_p %.6e  err_nfa %.6e\n", r.taus[i], r.error_p[i], r.error_nfa[i]);
  }
  if (!r.valid) {
    std::printf("EOC invalid: %s\n", r.note.c_str());
    return kDivergence;
  }
  std::printf("order p %.4f  order nfa %.4f\n", r.order_p, r.order_nfa);
  return kOk;
}

// Without a config file the check runs on small meshes over the full
// (tau, eps) grid; with one, bench.meshes, tau_list and eps_list are used.
int cmd_eig_check(RunConfig cfg, bool from_file) {
  if (!from_file) {
    cfg.bench.meshes = {{4, 2, 0}, {8, 4, 0}, {12, 6, 0}};
    cfg.bench.tau_list = cfg.bench.eps_list = {1e-7, 1e-4, 1e-1, 1.0, 10.0};
  }
  const fs::path dir = prepare_output(cfg);
  const auto& meshes = cfg.bench.meshes;
  const auto& taus = cfg.bench.tau_list;
  const auto& epss = cfg.bench.eps_list;
  const auto entries = eig_check_grid(meshes, taus, epss, cfg.mesh.extents,
                                      static_cast<std::size_t>(cfg.bench.eig_cap));
  std::ofstream csv(dir / "eig_check.csv");
  csv << "mesh,tau,eps,min,max\n";
  double lo = 1.0, hi = 0.0;
  for (const auto& e : entries) {
    csv << mesh_name(e.counts) << ',' << g(e.tau) << ',' << g(e.eps) << ',' << g(e.min) << ',' << g(e.max)
        << '\n';
    lo = std::min(lo, e.min);
    hi = std::max(hi, e.max);
  }
  std::printf("%zu cases, eigenvalues of S~^-1 S in [%.15f, %.15f]\n", entries.size(), lo, hi);
  return kOk;
}

int cmd_binarize(const RunConfig& cfg, const std::string& p_path, const std::string& nfa_path) {
  const fs::path dir = prepare_output(cfg);
  const VtkField p = read_field_vtk(p_path);
  const VtkField a = read_field_vtk(nfa_path);
  const auto mask = binarize_morphology(p.values, a.values, cfg.bench.threshold_rule, cfg.bench.threshold);
  const MeshGrid mesh = make_mesh(cfg.mesh);
  if (mesh.nodes.size() != mask.size()) {
    throw ConfigError("mesh in config has " + std::to_string(mesh.nodes.size()) +
                          " nodes but the fields have " + std::to_string(mask.size()),
                      0, 0);
  }
  const std::vector<double> as_double(mask.begin(), mask.end());
  write_field_vtk(mesh, as_double, "mask", dir / "mask.vtk");
  if (mesh.dim == 2) write_mask_pgm(mesh, mask, dir / "mask.pgm");
  std::printf("mask written to %s (%zu of %zu nodes set)\n", dir.string().c_str(),
              static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)), mask.size());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ternary Cahn-Hilliard thin-film solver"};
  app.require_subcommand(1);
  Common common;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Configuration file");
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--seed", common.seed, "Random seed of the initial state");
    sub->add_flag("--deterministic", common.deterministic, "Solve the species one after the other");
  };
  auto* run_cmd = app.add_subcommand("run", "Time integration with snapshots and solver statistics");
  auto* mesh_cmd = app.add_subcommand("bench-mesh", "Iteration counts and runtimes over meshes (cold start)");
  auto* warm_cmd = app.add_subcommand("bench-warm", "Same after bench.warm_steps unmeasured steps");
  auto* params_cmd = app.add_subcommand("bench-params", "Iteration counts over eps and tau");
  auto* eoc_cmd = app.add_subcommand("eoc", "Experimental order of convergence in time");
  auto* eig_cmd = app.add_subcommand("eig-check", "Dense eigenvalues of the preconditioned Schur complement");
  auto* bin_cmd = app.add_subcommand("binarize", "Threshold a morphology into a binary mask");
  for (auto* s : {run_cmd, mesh_cmd, warm_cmd, params_cmd, eoc_cmd, eig_cmd, bin_cmd}) add_common(s);
  std::string p_path, nfa_path;
  bin_cmd->add_option("--phi-p", p_path, "VTK file holding phi_p")->required();
  bin_cmd->add_option("--phi-nfa", nfa_path, "VTK file holding phi_nfa")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(load(common, "run"));
    if (*mesh_cmd) return cmd_bench_mesh(load(common, "bench-mesh"), false);
    if (*warm_cmd) return cmd_bench_mesh(load(common, "bench-warm"), true);
    if (*params_cmd) return cmd_bench_params(load(common, "bench-params"));
    if (*eoc_cmd) return cmd_eoc(load(common, "eoc"));
    if (*eig_cmd) return cmd_eig_check(load(common, "eig-check"), !common.config_path.empty());
    if (*bin_cmd) return cmd_binarize(load(common, "binarize"), p_path, nfa_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const ModelDivergence& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
