#include "tch/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "tch/assembly.hpp"
#include "tch/saddle_precond.hpp"

namespace tch {

MeshGrid make_mesh(int dim, const std::array<double, 3>& extents, const std::array<int, 3>& counts) {
  const auto d = static_cast<std::size_t>(dim);
  std::vector<double> ext(extents.begin(), extents.begin() + static_cast<std::ptrdiff_t>(d));
  std::vector<Index> cnt(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(d));
  return build_mesh(dim, ext, cnt);
}

MeshGrid make_mesh(const MeshSpec& spec) { return make_mesh(spec.dim, spec.extents, spec.counts); }

namespace {

int dim_of(const std::array<int, 3>& counts) { return counts[2] > 0 ? 3 : 2; }

int worst(const StepRecord& r) { return std::max(r.reports[0].iterations, r.reports[1].iterations); }

double solve_time(const StepRecord& r) { return r.reports[0].wall_time + r.reports[1].wall_time; }

}  // namespace

std::vector<MeshBenchEntry> bench_mesh_sweep(const RunConfig& config,
                                             const std::vector<std::array<int, 3>>& meshes,
                                             int steps, int warm_steps) {
  std::vector<MeshBenchEntry> out;
  for (const auto& counts : meshes) {
    MeshBenchEntry e;
    e.counts = counts;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const MeshGrid mesh = make_mesh(dim_of(counts), config.mesh.extents, counts);
      e.nodes = mesh.num_nodes();
      const Stepper stepper(mesh, config.model, config.solver);
      e.setup_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      PhaseState state = initialize(mesh, config.model, config.model.seed);
      for (int k = 0; k < warm_steps; ++k) state = stepper.step(state).state;
      const double t_end = state.t + steps * config.model.tau;
      const RunResult r = run(stepper, state, t_end - state.t);
      e.records = r.records;
      for (const auto& rec : r.records) {
        e.iterations.push_back(worst(rec));
        e.solve_seconds.push_back(solve_time(rec));
        e.step_seconds.push_back(rec.seconds);
      }
      if (!e.iterations.empty()) {
        e.worst_iterations = *std::max_element(e.iterations.begin(), e.iterations.end());
        e.max_solve_seconds = *std::max_element(e.solve_seconds.begin(), e.solve_seconds.end());
        e.mean_solve_seconds = std::accumulate(e.solve_seconds.begin(), e.solve_seconds.end(), 0.0) /
                               static_cast<double>(e.solve_seconds.size());
      }
    } catch (const std::exception& ex) {
      e.failed = true;
      e.error = ex.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ParamBenchEntry> bench_param_sweep(const RunConfig& config,
                                               const std::vector<double>& eps_list,
                                               const std::vector<double>& tau_list, int steps,
                                               int stability_steps) {
  const MeshGrid mesh = make_mesh(config.mesh);
  const auto matrices = std::make_shared<const SystemMatrices>(SystemMatrices::assemble(mesh));
  const PhaseState init = initialize(mesh, config.model, config.model.seed);

  std::vector<ParamBenchEntry> out;
  const auto measure = [&](SweepAxis axis, double eps, double tau) {
    ParamBenchEntry e;
    e.axis = axis;
    e.eps = eps;
    e.tau = tau;
    ModelParams p = config.model;
    p.eps_p = p.eps_nfa = eps;
    p.tau = tau;
    try {
      const Stepper stepper(mesh, matrices, p, config.solver);
      PhaseState state = init;
      double solve_sum = 0.0;
      for (int k = 0; k < steps + stability_steps; ++k) {
        StepOutcome o = stepper.step(state);
        if (k < steps) {
          StepRecord rec{o.state.step, o.state.t, o.reports, 0.0};
          e.iterations.push_back(worst(rec));
          solve_sum += solve_time(rec);
        }
        state = std::move(o.state);
      }
      if (!e.iterations.empty()) {
        e.worst_iterations = *std::max_element(e.iterations.begin(), e.iterations.end());
        e.mean_solve_seconds = solve_sum / static_cast<double>(e.iterations.size());
      }
    } catch (const ModelDivergence& ex) {
      e.diverged = true;
      e.diverged_step = ex.step;
      e.error = ex.what();
    } catch (const std::exception& ex) {
      e.failed = true;
      e.error = ex.what();
    }
    if (!e.iterations.empty() && e.worst_iterations == 0) {
      e.worst_iterations = *std::max_element(e.iterations.begin(), e.iterations.end());
    }
    out.push_back(std::move(e));
  };
  for (double eps : eps_list) measure(SweepAxis::eps, eps, config.model.tau);
  for (double tau : tau_list) measure(SweepAxis::tau, config.model.eps_p, tau);
  return out;
}

std::vector<EigCheckEntry> eig_check_grid(const std::vector<std::array<int, 3>>& meshes,
                                          const std::vector<double>& taus,
                                          const std::vector<double>& eps_list,
                                          const std::array<double, 3>& extents, std::size_t cap) {
  std::vector<EigCheckEntry> out;
  for (const auto& counts : meshes) {
    const MeshGrid mesh = make_mesh(dim_of(counts), extents, counts);
    const CsrMatrix m = assemble_mass(mesh);
    const CsrMatrix k = assemble_stiffness(mesh);
    for (double tau : taus) {
      for (double eps : eps_list) {
        const auto b = eigen_bounds_check(m, k, tau, eps, static_cast<Index>(cap));
        out.push_back({counts, tau, eps, b.min, b.max});
      }
    }
  }
  return out;
}

std::vector<int> binarize_morphology(std::span<const double> phi_p, std::span<const double> phi_nfa,
                                     ThresholdRule rule, double threshold) {
  if (phi_p.size() != phi_nfa.size()) {
    throw std::invalid_argument("binarize_morphology: fields differ in length");
  }
  std::vector<int> mask(phi_p.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rule == ThresholdRule::compare ? (phi_p[i] > phi_nfa[i]) : (phi_p[i] > threshold);
  }
  return mask;
}

double stddev(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace tch
