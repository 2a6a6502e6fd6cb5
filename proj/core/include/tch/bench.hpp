#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tch/config.hpp"
#include "tch/simulation.hpp"

namespace tch {

/// Timings and iteration counts of one mesh in a sweep. Iteration counts are
/// the larger of the two species per step.
struct MeshBenchEntry {
  std::array<int, 3> counts{0, 0, 0};
  std::int64_t nodes = 0;
  int worst_iterations = 0;
  std::vector<int> iterations;     // per measured step
  std::vector<double> solve_seconds;  // both MINRES solves, per measured step
  std::vector<double> step_seconds;   // right-hand sides plus solves
  double setup_seconds = 0.0;      // assembly and preconditioner setup
  double mean_solve_seconds = 0.0;
  double max_solve_seconds = 0.0;
  std::vector<StepRecord> records;
  bool failed = false;
  std::string error;
};

/// Runs `steps` measured steps per mesh after `warm_steps` unmeasured ones,
/// with the model and solver settings of `config`. A failing mesh is
/// recorded and the sweep continues.
std::vector<MeshBenchEntry> bench_mesh_sweep(const RunConfig& config,
                                             const std::vector<std::array<int, 3>>& meshes,
                                             int steps, int warm_steps = 0);

enum class SweepAxis { eps, tau };

struct ParamBenchEntry {
  SweepAxis axis = SweepAxis::eps;
  double eps = 0.0;
  double tau = 0.0;
  int worst_iterations = 0;
  std::vector<int> iterations;
  double mean_solve_seconds = 0.0;
  bool diverged = false;
  std::int64_t diverged_step = 0;
  bool failed = false;
  std::string error;
};

/// Varies eps (both species, tau from config) and then tau (eps from config)
/// on the mesh of `config`. Each entry is measured over `steps` steps and
/// then continued for `stability_steps` further steps; blow-up at any point
/// marks the entry as diverged instead of aborting the sweep.
std::vector<ParamBenchEntry> bench_param_sweep(const RunConfig& config,
                                               const std::vector<double>& eps_list,
                                               const std::vector<double>& tau_list, int steps,
                                               int stability_steps);

struct EigCheckEntry {
  std::array<int, 3> counts{0, 0, 0};
  double tau = 0.0;
  double eps = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Dense eig(S~^{-1} S) over every mesh and (tau, eps) pair.
std::vector<EigCheckEntry> eig_check_grid(const std::vector<std::array<int, 3>>& meshes,
                                          const std::vector<double>& taus,
                                          const std::vector<double>& eps_list,
                                          const std::array<double, 3>& extents,
                                          std::size_t cap);

/// 1 where phi_p > phi_nfa (compare rule; ties give 0) or where
/// phi_p > threshold (absolute rule), else 0.
std::vector<int> binarize_morphology(std::span<const double> phi_p, std::span<const double> phi_nfa,
                                     ThresholdRule rule = ThresholdRule::compare,
                                     double threshold = 0.5);

/// Builds the mesh described by `spec`.
MeshGrid make_mesh(const MeshSpec& spec);
MeshGrid make_mesh(int dim, const std::array<double, 3>& extents, const std::array<int, 3>& counts);

/// Population standard deviation.
double stddev(std::span<const double> v);

}  // namespace tch
