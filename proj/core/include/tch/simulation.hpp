#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tch/amg.hpp"
#include "tch/mesh.hpp"
#include "tch/minres.hpp"
#include "tch/physics.hpp"
#include "tch/saddle_precond.hpp"
#include "tch/sparse.hpp"

namespace tch {

/// Nodal coefficients at one time level. phi_s = 1 - phi_p - phi_nfa is
/// never stored.
struct PhaseState {
  std::vector<double> phi_p;
  std::vector<double> phi_nfa;
  std::vector<double> mu_p;
  std::vector<double> mu_nfa;
  double t = 0.0;
  std::int64_t step = 0;

  [[nodiscard]] const std::vector<double>& phi(Species s) const {
    return s == Species::polymer ? phi_p : phi_nfa;
  }
  [[nodiscard]] std::vector<double>& phi(Species s) { return s == Species::polymer ? phi_p : phi_nfa; }
  [[nodiscard]] const std::vector<double>& mu(Species s) const {
    return s == Species::polymer ? mu_p : mu_nfa;
  }
  [[nodiscard]] std::vector<double>& mu(Species s) { return s == Species::polymer ? mu_p : mu_nfa; }

  bool operator==(const PhaseState&) const = default;
};

/// Mesh-dependent matrices shared by both species and all time steps.
struct SystemMatrices {
  CsrMatrix mass;
  CsrMatrix stiffness;
  CsrMatrix bottom_mass;
  CsrMatrix top_mass;

  static SystemMatrices assemble(const MeshGrid& mesh);
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iterations = 500;
  InnerSolveOptions inner;
  AmgOptions amg;
  /// Sequential species solves; trajectories are then bit-reproducible.
  bool deterministic = true;
  /// A state with a non-finite entry or |phi| above this bound has diverged.
  double divergence_bound = 5.0;
  /// Start MINRES from the last solution (or its extrapolation) instead of
  /// zero. The stopping test is unchanged, so the accuracy is that of a
  /// cold start.
  bool warm_start = false;

  bool operator==(const SolverOptions&) const = default;
};

/// MINRES did not reach the tolerance (or broke down) for one species.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(std::int64_t step, Species species, SolveReport report);
  std::int64_t step;
  Species species;
  SolveReport report;
};

/// The concentrations left the admissible range (model blow-up).
class ModelDivergence : public std::runtime_error {
 public:
  ModelDivergence(std::int64_t step, double max_abs);
  std::int64_t step;
  double max_abs;
};

/// phi = mean + uniform(-ampl, ampl) i.i.d. per node (polymer field first),
/// mu = 0, t = 0.
PhaseState initialize(const MeshGrid& mesh, const ModelParams& params, std::uint64_t seed);

/// Right-hand side of the symmetric (scaled) saddle-point system for one
/// species:
///   [ M phi^k + tau (B_b q_b + B_t q_t) ; -(tau_m / eps) M f^k ]
/// where q_b = p(x)(g + 2 h phi) and q_t = -k phi phi_s are nodal flux data
/// at step k, f^k is the nodal potential derivative at step k and
/// tau_m = tau * mobility.
std::vector<double> assemble_step_rhs(const PhaseState& state, const MeshGrid& mesh,
                                      const SystemMatrices& matrices, const ModelParams& params,
                                      Species species);
/// Same, reusing precomputed potential derivatives.
std::vector<double> assemble_step_rhs(const PhaseState& state, const MeshGrid& mesh,
                                      const SystemMatrices& matrices, const ModelParams& params,
                                      Species species, const PotentialDerivs& derivs);

/// Per-species saddle operator and matching preconditioner.
struct SpeciesSystem {
  double tau_eff = 0.0;  // tau * mobility
  double eps = 0.0;
  std::unique_ptr<BlockOperator2x2> op;
  std::shared_ptr<const MatchingPreconditioner> precond;
};

struct StepOutcome {
  PhaseState state;
  std::array<SolveReport, 2> reports;  // polymer, acceptor
  std::int64_t clamped_nodes = 0;
};

/// Advances the semi-implicit scheme one step at a time. Holds the assembled
/// matrices and the preconditioners; the latter are rebuilt only when tau,
/// eps or the mobilities change.
class Stepper {
 public:
  Stepper(const MeshGrid& mesh, ModelParams params, SolverOptions options);
  Stepper(const MeshGrid& mesh, std::shared_ptr<const SystemMatrices> matrices,
          ModelParams params, SolverOptions options);

  /// One step from `state`. With warm starts enabled the initial guess is
  /// the current (phi, mu), or the linear extrapolation
  /// 2 x^k - x^{k-1} when `previous` is given.
  [[nodiscard]] StepOutcome step(const PhaseState& state,
                                 const PhaseState* previous = nullptr) const;

  void set_params(const ModelParams& params);
  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] const SolverOptions& options() const { return options_; }
  [[nodiscard]] const MeshGrid& mesh() const { return *mesh_; }
  [[nodiscard]] const SystemMatrices& matrices() const { return *matrices_; }
  [[nodiscard]] const SpeciesSystem& system(Species s) const {
    return systems_[s == Species::polymer ? 0 : 1];
  }
  /// Seconds spent building preconditioners so far.
  [[nodiscard]] double setup_seconds() const { return setup_seconds_; }

 private:
  void rebuild_systems();
  SolveReport solve_species(Species s, std::span<const double> rhs, std::span<double> x) const;

  const MeshGrid* mesh_;
  std::shared_ptr<const SystemMatrices> matrices_;
  ModelParams params_;
  SolverOptions options_;
  std::array<SpeciesSystem, 2> systems_;
  double setup_seconds_ = 0.0;
};

/// Largest |phi| over both fields, or +inf when any entry is not finite.
double max_abs_phi(const PhaseState& state);

struct StepRecord {
  std::int64_t step = 0;
  double t = 0.0;
  std::array<SolveReport, 2> reports;
  /// Wall time of the whole step (right-hand sides plus both solves).
  double seconds = 0.0;
};

struct RunCallbacks {
  /// Requested snapshot times; each fires once at the nearest step.
  std::vector<double> snapshot_times;
  std::function<void(std::int64_t step, double t, const PhaseState& state)> on_snapshot;
  std::function<void(const StepRecord& record)> on_step;
};

struct RunResult {
  PhaseState final_state;
  std::vector<StepRecord> records;
};

/// Number of steps needed to reach final_time with step tau (final_time / tau
/// rounded up, with integer ratios taken exactly).
std::int64_t step_count(double final_time, double tau);

/// Runs step_count(final_time, tau) steps from `initial` (or from
/// initialize(mesh, params, params.seed)). Step errors propagate with the
/// failing step index.
RunResult run(const MeshGrid& mesh, const ModelParams& params, const SolverOptions& options,
              const RunCallbacks& callbacks = {},
              const std::optional<PhaseState>& initial = std::nullopt);
RunResult run(const Stepper& stepper, const PhaseState& initial, double final_time,
              const RunCallbacks& callbacks = {});

struct EocResult {
  std::vector<double> taus;
  std::vector<double> error_p;
  std::vector<double> error_nfa;
  double order_p = 0.0;
  double order_nfa = 0.0;
  /// False when a run failed; `note` names the failing step size.
  bool valid = true;
  std::string note;
};

/// Errors at final_time against the tau_ref solution in the discrete L2
/// (mass-matrix) norm, and the least-squares log-log slope per species. All
/// runs share one initial state. Rejects fewer than two distinct step
/// sizes, step sizes that are not integer multiples of tau_ref and final
/// times that are not integer multiples of every step size.
EocResult eoc_study(const MeshGrid& mesh, const ModelParams& params, const SolverOptions& options,
                    const std::vector<double>& taus, double tau_ref, double final_time,
                    const std::optional<PhaseState>& initial = std::nullopt);

/// sqrt(e^T M e)
double l2_norm(const CsrMatrix& mass, std::span<const double> e);

}  // namespace tch
