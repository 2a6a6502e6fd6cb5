#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tch {

enum class SolveStatus {
  converged,
  max_iterations,
  /// Zero or negative denominator in the Lanczos recurrence, or a
  /// non-finite quantity. Distinct from running out of iterations.
  breakdown,
};

std::string to_string(SolveStatus s);

struct SolveReport {
  int iterations = 0;
  /// Relative residual the stopping test used. For MINRES this is the
  /// preconditioned residual norm over its initial value.
  double residual_norm = 0.0;
  /// ||b - A x|| / ||b|| in the Euclidean norm, when computed.
  double true_residual = 0.0;
  bool converged = false;
  SolveStatus status = SolveStatus::converged;
  double wall_time = 0.0;
  /// Inner (preconditioner) solves that missed their tolerance.
  int inner_warnings = 0;
  /// Relative residual estimate after every iteration; entry 0 is 1.
  std::vector<double> history;
};

/// y = Op(x). Implementations must not retain the spans.
using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned Lanczos vectors and coefficients, for diagnostics. With
/// q_k = r_k / beta_k and v_k = P^{-1} q_k the recurrence reads
///   A v_k = beta_{k+1} q_{k+1} + alpha_k q_k + beta_k q_{k-1}.
struct LanczosRecord {
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> v;
  std::vector<double> alpha;
  /// beta[k] normalizes q[k]; holds one more entry than alpha.
  std::vector<double> beta;
};

struct MinresOptions {
  double tol = 1e-7;
  int max_iterations = 1000;
  bool compute_true_residual = true;
  /// Start from the incoming contents of x instead of zero. The stopping
  /// test still compares against the preconditioned norm of b, so the
  /// accuracy reached matches a cold start; a good guess only saves
  /// iterations. Costs one extra preconditioner application.
  bool use_initial_guess = false;
  LanczosRecord* lanczos = nullptr;
};

/// Preconditioned MINRES (Paige-Saunders) for a symmetric, possibly
/// indefinite operator with a symmetric positive definite preconditioner.
/// Starts from x = 0 (unless use_initial_guess is set) and stops once the
/// preconditioned residual norm drops below tol times that of b.
SolveReport minres(const LinearMap& op, const LinearMap& prec, std::span<const double> b,
                   std::span<double> x, const MinresOptions& options = {});

}  // namespace tch
