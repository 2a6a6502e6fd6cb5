#pragma once

#include <span>
#include <vector>

#include "tch/amg.hpp"
#include "tch/sparse.hpp"

namespace tch {

/// How the preconditioner's AMG solves are terminated.
struct InnerSolveOptions {
  /// 0 selects tolerance mode; k > 0 runs exactly k V-cycles per solve, which
  /// makes the preconditioner a fixed SPD linear operator.
  int fixed_cycles = 0;
  double tol = 1e-4;
  int max_cycles = 100;

  bool operator==(const InnerSolveOptions&) const = default;
};

struct ApplyStats {
  int cycles = 0;
  /// Inner solves that stopped at max_cycles above tolerance.
  int warnings = 0;
};

/// Block-diagonal preconditioner blkdiag(M, S~) for
///
///   A = [ M      tau K        ]
///       [ tau K  -(tau/eps) M ]
///
/// with the Schur complement S = (tau/eps) M + tau^2 K M^{-1} K replaced by
/// S~ = L M^{-1} L, L = tau K + sqrt(tau/eps) M. The eigenvalues of S~^{-1} S
/// lie in [1/2, 1] for every tau, eps and mesh.
class MatchingPreconditioner {
 public:
  /// `mass` is referenced, not copied, and must outlive the preconditioner.
  static MatchingPreconditioner build(const CsrMatrix& mass, const CsrMatrix& stiffness,
                                      double tau, double eps, const AmgOptions& amg = {},
                                      const InnerSolveOptions& inner = {});

  /// w1 ~ M^{-1} v1 by AMG; w2 ~ L^{-1} M L^{-1} v2 by AMG solve, mass
  /// multiplication and a second AMG solve with the same hierarchy.
  void apply(std::span<const double> v, std::span<double> w, ApplyStats* stats = nullptr) const;

  [[nodiscard]] Index block_size() const { return mass_->rows(); }
  [[nodiscard]] double tau() const { return tau_; }
  [[nodiscard]] double eps() const { return eps_; }
  [[nodiscard]] const CsrMatrix& mass() const { return *mass_; }
  [[nodiscard]] const CsrMatrix& schur_factor() const { return schur_factor_; }
  [[nodiscard]] const AmgHierarchy& mass_hierarchy() const { return mass_amg_; }
  [[nodiscard]] const AmgHierarchy& schur_hierarchy() const { return schur_amg_; }
  [[nodiscard]] const InnerSolveOptions& inner() const { return inner_; }
  void set_inner(const InnerSolveOptions& inner) { inner_ = inner; }

 private:
  const CsrMatrix* mass_ = nullptr;
  CsrMatrix schur_factor_;  // L
  AmgHierarchy mass_amg_;
  AmgHierarchy schur_amg_;
  double tau_ = 0.0;
  double eps_ = 0.0;
  InnerSolveOptions inner_;
};

struct EigenBounds {
  double min = 0.0;
  double max = 0.0;
  std::vector<double> eigenvalues;
};

/// Extremal eigenvalues of S~^{-1} S with dense Cholesky inverses (no AMG).
/// Throws std::length_error when the matrices exceed `cap` rows.
EigenBounds eigen_bounds_check(const CsrMatrix& mass, const CsrMatrix& stiffness, double tau,
                               double eps, Index cap);

}  // namespace tch
