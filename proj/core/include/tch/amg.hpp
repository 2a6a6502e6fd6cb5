#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "tch/minres.hpp"
#include "tch/sparse.hpp"

namespace tch {

struct AmgOptions {
  /// Classical strength threshold: j is strong for i when
  /// |a_ij| >= theta * max_{k != i} |a_ik|.
  double strength_threshold = 0.25;
  /// Stop coarsening once a level has at most this many unknowns.
  Index max_coarse = 64;
  int max_levels = 25;
  /// Symmetric Gauss-Seidel sweeps (forward then backward) before and after
  /// the coarse-grid correction.
  int presweeps = 1;
  int postsweeps = 1;
  /// false: forward sweeps before and backward sweeps after the correction
  /// (half the smoothing work; the V-cycle stays symmetric when
  /// presweeps == postsweeps).
  bool symmetric_sweeps = true;
  /// Second Ruge-Stueben pass enforcing a common C point for strong F-F pairs.
  bool second_pass = false;

  bool operator==(const AmgOptions&) const = default;
};

enum class PointType : signed char { undecided = 0, coarse = 1, fine = 2 };

/// Strength-of-connection pattern (no diagonal); values are the a_ij.
CsrMatrix classical_strength(const CsrMatrix& a, double theta);
/// Ruge-Stueben C/F splitting from a strength pattern.
std::vector<PointType> rs_splitting(const CsrMatrix& strength, bool second_pass);
/// Classical (direct plus distance-one F-F distribution) interpolation.
CsrMatrix classical_interpolation(const CsrMatrix& a, const CsrMatrix& strength,
                                  std::span<const PointType> splitting);

struct AmgLevel {
  CsrMatrix a;
  CsrMatrix p;  // interpolation to this level from the next coarser one
  CsrMatrix r;  // p transposed
  std::vector<double> inv_diag;
};

/// Caller-owned scratch space for a V-cycle; one per concurrent solve.
struct AmgWorkspace {
  std::vector<std::vector<double>> b;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> r;
};

class AmgHierarchy {
 public:
  AmgHierarchy() = default;

  [[nodiscard]] int num_levels() const { return static_cast<int>(levels_.size()); }
  [[nodiscard]] const AmgLevel& level(int l) const { return levels_[l]; }
  [[nodiscard]] std::vector<Index> level_sizes() const;
  /// Sum of nnz over all levels divided by nnz of the finest operator.
  [[nodiscard]] double operator_complexity() const;
  [[nodiscard]] Index size() const { return levels_.empty() ? 0 : levels_.front().a.rows(); }
  [[nodiscard]] const AmgOptions& options() const { return options_; }

  [[nodiscard]] AmgWorkspace make_workspace() const;
  /// One V-cycle for A x = b, updating x in place. A symmetric operator on
  /// SPD inputs.
  void vcycle(std::span<const double> b, std::span<double> x, AmgWorkspace& ws) const;

 private:
  friend AmgHierarchy amg_setup(const CsrMatrix& a, const AmgOptions& options);
  void cycle(int l, AmgWorkspace& ws) const;

  std::vector<AmgLevel> levels_;
  Eigen::LDLT<Eigen::MatrixXd> coarse_;
  AmgOptions options_;
};

/// Classical Ruge-Stueben setup. Rejects non-square input and zero diagonals.
/// When no coarse points can be selected the hierarchy has a single level
/// solved by dense factorization.
AmgHierarchy amg_setup(const CsrMatrix& a, const AmgOptions& options = {});

/// V-cycles from x = 0 until ||b - A x|| <= tol ||b|| or max_cycles.
/// tol <= 0 selects fixed-cycle mode: exactly max_cycles cycles, which makes
/// the solve a fixed linear operator; the residual is not evaluated.
SolveReport amg_solve(const AmgHierarchy& h, std::span<const double> b, std::span<double> x,
                      double tol, int max_cycles, AmgWorkspace* ws = nullptr);

}  // namespace tch
