#include "tch/saddle_precond.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace tch {

MatchingPreconditioner MatchingPreconditioner::build(const CsrMatrix& mass,
                                                     const CsrMatrix& stiffness, double tau,
                                                     double eps, const AmgOptions& amg,
                                                     const InnerSolveOptions& inner) {
  if (!(tau > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument("MatchingPreconditioner: tau and eps must be positive");
  }
  if (mass.rows() != mass.cols() || stiffness.rows() != stiffness.cols() ||
      mass.rows() != stiffness.rows()) {
    throw std::invalid_argument("MatchingPreconditioner: M and K dimensions differ");
  }
  MatchingPreconditioner p;
  p.mass_ = &mass;
  p.tau_ = tau;
  p.eps_ = eps;
  p.inner_ = inner;
  p.schur_factor_ = add(tau, stiffness, std::sqrt(tau / eps), mass);
  p.mass_amg_ = amg_setup(mass, amg);
  p.schur_amg_ = amg_setup(p.schur_factor_, amg);
  return p;
}

void MatchingPreconditioner::apply(std::span<const double> v, std::span<double> w,
                                   ApplyStats* stats) const {
  const auto n = static_cast<std::size_t>(block_size());
  if (v.size() != 2 * n || w.size() != 2 * n) {
    throw std::invalid_argument("MatchingPreconditioner::apply: block sizes do not match");
  }
  const bool fixed = inner_.fixed_cycles > 0;
  const double tol = fixed ? 0.0 : inner_.tol;
  const int cycles = fixed ? inner_.fixed_cycles : inner_.max_cycles;

  ApplyStats local;
  const auto record = [&](const SolveReport& r) {
    local.cycles += r.iterations;
    if (!r.converged) ++local.warnings;
  };

  AmgWorkspace ws_mass = mass_amg_.make_workspace();
  AmgWorkspace ws_schur = schur_amg_.make_workspace();
  record(amg_solve(mass_amg_, v.subspan(0, n), w.subspan(0, n), tol, cycles, &ws_mass));

  std::vector<double> t(n), u(n);
  record(amg_solve(schur_amg_, v.subspan(n, n), t, tol, cycles, &ws_schur));
  mass_->multiply(t, u);
  record(amg_solve(schur_amg_, u, w.subspan(n, n), tol, cycles, &ws_schur));

  if (stats != nullptr) {
    stats->cycles += local.cycles;
    stats->warnings += local.warnings;
  }
}

EigenBounds eigen_bounds_check(const CsrMatrix& mass, const CsrMatrix& stiffness, double tau,
                               double eps, Index cap) {
  if (mass.rows() > cap) {
    throw std::length_error("eigen_bounds_check: " + std::to_string(mass.rows()) +
                            " unknowns exceed the dense cap of " + std::to_string(cap));
  }
  if (!(tau > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument("eigen_bounds_check: tau and eps must be positive");
  }
  const Eigen::MatrixXd m = to_dense(mass);
  const Eigen::MatrixXd k = to_dense(stiffness);
  const Eigen::LLT<Eigen::MatrixXd> mchol(m);
  if (mchol.info() != Eigen::Success) {
    throw std::runtime_error("eigen_bounds_check: mass matrix is not positive definite");
  }
  const Eigen::MatrixXd l = tau * k + std::sqrt(tau / eps) * m;
  const Eigen::LLT<Eigen::MatrixXd> lchol(l);
  if (lchol.info() != Eigen::Success) {
    throw std::runtime_error("eigen_bounds_check: L is not positive definite");
  }
  // With M = R R^T and W = L^{-1} R we have S~^{-1} = W W^T. Since
  // L M^{-1} L = S + 2 sqrt(tau/eps) tau K, the eigenvalues of S~^{-1} S are
  // 1 - mu with mu the eigenvalues of the positive semidefinite
  // W^T (2 sqrt(tau/eps) tau K) W. Forming S itself loses accuracy to
  // cancellation once tau K dominates.
  const Eigen::MatrixXd r = mchol.matrixL();
  const Eigen::MatrixXd wmat = lchol.solve(r);
  Eigen::MatrixXd t = wmat.transpose() * (2.0 * std::sqrt(tau / eps) * tau * k) * wmat;
  t = 0.5 * (t + t.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lambda = (1.0 - es.eigenvalues().array()).reverse();
  EigenBounds out;
  out.eigenvalues.assign(lambda.data(), lambda.data() + lambda.size());
  out.min = lambda.minCoeff();
  out.max = lambda.maxCoeff();
  return out;
}

}  // namespace tch
