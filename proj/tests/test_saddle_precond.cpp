#include <doctest.h>

#include <stdexcept>

#include <Eigen/Dense>
#include <cmath>

#include "tch/assembly.hpp"
#include "tch/saddle_precond.hpp"

using namespace tch;

namespace {

struct Pair {
  CsrMatrix m, k;
};

Pair matrices(Index nx, Index ny) {
  const MeshGrid mesh = build_mesh(2, {10.0, 2.5}, {nx, ny});
  return {assemble_mass(mesh), assemble_stiffness(mesh)};
}

Eigen::MatrixXd apply_matrix(const MatchingPreconditioner& p) {
  const auto n = static_cast<Eigen::Index>(2 * p.block_size());
  Eigen::MatrixXd out(n, n);
  std::vector<double> e(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    p.apply(e, w);
    out.col(j) = Eigen::Map<Eigen::VectorXd>(w.data(), n);
  }
  return out;
}

}  // namespace

TEST_CASE("eigenvalues of S~^{-1} S match the closed form over the (K, M) spectrum") {
  // For each generalized eigenvalue k of (K, M) the preconditioned Schur
  // complement has the eigenvalue (a^2 + tau^2 k^2) / (tau k + a)^2 with
  // a = sqrt(tau / eps). Frozen extremes from scipy on the 4x2 grid.
  const auto [m, k] = matrices(4, 2);
  struct Case {
    double tau, eps, min, max;
  };
  const std::vector<Case> cases{{1.0, 1.0, 0.5007396449704141, 1.0},
                                {1e-4, 1e-3, 0.9976007239495946, 1.0},
                                {10.0, 10.0, 0.5005745531925319, 1.0}};
  for (const auto& c : cases) {
    CAPTURE(c.tau);
    const auto b = eigen_bounds_check(m, k, c.tau, c.eps, 100);
    CHECK(b.eigenvalues.size() == 8);
    CHECK(b.min == doctest::Approx(c.min).epsilon(1e-12));
    CHECK(b.max == doctest::Approx(c.max).epsilon(1e-12));
  }
}

TEST_CASE("eigenvalue check agrees with an explicitly formed Schur complement") {
  const auto [m, k] = matrices(6, 3);
  const Eigen::MatrixXd md = to_dense(m), kd = to_dense(k);
  for (const auto& [tau, eps] : std::vector<std::pair<double, double>>{{1e-4, 1e-3}, {1e-2, 1.0}, {0.5, 0.1}}) {
    const Eigen::MatrixXd minv = md.inverse();
    const Eigen::MatrixXd s = (tau / eps) * md + tau * tau * kd * minv * kd;
    const Eigen::MatrixXd l = tau * kd + std::sqrt(tau / eps) * md;
    const Eigen::MatrixXd st = l * minv * l;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(s, st, Eigen::EigenvaluesOnly);
    const auto b = eigen_bounds_check(m, k, tau, eps, 100);
    CHECK(b.min == doctest::Approx(ges.eigenvalues().minCoeff()).epsilon(1e-9));
    CHECK(b.max == doctest::Approx(ges.eigenvalues().maxCoeff()).epsilon(1e-9));
  }
}

TEST_CASE("the bound [1/2, 1] holds across the parameter grid") {
  const std::vector<double> grid{1e-7, 1e-4, 1e-1, 1.0, 10.0};
  for (const auto& [nx, ny] : std::vector<std::pair<Index, Index>>{{2, 2}, {5, 3}, {8, 4}}) {
    const auto [m, k] = matrices(nx, ny);
    for (double tau : grid) {
      for (double eps : grid) {
        const auto b = eigen_bounds_check(m, k, tau, eps, 100);
        CHECK(b.min >= 0.5 - 1e-10);
        CHECK(b.max <= 1.0 + 1e-10);
      }
    }
  }
}

TEST_CASE("eigenvalue check guards") {
  const auto [m, k] = matrices(10, 10);
  CHECK_THROWS_AS(eigen_bounds_check(m, k, 1.0, 1.0, 50), std::length_error);
  CHECK_THROWS_AS(eigen_bounds_check(m, k, 0.0, 1.0, 1000), std::invalid_argument);
}

TEST_CASE("fixed-cycle preconditioner is a symmetric positive definite operator") {
  const auto [m, k] = matrices(12, 6);
  InnerSolveOptions inner;
  inner.fixed_cycles = 2;
  AmgOptions amg;
  amg.max_coarse = 10;
  const auto p = MatchingPreconditioner::build(m, k, 1e-2, 1e-3, amg, inner);
  const Eigen::MatrixXd pm = apply_matrix(p);
  CHECK((pm - pm.transpose()).norm() <= 1e-12 * pm.norm());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (pm + pm.transpose()));
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("tight inner tolerance reproduces the exact block inverse") {
  const auto [m, k] = matrices(16, 8);
  const double tau = 1e-3, eps = 1e-2;
  InnerSolveOptions inner;
  inner.tol = 1e-12;
  inner.max_cycles = 200;
  const auto p = MatchingPreconditioner::build(m, k, tau, eps, {}, inner);
  const Eigen::MatrixXd md = to_dense(m), kd = to_dense(k);
  const Eigen::MatrixXd l = tau * kd + std::sqrt(tau / eps) * md;
  const auto n = md.rows();
  Eigen::VectorXd v(2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i) v(i) = std::sin(0.7 * static_cast<double>(i) + 0.2);
  Eigen::VectorXd ref(2 * n);
  ref.head(n) = md.ldlt().solve(v.head(n));
  ref.tail(n) = l.ldlt().solve(md * l.ldlt().solve(v.tail(n)));
  std::vector<double> vv(v.data(), v.data() + 2 * n), w(static_cast<std::size_t>(2 * n));
  ApplyStats stats;
  p.apply(vv, w, &stats);
  CHECK((Eigen::Map<Eigen::VectorXd>(w.data(), 2 * n) - ref).norm() <= 1e-9 * ref.norm());
  CHECK(stats.cycles > 0);
  CHECK(stats.warnings == 0);
}

TEST_CASE("missed inner tolerances are counted") {
  const auto [m, k] = matrices(16, 8);
  InnerSolveOptions inner;
  inner.tol = 1e-15;
  inner.max_cycles = 1;
  const auto p = MatchingPreconditioner::build(m, k, 1e-3, 1e-2, {}, inner);
  std::vector<double> v(static_cast<std::size_t>(2 * p.block_size()), 1.0), w(v.size());
  ApplyStats stats;
  p.apply(v, w, &stats);
  CHECK(stats.warnings == 3);
}

TEST_CASE("build validation") {
  const auto [m, k] = matrices(4, 4);
  const auto [m2, k2] = matrices(5, 4);
  CHECK_THROWS_AS(MatchingPreconditioner::build(m, k, 0.0, 1.0, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MatchingPreconditioner::build(m, k, 1.0, -1.0, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MatchingPreconditioner::build(m, k2, 1.0, 1.0, {}, {}), std::invalid_argument);
  const auto p = MatchingPreconditioner::build(m, k, 0.1, 0.2, {}, {});
  CHECK(p.tau() == 0.1);
  CHECK(p.eps() == 0.2);
  CHECK(p.block_size() == 16);
  std::vector<double> v(10), w(10);
  CHECK_THROWS_AS(p.apply(v, w), std::invalid_argument);
}
