#include <doctest.h>

#include <stdexcept>

#include <Eigen/Dense>
#include <cmath>

#include "tch/amg.hpp"
#include "tch/assembly.hpp"

using namespace tch;

namespace {

CsrMatrix laplacian_1d(Index n) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

CsrMatrix schur_factor(const MeshGrid& mesh, double tau, double eps) {
  return add(tau, assemble_stiffness(mesh), std::sqrt(tau / eps), assemble_mass(mesh));
}

// Dense matrix of x = B b for one V-cycle from a zero initial guess.
Eigen::MatrixXd vcycle_matrix(const AmgHierarchy& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXd b(n, n);
  auto ws = h.make_workspace();
  std::vector<double> e(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    std::fill(x.begin(), x.end(), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    h.vcycle(e, x, ws);
    b.col(j) = Eigen::Map<Eigen::VectorXd>(x.data(), n);
  }
  return b;
}

}  // namespace

TEST_CASE("classical strength of connection") {
  // Row 0: off-diagonals -4, -1, 0.5; theta 0.25 keeps |a| >= 1.
  const auto a = CsrMatrix::from_triplets(
      4, 4, {{0, 0, 6.0}, {0, 1, -4.0}, {0, 2, -1.0}, {0, 3, 0.5}, {1, 0, -4.0}, {1, 1, 5.0},
             {2, 0, -1.0}, {2, 2, 2.0}, {3, 0, 0.5}, {3, 3, 1.0}});
  const auto s = classical_strength(a, 0.25);
  CHECK(s.find(0, 1) >= 0);
  CHECK(s.find(0, 2) >= 0);
  CHECK(s.find(0, 3) < 0);
  CHECK(s.find(0, 0) < 0);
  CHECK(s.find(3, 0) >= 0);
  const auto s_strict = classical_strength(a, 0.5);
  CHECK(s_strict.find(0, 2) < 0);
}

TEST_CASE("Ruge-Stueben splitting of the 1D Laplacian alternates") {
  const auto a = laplacian_1d(7);
  const auto split = rs_splitting(classical_strength(a, 0.25), false);
  const std::vector<PointType> expected{PointType::fine,   PointType::coarse, PointType::fine,
                                        PointType::coarse, PointType::fine,   PointType::coarse,
                                        PointType::fine};
  CHECK(split == expected);
}

TEST_CASE("every fine point has a strong coarse neighbour") {
  const MeshGrid mesh = build_mesh(2, {10.0, 2.5}, {30, 15});
  const auto a = schur_factor(mesh, 1e-2, 1e-3);
  for (bool second : {false, true}) {
    const auto s = classical_strength(a, 0.25);
    const auto split = rs_splitting(s, second);
    for (Index i = 0; i < a.rows(); ++i) {
      CHECK(split[static_cast<std::size_t>(i)] != PointType::undecided);
      if (split[static_cast<std::size_t>(i)] != PointType::fine) continue;
      bool has = false;
      for (Index p = s.row_ptr()[i]; p < s.row_ptr()[i + 1]; ++p) {
        has = has || split[static_cast<std::size_t>(s.col_idx()[p])] == PointType::coarse;
      }
      if (s.row_ptr()[i + 1] > s.row_ptr()[i]) CHECK(has);
    }
  }
}

TEST_CASE("classical interpolation reproduces constants for zero row sums") {
  const MeshGrid mesh = build_mesh(2, {1.0, 1.0}, {9, 9});
  const auto k = assemble_stiffness(mesh);
  const auto s = classical_strength(k, 0.25);
  const auto split = rs_splitting(s, false);
  const auto p = classical_interpolation(k, s, split);
  const auto nc = std::count(split.begin(), split.end(), PointType::coarse);
  CHECK(p.rows() == k.rows());
  CHECK(p.cols() == nc);
  const std::vector<double> one(static_cast<std::size_t>(nc), 1.0);
  for (double v : p * one) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  Index c = 0;
  for (Index i = 0; i < k.rows(); ++i) {
    if (split[static_cast<std::size_t>(i)] != PointType::coarse) continue;
    CHECK(p.row_ptr()[i + 1] - p.row_ptr()[i] == 1);
    CHECK(p.at(i, c) == 1.0);
    ++c;
  }
}

TEST_CASE("hierarchy shape") {
  const MeshGrid mesh = build_mesh(2, {10.0, 2.5}, {100, 50});
  const auto h = amg_setup(schur_factor(mesh, 1e-4, 1e-3));
  const auto sizes = h.level_sizes();
  REQUIRE(sizes.size() >= 2);
  for (std::size_t l = 1; l < sizes.size(); ++l) CHECK(sizes[l] < sizes[l - 1]);
  CHECK(sizes.back() <= 64);
  CHECK(h.operator_complexity() < 4.0);
  CHECK(h.level(0).p.cols() == sizes[1]);
}

TEST_CASE("V-cycle is symmetric and contracts the error") {
  const MeshGrid mesh = build_mesh(2, {10.0, 2.5}, {24, 12});
  for (const double tau : {1e-4, 1e-1, 10.0}) {
    CAPTURE(tau);
    const CsrMatrix a = schur_factor(mesh, tau, 1e-3);
    const Eigen::MatrixXd ad = to_dense(a);
    for (bool sym : {true, false}) {
      AmgOptions opt;
      opt.max_coarse = 20;
      opt.symmetric_sweeps = sym;
      const auto h = amg_setup(a, opt);
      REQUIRE(h.num_levels() >= 3);
      const Eigen::MatrixXd b = vcycle_matrix(h);
      CHECK((b - b.transpose()).norm() <= 1e-12 * b.norm());
      // B is SPD, and the A-norm contraction factor is the spectral radius of
      // I - B A.
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(0.5 * (b + b.transpose()));
      CHECK(eb.eigenvalues().minCoeff() > 0.0);
      const Eigen::MatrixXd e = Eigen::MatrixXd::Identity(ad.rows(), ad.cols()) - b * ad;
      const double rho = e.eigenvalues().cwiseAbs().maxCoeff();
      CHECK(rho < 0.5);
    }
  }
}

TEST_CASE("amg_solve against a dense factorization") {
  const MeshGrid mesh = build_mesh(2, {10.0, 2.5}, {20, 20});
  const CsrMatrix a = schur_factor(mesh, 1e-1, 1e-3);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(400, -1.0, 1.0).array().sin();
  const Eigen::VectorXd xref = to_dense(a).ldlt().solve(b);
  AmgOptions opt;
  opt.max_coarse = 30;
  const auto h = amg_setup(a, opt);
  std::vector<double> bv(b.data(), b.data() + 400), x(400);
  const double tol = 1e-6;
  const auto rep = amg_solve(h, bv, x, tol, 100);
  CHECK(rep.converged);
  CHECK(rep.residual_norm <= tol);
  CHECK((Eigen::Map<Eigen::VectorXd>(x.data(), 400) - xref).norm() <= 10 * tol * xref.norm());
  for (std::size_t k = 1; k < rep.history.size(); ++k) CHECK(rep.history[k] < rep.history[k - 1]);
}

TEST_CASE("the default inner tolerance is reached within ten cycles") {
  const MeshGrid mesh = build_mesh(2, {10.0, 2.5}, {50, 25});
  const auto h = amg_setup(schur_factor(mesh, 1e-4, 1e-3));
  std::vector<double> b(static_cast<std::size_t>(h.size())), x(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::cos(0.37 * static_cast<double>(i));
  const auto rep = amg_solve(h, b, x, 1e-4, 100);
  CHECK(rep.converged);
  CHECK(rep.residual_norm <= 1e-4);
  CHECK(rep.iterations <= 10);
}

TEST_CASE("amg_solve modes and errors") {
  const auto a = laplacian_1d(200);
  AmgOptions opt;
  opt.max_coarse = 10;
  const auto h = amg_setup(a, opt);
  std::vector<double> zero(200, 0.0), x(200, 1.0);
  auto rep = amg_solve(h, zero, x, 1e-8, 50);
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(x == zero);

  std::vector<double> b(200, 1.0);
  rep = amg_solve(h, b, x, 0.0, 3);
  CHECK(rep.converged);
  CHECK(rep.iterations == 3);
  CHECK(std::isnan(rep.residual_norm));

  rep = amg_solve(h, b, x, 1e-14, 1);
  CHECK_FALSE(rep.converged);
  CHECK(rep.status == SolveStatus::max_iterations);

  std::vector<double> wrong(10);
  CHECK_THROWS_AS(amg_solve(h, wrong, x, 1e-6, 5), std::invalid_argument);
  CHECK_THROWS_AS(amg_setup(CsrMatrix::from_triplets(2, 3, {{0, 0, 1.0}})), std::invalid_argument);
  CHECK_THROWS_AS(amg_setup(CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}})),
                  std::invalid_argument);
}
