#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numeric>

#include "tch/assembly.hpp"
#include "tch/simulation.hpp"

using namespace tch;

namespace {

MeshGrid small_mesh(Index nx = 20, Index ny = 10) { return build_mesh(2, {10.0, 2.5}, {nx, ny}); }

double total_mass(const CsrMatrix& m, const std::vector<double>& phi) {
  const auto mphi = m * phi;
  return std::accumulate(mphi.begin(), mphi.end(), 0.0);
}

ModelParams closed_film() {
  ModelParams p;
  p.k_evap = 0.0;
  p.g_p = 0.0;
  p.g_nfa = 0.0;
  return p;
}

}  // namespace

TEST_CASE("initial state") {
  const auto mesh = small_mesh();
  ModelParams p;
  const auto s = initialize(mesh, p, 42);
  REQUIRE(s.phi_p.size() == 200);
  CHECK(s.mu_p == std::vector<double>(200, 0.0));
  CHECK(s.t == 0.0);
  CHECK(s.step == 0);
  for (double v : s.phi_p) CHECK(std::abs(v - 0.35) <= 0.01);
  CHECK(s.phi_p != s.phi_nfa);
  CHECK(s == initialize(mesh, p, 42));
  CHECK(s != initialize(mesh, p, 43));
  p.init_ampl = 0.0;
  const auto flat = initialize(mesh, p, 42);
  CHECK(flat.phi_nfa == std::vector<double>(200, 0.35));
}

TEST_CASE("step counts") {
  CHECK(step_count(2e-3, 1e-4) == 20);
  CHECK(step_count(0.0128, 3.2e-3) == 4);
  CHECK(step_count(10.0, 2e-4) == 50000);
  CHECK(step_count(1.05e-3, 1e-4) == 11);
  CHECK(step_count(0.0, 1e-4) == 0);
  CHECK_THROWS_AS(step_count(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("right-hand side blocks") {
  const auto mesh = small_mesh(6, 4);
  const auto mats = SystemMatrices::assemble(mesh);
  ModelParams p = closed_film();
  p.mob_nfa = 2.0;
  const auto s = initialize(mesh, p, 1);
  const auto d = potential_derivs(s.phi_p, s.phi_nfa, p);
  const auto rhs = assemble_step_rhs(s, mesh, mats, p, Species::acceptor);
  const auto mphi = mats.mass * s.phi_nfa;
  const auto mf = mats.mass * d.df_dnfa;
  const double scale = p.tau * p.mob_nfa / p.eps_nfa;
  REQUIRE(rhs.size() == 48);
  for (std::size_t i = 0; i < 24; ++i) {
    CHECK(rhs[i] == doctest::Approx(mphi[i]).epsilon(1e-14));
    CHECK(rhs[24 + i] == doctest::Approx(-scale * mf[i]).epsilon(1e-14));
  }
}

TEST_CASE("mass is conserved without boundary fluxes") {
  const auto mesh = small_mesh(40, 20);
  const ModelParams p = closed_film();
  SolverOptions opt;
  opt.tol = 1e-10;
  Stepper stepper(mesh, p, opt);
  const auto& m = stepper.matrices().mass;
  auto s = initialize(mesh, p, 7);
  const double m0p = total_mass(m, s.phi_p), m0a = total_mass(m, s.phi_nfa);
  for (int k = 0; k < 100; ++k) s = stepper.step(s).state;
  CHECK(std::abs(total_mass(m, s.phi_p) - m0p) <= 1e-9 * m0p);
  CHECK(std::abs(total_mass(m, s.phi_nfa) - m0a) <= 1e-9 * m0a);
  CHECK(s.step == 100);
  CHECK(s.t == doctest::Approx(100 * p.tau));
}

TEST_CASE("a constant state is an equilibrium of the closed film") {
  const auto mesh = small_mesh();
  ModelParams p = closed_film();
  p.init_ampl = 0.0;
  SolverOptions opt;
  opt.tol = 1e-12;
  Stepper stepper(mesh, p, opt);
  auto s = initialize(mesh, p, 0);
  for (int k = 0; k < 5; ++k) s = stepper.step(s).state;
  for (double v : s.phi_p) CHECK(v == doctest::Approx(0.35).epsilon(1e-10));
  // f = 7 a^2 p - 0.2 s at p = a = 0.35, s = 0.3
  const double f = 7.0 * 0.35 * 0.35 * 0.35 - 0.2 * 0.3;
  for (double v : s.mu_p) CHECK(v == doctest::Approx(f).epsilon(1e-8));
}

TEST_CASE("steps are reproducible and species-symmetric") {
  const auto mesh = small_mesh(30, 15);
  const ModelParams p;
  SolverOptions opt;
  const Stepper seq(mesh, p, opt);
  opt.deterministic = false;
  const Stepper par(mesh, p, opt);
  const auto s0 = initialize(mesh, p, 3);
  const auto a = seq.step(s0);
  const auto b = seq.step(s0);
  const auto c = par.step(s0);
  CHECK(a.state == b.state);
  CHECK(a.state == c.state);
  CHECK(a.reports[0].iterations == c.reports[0].iterations);

  PhaseState swapped = s0;
  std::swap(swapped.phi_p, swapped.phi_nfa);
  const auto d = seq.step(swapped);
  CHECK(d.state.phi_p == a.state.phi_nfa);
  CHECK(d.state.phi_nfa == a.state.phi_p);
  CHECK(d.state.mu_p == a.state.mu_nfa);
}

TEST_CASE("warm starts reach the same accuracy with fewer iterations") {
  const auto mesh = small_mesh(40, 20);
  const ModelParams p;
  SolverOptions cold;
  SolverOptions warm = cold;
  warm.warm_start = true;
  const Stepper sc(mesh, p, cold), sw(mesh, p, warm);
  auto s = initialize(mesh, p, 5);
  PhaseState prev;
  for (int k = 0; k < 10; ++k) {
    prev = s;
    s = sc.step(s).state;
  }
  const auto rc = sc.step(s);
  const auto rw = sw.step(s, &prev);
  CHECK(rw.reports[0].converged);
  CHECK(rw.reports[0].iterations < rc.reports[0].iterations);
  const auto& m = sc.matrices().mass;
  std::vector<double> diff(rc.state.phi_p.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = rc.state.phi_p[i] - rw.state.phi_p[i];
  CHECK(l2_norm(m, diff) <= 1e-5 * l2_norm(m, rc.state.phi_p));
}

TEST_CASE("run drives snapshots and step callbacks") {
  const auto mesh = small_mesh();
  ModelParams p;
  p.final_time = 10 * p.tau;
  RunCallbacks cb;
  cb.snapshot_times = {0.0, 3 * p.tau, 7.3 * p.tau, 1.0};
  std::vector<std::int64_t> snaps;
  int records = 0;
  cb.on_snapshot = [&](std::int64_t k, double, const PhaseState&) { snaps.push_back(k); };
  cb.on_step = [&](const StepRecord&) { ++records; };
  const auto res = run(mesh, p, {}, cb);
  CHECK(snaps == std::vector<std::int64_t>{0, 3, 7});
  CHECK(records == 10);
  CHECK(res.records.size() == 10);
  CHECK(res.final_state.step == 10);
  CHECK(res.records.back().reports[1].converged);
}

TEST_CASE("failures carry the step index") {
  const auto mesh = small_mesh();
  const ModelParams p;
  SolverOptions opt;
  opt.max_iterations = 1;
  const Stepper capped(mesh, p, opt);
  const auto s0 = initialize(mesh, p, 0);
  try {
    (void)capped.step(s0);
    FAIL("expected SolverFailure");
  } catch (const SolverFailure& e) {
    CHECK(e.step == 1);
    CHECK(e.species == Species::polymer);
    CHECK(e.report.status == SolveStatus::max_iterations);
  }
  opt = {};
  opt.divergence_bound = 0.2;
  const Stepper tight(mesh, p, opt);
  CHECK_THROWS_AS((void)tight.step(s0), ModelDivergence);

  PhaseState bad = s0;
  bad.phi_p[3] = std::nan("");
  CHECK(max_abs_phi(bad) == std::numeric_limits<double>::infinity());
  bad.phi_p.pop_back();
  CHECK_THROWS_AS((void)tight.step(bad), std::invalid_argument);
}

TEST_CASE("changing parameters rebuilds the preconditioners only when needed") {
  const auto mesh = small_mesh();
  ModelParams p;
  Stepper st(mesh, p, {});
  const auto* before = st.system(Species::polymer).precond.get();
  CHECK(before == st.system(Species::acceptor).precond.get());
  p.k_evap = 1e-2;
  st.set_params(p);
  CHECK(st.system(Species::polymer).precond.get() == before);
  p.eps_nfa = 1e-2;
  st.set_params(p);
  CHECK(st.system(Species::acceptor).precond->eps() == 1e-2);
  CHECK(st.system(Species::polymer).precond.get() != st.system(Species::acceptor).precond.get());
}

TEST_CASE("eoc_study validation") {
  const auto mesh = small_mesh(6, 4);
  const ModelParams p;
  CHECK_THROWS_AS(eoc_study(mesh, p, {}, {2e-4}, 1e-4, 8e-4), std::invalid_argument);
  CHECK_THROWS_AS(eoc_study(mesh, p, {}, {2e-4, 3e-4}, 2e-4, 1.2e-3), std::invalid_argument);
  CHECK_THROWS_AS(eoc_study(mesh, p, {}, {2e-4, 4e-4}, 1e-4, 1e-3), std::invalid_argument);
}

TEST_CASE("backward Euler is first order on the linear problem") {
  // Smooth initial data, no potential and no evaporation: the scheme reduces
  // to the implicit Euler method for a linear fourth-order equation.
  const auto mesh = small_mesh(40, 10);
  ModelParams p = closed_film();
  p.potential = Potential::none;
  p.eps_p = p.eps_nfa = 1.0;
  PhaseState s0;
  for (const auto& x : mesh.nodes) {
    s0.phi_p.push_back(0.35 + 0.05 * std::cos(2.0 * M_PI * x[0] / 10.0));
    s0.phi_nfa.push_back(0.35 + 0.05 * std::cos(3.0 * M_PI * x[0] / 10.0));
  }
  s0.mu_p.assign(s0.phi_p.size(), 0.0);
  s0.mu_nfa = s0.mu_p;
  SolverOptions opt;
  opt.tol = 1e-11;
  const auto r = eoc_study(mesh, p, opt, {0.05, 0.1, 0.2, 0.4}, 0.0125, 3.2, s0);
  REQUIRE(r.valid);
  CAPTURE(r.error_p[0]);
  CHECK(r.order_p == doctest::Approx(1.0).epsilon(0.1));
  CHECK(r.order_nfa == doctest::Approx(1.0).epsilon(0.1));
  for (std::size_t i = 1; i < r.taus.size(); ++i) CHECK(r.error_p[i] > r.error_p[i - 1]);
}
