#include "tch/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <thread>

#include "tch/assembly.hpp"
#include "tch/fit.hpp"

namespace tch {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

SolverFailure::SolverFailure(std::int64_t step_, Species species_, SolveReport report_)
    : std::runtime_error("MINRES " + to_string(report_.status) + " for species " +
                         to_string(species_) + " at step " + std::to_string(step_) + " after " +
                         std::to_string(report_.iterations) + " iterations (residual " +
                         fmt(report_.residual_norm) + ")"),
      step(step_),
      species(species_),
      report(std::move(report_)) {}

ModelDivergence::ModelDivergence(std::int64_t step_, double max_abs_)
    : std::runtime_error("concentrations diverged at step " + std::to_string(step_) +
                         " (max |phi| = " + fmt(max_abs_) + ")"),
      step(step_),
      max_abs(max_abs_) {}

SystemMatrices SystemMatrices::assemble(const MeshGrid& mesh) {
  return {assemble_mass(mesh), assemble_stiffness(mesh), assemble_boundary_mass(mesh, Face::bottom),
          assemble_boundary_mass(mesh, Face::top)};
}

PhaseState initialize(const MeshGrid& mesh, const ModelParams& params, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(mesh.num_nodes());
  std::mt19937_64 gen(seed);
  const auto draw = [&](std::vector<double>& phi) {
    phi.resize(n);
    for (auto& v : phi) {
      const double u = std::generate_canonical<double, 53>(gen);
      v = params.init_ampl == 0.0 ? params.init_mean
                                  : params.init_mean + params.init_ampl * (2.0 * u - 1.0);
    }
  };
  PhaseState s;
  draw(s.phi_p);
  draw(s.phi_nfa);
  s.mu_p.assign(n, 0.0);
  s.mu_nfa.assign(n, 0.0);
  return s;
}

std::vector<double> assemble_step_rhs(const PhaseState& state, const MeshGrid& mesh,
                                      const SystemMatrices& mats, const ModelParams& params,
                                      Species species, const PotentialDerivs& derivs) {
  const auto n = static_cast<std::size_t>(mesh.num_nodes());
  const auto& phi = state.phi(species);
  std::vector<double> phi_s(n);
  for (std::size_t i = 0; i < n; ++i) phi_s[i] = 1.0 - (state.phi_p[i] + state.phi_nfa[i]);

  std::vector<double> rhs(2 * n);
  std::span<double> first(rhs.data(), n);
  std::span<double> second(rhs.data() + n, n);

  mats.mass.multiply(phi, first);
  const auto q_bottom = surface_flux_bottom(phi, species, params, mesh);
  const auto q_top = evaporation_flux_top(phi, phi_s, params);
  mats.bottom_mass.multiply_add(params.tau, q_bottom, 1.0, first);
  mats.top_mass.multiply_add(params.tau, q_top, 1.0, first);

  const auto& f = species == Species::polymer ? derivs.df_dp : derivs.df_dnfa;
  const double tau_eff = params.tau * params.mobility(species);
  mats.mass.multiply_add(-tau_eff / params.eps(species), f, 0.0, second);
  return rhs;
}

std::vector<double> assemble_step_rhs(const PhaseState& state, const MeshGrid& mesh,
                                      const SystemMatrices& matrices, const ModelParams& params,
                                      Species species) {
  const auto derivs = potential_derivs(state.phi_p, state.phi_nfa, params);
  return assemble_step_rhs(state, mesh, matrices, params, species, derivs);
}

Stepper::Stepper(const MeshGrid& mesh, ModelParams params, SolverOptions options)
    : Stepper(mesh, std::make_shared<const SystemMatrices>(SystemMatrices::assemble(mesh)),
              std::move(params), std::move(options)) {}

Stepper::Stepper(const MeshGrid& mesh, std::shared_ptr<const SystemMatrices> matrices,
                 ModelParams params, SolverOptions options)
    : mesh_(&mesh),
      matrices_(std::move(matrices)),
      params_(std::move(params)),
      options_(std::move(options)) {
  params_.validate();
  rebuild_systems();
}

void Stepper::set_params(const ModelParams& params) {
  params.validate();
  const bool same_operators = params.tau == params_.tau && params.eps_p == params_.eps_p &&
                              params.eps_nfa == params_.eps_nfa && params.mob_p == params_.mob_p &&
                              params.mob_nfa == params_.mob_nfa;
  params_ = params;
  if (!same_operators) rebuild_systems();
}

void Stepper::rebuild_systems() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& m = matrices_->mass;
  const auto& k = matrices_->stiffness;
  for (int i = 0; i < 2; ++i) {
    const Species s = i == 0 ? Species::polymer : Species::acceptor;
    SpeciesSystem& sys = systems_[i];
    sys.tau_eff = params_.tau * params_.mobility(s);
    sys.eps = params_.eps(s);
    // Second row scaled by -tau_eff/eps, which makes the system symmetric:
    //   [ M          tau_eff K          ]
    //   [ tau_eff K  -(tau_eff / eps) M ]
    sys.op = std::make_unique<BlockOperator2x2>(
        BlockOperator2x2::Block{&m, 1.0}, BlockOperator2x2::Block{&k, sys.tau_eff},
        BlockOperator2x2::Block{&k, sys.tau_eff},
        BlockOperator2x2::Block{&m, -sys.tau_eff / sys.eps});
    if (i == 1 && sys.tau_eff == systems_[0].tau_eff && sys.eps == systems_[0].eps) {
      sys.precond = systems_[0].precond;
    } else {
      sys.precond = std::make_shared<const MatchingPreconditioner>(MatchingPreconditioner::build(
          m, k, sys.tau_eff, sys.eps, options_.amg, options_.inner));
    }
  }
  setup_seconds_ += seconds_since(t0);
}

SolveReport Stepper::solve_species(Species s, std::span<const double> rhs,
                                   std::span<double> x) const {
  const SpeciesSystem& sys = system(s);
  ApplyStats stats;
  const LinearMap op = [&sys](std::span<const double> in, std::span<double> out) {
    sys.op->apply(in, out);
  };
  const LinearMap prec = [&sys, &stats](std::span<const double> in, std::span<double> out) {
    sys.precond->apply(in, out, &stats);
  };
  MinresOptions mo;
  mo.tol = options_.tol;
  mo.max_iterations = options_.max_iterations;
  mo.use_initial_guess = options_.warm_start;
  SolveReport rep = minres(op, prec, rhs, x, mo);
  rep.inner_warnings = stats.warnings;
  return rep;
}

double max_abs_phi(const PhaseState& state) {
  double m = 0.0;
  for (const auto* f : {&state.phi_p, &state.phi_nfa}) {
    for (double v : *f) {
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
      m = std::max(m, std::abs(v));
    }
  }
  return m;
}

StepOutcome Stepper::step(const PhaseState& state, const PhaseState* previous) const {
  const auto n = static_cast<std::size_t>(mesh_->num_nodes());
  if (state.phi_p.size() != n || state.phi_nfa.size() != n) {
    throw std::invalid_argument("Stepper::step: state does not match the mesh");
  }
  const std::int64_t next = state.step + 1;
  const auto derivs = potential_derivs(state.phi_p, state.phi_nfa, params_);

  StepOutcome out;
  out.clamped_nodes = derivs.clamped;
  std::array<std::vector<double>, 2> sol;
  const auto solve = [&](int i) {
    const Species s = i == 0 ? Species::polymer : Species::acceptor;
    const auto rhs = assemble_step_rhs(state, *mesh_, *matrices_, params_, s, derivs);
    sol[i].assign(2 * n, 0.0);
    if (options_.warm_start && state.mu(s).size() == n) {
      const auto& phi = state.phi(s);
      const auto& mu = state.mu(s);
      const bool extrapolate = previous != nullptr && previous->mu(s).size() == n &&
                               previous->phi(s).size() == n;
      for (std::size_t j = 0; j < n; ++j) {
        sol[i][j] = extrapolate ? 2.0 * phi[j] - previous->phi(s)[j] : phi[j];
        sol[i][n + j] = extrapolate ? 2.0 * mu[j] - previous->mu(s)[j] : mu[j];
      }
    }
    out.reports[i] = solve_species(s, rhs, sol[i]);
  };
  if (options_.deterministic) {
    solve(0);
    solve(1);
  } else {
    std::thread worker(solve, 1);
    solve(0);
    worker.join();
  }
  for (int i = 0; i < 2; ++i) {
    if (!out.reports[i].converged) {
      throw SolverFailure(next, i == 0 ? Species::polymer : Species::acceptor, out.reports[i]);
    }
  }

  auto& ns = out.state;
  ns.phi_p.assign(sol[0].begin(), sol[0].begin() + static_cast<std::ptrdiff_t>(n));
  ns.mu_p.assign(sol[0].begin() + static_cast<std::ptrdiff_t>(n), sol[0].end());
  ns.phi_nfa.assign(sol[1].begin(), sol[1].begin() + static_cast<std::ptrdiff_t>(n));
  ns.mu_nfa.assign(sol[1].begin() + static_cast<std::ptrdiff_t>(n), sol[1].end());
  ns.t = state.t + params_.tau;
  ns.step = next;

  const double amax = max_abs_phi(ns);
  if (!(amax <= options_.divergence_bound)) throw ModelDivergence(next, amax);
  return out;
}

std::int64_t step_count(double final_time, double tau) {
  if (!(tau > 0.0) || !(final_time >= 0.0)) {
    throw std::invalid_argument("step_count: need tau > 0 and final_time >= 0");
  }
  const double r = final_time / tau;
  const double nearest = std::round(r);
  if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, r)) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(r));
}

RunResult run(const Stepper& stepper, const PhaseState& initial, double final_time,
              const RunCallbacks& cb) {
  const double tau = stepper.params().tau;
  const std::int64_t steps = step_count(final_time, tau);
  std::vector<bool> fired(cb.snapshot_times.size(), false);
  const auto maybe_snapshot = [&](const PhaseState& s) {
    if (!cb.on_snapshot) return;
    for (std::size_t i = 0; i < cb.snapshot_times.size(); ++i) {
      if (!fired[i] && std::abs(cb.snapshot_times[i] - s.t) <= 0.5 * tau * (1.0 + 1e-9)) {
        fired[i] = true;
        cb.on_snapshot(s.step, s.t, s);
      }
    }
  };

  RunResult res;
  res.final_state = initial;
  res.records.reserve(static_cast<std::size_t>(steps));
  maybe_snapshot(res.final_state);
  const bool keep_previous = stepper.options().warm_start;
  PhaseState previous;
  for (std::int64_t k = 0; k < steps; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    StepOutcome out = stepper.step(res.final_state, k > 0 && keep_previous ? &previous : nullptr);
    StepRecord rec{out.state.step, out.state.t, std::move(out.reports), seconds_since(t0)};
    if (keep_previous) previous = std::move(res.final_state);
    res.final_state = std::move(out.state);
    if (cb.on_step) cb.on_step(rec);
    res.records.push_back(std::move(rec));
    maybe_snapshot(res.final_state);
  }
  return res;
}

RunResult run(const MeshGrid& mesh, const ModelParams& params, const SolverOptions& options,
              const RunCallbacks& callbacks, const std::optional<PhaseState>& initial) {
  Stepper stepper(mesh, params, options);
  const PhaseState init = initial ? *initial : initialize(mesh, params, params.seed);
  return run(stepper, init, params.final_time, callbacks);
}

double l2_norm(const CsrMatrix& mass, std::span<const double> e) {
  const auto me = mass * e;
  return std::sqrt(std::max(0.0, dot(e, me)));
}

namespace {

bool is_integer_ratio(double num, double den) {
  const double r = num / den;
  return r >= 1.0 - 1e-9 && std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

}  // namespace

EocResult eoc_study(const MeshGrid& mesh, const ModelParams& params, const SolverOptions& options,
                    const std::vector<double>& taus, double tau_ref, double final_time,
                    const std::optional<PhaseState>& initial) {
  std::set<double> distinct(taus.begin(), taus.end());
  if (distinct.size() < 2) {
    throw std::invalid_argument("eoc_study: need at least two distinct step sizes");
  }
  if (!(tau_ref > 0.0) || !(final_time > 0.0)) {
    throw std::invalid_argument("eoc_study: tau_ref and final_time must be positive");
  }
  for (double tau : taus) {
    if (!(tau > 0.0) || !is_integer_ratio(tau, tau_ref)) {
      throw std::invalid_argument("eoc_study: every step size must be an integer multiple of tau_ref");
    }
    if (!is_integer_ratio(final_time, tau)) {
      throw std::invalid_argument("eoc_study: final_time must be an integer multiple of every step size");
    }
  }

  const auto shared = std::make_shared<const SystemMatrices>(SystemMatrices::assemble(mesh));
  const PhaseState init = initial ? *initial : initialize(mesh, params, params.seed);

  EocResult res;
  res.taus = taus;
  const auto solve_to_end = [&](double tau, PhaseState& out) -> bool {
    ModelParams p = params;
    p.tau = tau;
    p.final_time = final_time;
    try {
      Stepper stepper(mesh, shared, p, options);
      out = run(stepper, init, final_time).final_state;
      return true;
    } catch (const SolverFailure& e) {
      res.note = "tau=" + fmt(tau) + ": " + e.what();
    } catch (const ModelDivergence& e) {
      res.note = "tau=" + fmt(tau) + ": " + e.what();
    }
    res.valid = false;
    return false;
  };

  PhaseState ref;
  if (!solve_to_end(tau_ref, ref)) return res;
  for (double tau : taus) {
    PhaseState s;
    if (!solve_to_end(tau, s)) return res;
    std::vector<double> ep(s.phi_p.size()), en(s.phi_nfa.size());
    for (std::size_t i = 0; i < ep.size(); ++i) {
      ep[i] = s.phi_p[i] - ref.phi_p[i];
      en[i] = s.phi_nfa[i] - ref.phi_nfa[i];
    }
    res.error_p.push_back(l2_norm(shared->mass, ep));
    res.error_nfa.push_back(l2_norm(shared->mass, en));
  }
  try {
    res.order_p = loglog_slope(res.taus, res.error_p);
    res.order_nfa = loglog_slope(res.taus, res.error_nfa);
  } catch (const std::invalid_argument& e) {
    res.valid = false;
    res.note = e.what();
  }
  return res;
}

}  // namespace tch
