#include "tch/physics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tch {

std::string to_string(Species s) { return s == Species::polymer ? "p" : "nfa"; }

std::string to_string(Potential p) {
  switch (p) {
    case Potential::polynomial:
      return "polynomial";
    case Potential::logarithmic:
      return "logarithmic";
    case Potential::none:
      return "none";
  }
  return "unknown";
}

void ModelParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(name) + " must be positive");
    }
  };
  positive(eps_p, "eps_p");
  positive(eps_nfa, "eps_nfa");
  positive(mob_p, "mob_p");
  positive(mob_nfa, "mob_nfa");
  positive(tau, "tau");
  positive(N_p, "N_p");
  positive(N_nfa, "N_nfa");
  positive(N_s, "N_s");
  positive(final_time, "final_time");
  if (!(k_evap >= 0.0)) throw std::invalid_argument("k_evap must be non-negative");
  if (!(init_ampl >= 0.0)) throw std::invalid_argument("init_ampl must be non-negative");
  if (!(init_mean - init_ampl > 0.0) || !(init_mean + init_ampl < 1.0)) {
    throw std::invalid_argument("init_mean +- init_ampl must lie inside (0, 1)");
  }
  for (double v : {chi_p_nfa, chi_p_s, chi_nfa_s, g_p, g_nfa, h_p, h_nfa}) {
    if (!std::isfinite(v)) throw std::invalid_argument("model coefficients must be finite");
  }
}

double poly_potential(double phi_p, double phi_nfa) {
  const double phi_s = 1.0 - (phi_p + phi_nfa);
  return 3.5 * phi_p * phi_p * phi_nfa * phi_nfa + 0.1 * phi_s * phi_s;
}

namespace {

double xlogx(double x) {
  const double c = std::max(x, kLogClamp);
  return x * std::log(c);
}

}  // namespace

double log_potential(double phi_p, double phi_nfa, const ModelParams& q) {
  const double phi_s = 1.0 - (phi_p + phi_nfa);
  return xlogx(phi_p) / q.N_p + xlogx(phi_nfa) / q.N_nfa + xlogx(phi_s) / q.N_s +
         q.chi_p_nfa * phi_p * phi_nfa + q.chi_p_s * phi_p * phi_s + q.chi_nfa_s * phi_nfa * phi_s;
}

PotentialDerivs poly_potential_derivs(std::span<const double> phi_p,
                                      std::span<const double> phi_nfa) {
  if (phi_p.size() != phi_nfa.size()) {
    throw std::invalid_argument("poly_potential_derivs: length mismatch");
  }
  PotentialDerivs out;
  out.df_dp.resize(phi_p.size());
  out.df_dnfa.resize(phi_p.size());
  for (std::size_t i = 0; i < phi_p.size(); ++i) {
    const double p = phi_p[i];
    const double a = phi_nfa[i];
    const double s = 1.0 - (p + a);
    out.df_dp[i] = 7.0 * (a * a) * p - 0.2 * s;
    out.df_dnfa[i] = 7.0 * (p * p) * a - 0.2 * s;
  }
  return out;
}

PotentialDerivs log_potential_derivs(std::span<const double> phi_p,
                                     std::span<const double> phi_nfa, const ModelParams& q) {
  if (phi_p.size() != phi_nfa.size()) {
    throw std::invalid_argument("log_potential_derivs: length mismatch");
  }
  PotentialDerivs out;
  out.df_dp.resize(phi_p.size());
  out.df_dnfa.resize(phi_p.size());
  for (std::size_t i = 0; i < phi_p.size(); ++i) {
    const double p = phi_p[i];
    const double a = phi_nfa[i];
    const double s = 1.0 - (p + a);
    const double pc = std::max(p, kLogClamp);
    const double ac = std::max(a, kLogClamp);
    const double sc = std::max(s, kLogClamp);
    if (pc != p || ac != a || sc != s) ++out.clamped;
    const double ls = (std::log(sc) + 1.0) / q.N_s;
    out.df_dp[i] = (std::log(pc) + 1.0) / q.N_p - ls + q.chi_p_nfa * a + q.chi_p_s * (s - p) -
                   q.chi_nfa_s * a;
    out.df_dnfa[i] = (std::log(ac) + 1.0) / q.N_nfa - ls + q.chi_p_nfa * p +
                     q.chi_nfa_s * (s - a) - q.chi_p_s * p;
  }
  return out;
}

PotentialDerivs potential_derivs(std::span<const double> phi_p, std::span<const double> phi_nfa,
                                 const ModelParams& params) {
  switch (params.potential) {
    case Potential::polynomial:
      return poly_potential_derivs(phi_p, phi_nfa);
    case Potential::logarithmic:
      return log_potential_derivs(phi_p, phi_nfa, params);
    case Potential::none:
      break;
  }
  PotentialDerivs out;
  out.df_dp.assign(phi_p.size(), 0.0);
  out.df_dnfa.assign(phi_p.size(), 0.0);
  return out;
}

double substrate_pattern(double x, Species species, double x_max, bool patterning) {
  if (!patterning) return 1.0;
  // Polymer-preferring stripes are the closed sixths [0,1/6], [1/3,1/2],
  // [2/3,5/6]; they win at shared endpoints.
  const double s = x / x_max;
  const bool polymer_stripe = (s >= 0.0 && s <= 1.0 / 6.0) || (s >= 1.0 / 3.0 && s <= 0.5) ||
                              (s >= 2.0 / 3.0 && s <= 5.0 / 6.0);
  if (species == Species::polymer) return polymer_stripe ? 1.0 : 0.0;
  return polymer_stripe ? 0.0 : 1.0;
}

std::vector<double> surface_flux_bottom(std::span<const double> phi, Species species,
                                        const ModelParams& q, const MeshGrid& mesh) {
  if (phi.size() != mesh.nodes.size()) {
    throw std::invalid_argument("surface_flux_bottom: nodal vector has wrong length");
  }
  const double g = species == Species::polymer ? q.g_p : q.g_nfa;
  const double h = species == Species::polymer ? q.h_p : q.h_nfa;
  const double x_max = mesh.extents[0];
  std::vector<double> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out[i] = substrate_pattern(mesh.nodes[i][0], species, x_max, q.patterning) *
             (g + 2.0 * h * phi[i]);
  }
  return out;
}

std::vector<double> evaporation_flux_top(std::span<const double> phi_species,
                                         std::span<const double> phi_s, const ModelParams& q) {
  if (phi_species.size() != phi_s.size()) {
    throw std::invalid_argument("evaporation_flux_top: length mismatch");
  }
  std::vector<double> out(phi_s.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -q.k_evap * phi_species[i] * phi_s[i];
  return out;
}

}  // namespace tch
