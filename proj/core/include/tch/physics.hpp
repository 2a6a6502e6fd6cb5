#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tch/mesh.hpp"

namespace tch {

enum class Species { polymer, acceptor };

/// Bulk free energy used for the explicit potential load. `none` switches the
/// potential off and is meant for linear verification runs.
enum class Potential { polynomial, logarithmic, none };

std::string to_string(Species s);
std::string to_string(Potential p);

/// Model coefficients. Defaults are the thin-film parameter set used for the
/// reference experiments (2D, no substrate patterning).
struct ModelParams {
  double eps_p = 1e-3;
  double eps_nfa = 1e-3;
  double mob_p = 1.0;
  double mob_nfa = 1.0;
  double tau = 1e-4;
  double chi_p_nfa = 1.0;
  double chi_p_s = 0.3;
  double chi_nfa_s = 0.3;
  double N_p = 20.0;
  double N_nfa = 20.0;
  double N_s = 1.0;
  double k_evap = 5e-3;
  double g_p = 0.01;
  double g_nfa = 0.01;
  double h_p = 0.0;
  double h_nfa = 0.0;
  bool patterning = false;
  Potential potential = Potential::polynomial;
  double final_time = 2e-3;
  std::uint64_t seed = 0;
  double init_mean = 0.35;
  double init_ampl = 0.01;

  [[nodiscard]] double eps(Species s) const { return s == Species::polymer ? eps_p : eps_nfa; }
  [[nodiscard]] double mobility(Species s) const { return s == Species::polymer ? mob_p : mob_nfa; }

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// Lower clamp for logarithm arguments.
inline constexpr double kLogClamp = 1e-8;

struct PotentialDerivs {
  std::vector<double> df_dp;
  std::vector<double> df_dnfa;
  /// Nodes where a logarithm argument was clamped.
  std::int64_t clamped = 0;
};

// The solvent fraction is eliminated as phi_s = 1 - phi_p - phi_nfa, and all
// derivatives below are total derivatives with respect to phi_p and phi_nfa.

/// f = 3.5 phi_p^2 phi_nfa^2 + 0.1 phi_s^2
double poly_potential(double phi_p, double phi_nfa);
/// Flory-Huggins free energy density.
double log_potential(double phi_p, double phi_nfa, const ModelParams& params);

PotentialDerivs poly_potential_derivs(std::span<const double> phi_p,
                                      std::span<const double> phi_nfa);
PotentialDerivs log_potential_derivs(std::span<const double> phi_p,
                                     std::span<const double> phi_nfa, const ModelParams& params);
/// Dispatch on params.potential.
PotentialDerivs potential_derivs(std::span<const double> phi_p, std::span<const double> phi_nfa,
                                 const ModelParams& params);

/// Substrate preference p_species(x) on the bottom face, {0,1}-valued.
double substrate_pattern(double x, Species species, double x_max, bool patterning);

/// Nodal d f_s / d phi = p(x) (g + 2 h phi), evaluated at every node; only
/// bottom-face nodes contribute once multiplied by the bottom boundary mass.
std::vector<double> surface_flux_bottom(std::span<const double> phi, Species species,
                                        const ModelParams& params, const MeshGrid& mesh);

/// Nodal -k phi phi_s.
std::vector<double> evaporation_flux_top(std::span<const double> phi_species,
                                         std::span<const double> phi_s,
                                         const ModelParams& params);

}  // namespace tch
