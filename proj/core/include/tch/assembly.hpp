#pragma once

#include <span>
#include <vector>

#include "tch/mesh.hpp"
#include "tch/sparse.hpp"

namespace tch {

// P1 (linear Lagrange) matrices with exact closed-form element integrals.
// Every matrix is assembled in element order, so values are bit-identical
// from run to run, and (i,j)/(j,i) receive the same element-local value.

/// Node-to-node sparsity of the element connectivity, all values zero.
CsrMatrix element_pattern(const MeshGrid& mesh);

/// Entries int_Omega psi_i psi_j dx.
CsrMatrix assemble_mass(const MeshGrid& mesh);

/// Entries int_Omega grad psi_i . grad psi_j dx.
CsrMatrix assemble_stiffness(const MeshGrid& mesh);

/// Entries int_Gamma psi_i psi_j dsigma over the tagged face. Rows and columns
/// of nodes off the face are empty.
CsrMatrix assemble_boundary_mass(const MeshGrid& mesh, Face which);

/// Surface load int_Gamma g psi_i dsigma with g interpolated at the nodes
/// (group finite element treatment): B_face * g.
std::vector<double> assemble_boundary_load(const MeshGrid& mesh, Face which,
                                           std::span<const double> g_nodal);
std::vector<double> assemble_boundary_load(const CsrMatrix& boundary_mass,
                                           std::span<const double> g_nodal);

/// Local element matrices, row-major (dim+1)^2 entries.
struct ElementMatrices {
  std::array<double, 16> mass{};
  std::array<double, 16> stiffness{};
  double volume = 0.0;
};
ElementMatrices p1_element_matrices(const MeshGrid& mesh, Index element);

}  // namespace tch
