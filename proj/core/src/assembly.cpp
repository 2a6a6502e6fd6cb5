#include "tch/assembly.hpp"

#include <algorithm>
#include <stdexcept>

namespace tch {

namespace {

// Inverse transpose of the element Jacobian applied to the reference
// barycentric gradients.
void barycentric_gradients(const MeshGrid& mesh, const std::array<Index, 4>& el,
                           std::array<std::array<double, 3>, 4>& grad, double& volume) {
  const int d = mesh.dim;
  const auto& p0 = mesh.nodes[el[0]];
  Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
  for (int c = 0; c < d; ++c) {
    const auto& pc = mesh.nodes[el[c + 1]];
    for (int r = 0; r < d; ++r) jac(r, c) = pc[r] - p0[r];
  }
  const double det = jac.determinant();
  volume = d == 2 ? det / 2.0 : det / 6.0;
  if (!(volume > 0.0)) throw std::runtime_error("assembly: degenerate or inverted element");
  const Eigen::Matrix3d jit = jac.inverse().transpose();
  for (int a = 0; a < 4; ++a) grad[a] = {0.0, 0.0, 0.0};
  for (int r = 0; r < d; ++r) {
    double sum = 0.0;
    for (int c = 0; c < d; ++c) {
      grad[c + 1][r] = jit(r, c);
      sum += jit(r, c);
    }
    grad[0][r] = -sum;
  }
}

void scatter(CsrMatrix& m, std::span<const Index> nodes, const std::array<double, 16>& local) {
  const auto nv = nodes.size();
  auto vals = m.values();
  for (std::size_t a = 0; a < nv; ++a) {
    for (std::size_t b = 0; b < nv; ++b) {
      const Index p = m.find(nodes[a], nodes[b]);
      vals[p] += local[a * nv + b];
    }
  }
}

}  // namespace

ElementMatrices p1_element_matrices(const MeshGrid& mesh, Index element) {
  const auto& el = mesh.elements[element];
  const int nv = mesh.nodes_per_element();
  std::array<std::array<double, 3>, 4> grad{};
  ElementMatrices out;
  barycentric_gradients(mesh, el, grad, out.volume);
  // int phi_a phi_b = vol (1 + delta_ab) / ((d+1)(d+2))
  const double mscale = out.volume / ((mesh.dim + 1) * (mesh.dim + 2));
  for (int a = 0; a < nv; ++a) {
    for (int b = a; b < nv; ++b) {
      const double mv = a == b ? 2.0 * mscale : mscale;
      double kv = 0.0;
      for (int r = 0; r < mesh.dim; ++r) kv += grad[a][r] * grad[b][r];
      kv *= out.volume;
      out.mass[a * nv + b] = out.mass[b * nv + a] = mv;
      out.stiffness[a * nv + b] = out.stiffness[b * nv + a] = kv;
    }
  }
  return out;
}

CsrMatrix element_pattern(const MeshGrid& mesh) {
  const Index n = mesh.num_nodes();
  const int nv = mesh.nodes_per_element();
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  for (const auto& el : mesh.elements) {
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) adj[el[a]].push_back(el[b]);
    }
  }
  std::vector<Index> row_ptr(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> col_idx;
  for (Index i = 0; i < n; ++i) {
    auto& row = adj[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    col_idx.insert(col_idx.end(), row.begin(), row.end());
    row_ptr[i + 1] = static_cast<Index>(col_idx.size());
    std::vector<Index>().swap(row);
  }
  std::vector<double> values(col_idx.size(), 0.0);
  return CsrMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

namespace {

CsrMatrix assemble_volume(const MeshGrid& mesh, bool stiffness) {
  CsrMatrix m = element_pattern(mesh);
  const auto nv = static_cast<std::size_t>(mesh.nodes_per_element());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto local = p1_element_matrices(mesh, e);
    scatter(m, std::span<const Index>(mesh.elements[e].data(), nv),
            stiffness ? local.stiffness : local.mass);
  }
  m.set_symmetric(true);
  return m;
}

}  // namespace

CsrMatrix assemble_mass(const MeshGrid& mesh) { return assemble_volume(mesh, false); }

CsrMatrix assemble_stiffness(const MeshGrid& mesh) { return assemble_volume(mesh, true); }

CsrMatrix assemble_boundary_mass(const MeshGrid& mesh, Face which) {
  const auto& facets = boundary_facets(mesh, which);
  const int nv = mesh.nodes_per_facet();
  // int_facet phi_a phi_b = |f| (1 + delta_ab) / (d (d+1)) for a (d-1)-simplex
  const double denom = mesh.dim * (mesh.dim + 1);
  std::vector<Triplet> t;
  t.reserve(facets.size() * static_cast<std::size_t>(nv * nv));
  for (const auto& f : facets) {
    const double s = facet_measure(mesh, f) / denom;
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) t.push_back({f.nodes[a], f.nodes[b], a == b ? 2.0 * s : s});
    }
  }
  CsrMatrix m = CsrMatrix::from_triplets(mesh.num_nodes(), mesh.num_nodes(), std::move(t));
  m.set_symmetric(true);
  return m;
}

std::vector<double> assemble_boundary_load(const CsrMatrix& boundary_mass,
                                           std::span<const double> g_nodal) {
  if (g_nodal.size() != static_cast<std::size_t>(boundary_mass.cols())) {
    throw std::invalid_argument("assemble_boundary_load: nodal vector has wrong length");
  }
  return boundary_mass * g_nodal;
}

std::vector<double> assemble_boundary_load(const MeshGrid& mesh, Face which,
                                           std::span<const double> g_nodal) {
  return assemble_boundary_load(assemble_boundary_mass(mesh, which), g_nodal);
}

}  // namespace tch
