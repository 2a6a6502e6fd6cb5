#include "tch/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tch {

namespace {

double signed_volume(const MeshGrid& m, const std::array<Index, 4>& el) {
  const auto& a = m.nodes[el[0]];
  const auto& b = m.nodes[el[1]];
  const auto& c = m.nodes[el[2]];
  if (m.dim == 2) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
  }
  const auto& d = m.nodes[el[3]];
  const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const double w[3] = {d[0] - a[0], d[1] - a[1], d[2] - a[2]};
  const double det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
                     u[2] * (v[0] * w[1] - v[1] * w[0]);
  return det / 6.0;
}

// Facets of an element whose vertices all sit on grid row j == row.
void collect_face_facets(const MeshGrid& m, const std::vector<Index>& row_of_node, Index row,
                         std::vector<Facet>& out) {
  const int nv = m.nodes_per_element();
  for (const auto& el : m.elements) {
    for (int skip = 0; skip < nv; ++skip) {
      Facet f;
      int n = 0;
      bool on_face = true;
      for (int a = 0; a < nv; ++a) {
        if (a == skip) continue;
        if (row_of_node[el[a]] != row) {
          on_face = false;
          break;
        }
        f.nodes[n++] = el[a];
      }
      if (on_face) out.push_back(f);
    }
  }
}

}  // namespace

Index MeshGrid::node_id(Index i, Index j, Index k) const {
  return i + counts[0] * (j + counts[1] * k);
}

MeshGrid build_mesh(int dim, const std::vector<double>& extents, const std::vector<Index>& counts) {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("build_mesh: dim must be 2 or 3, got " + std::to_string(dim));
  }
  if (extents.size() != static_cast<std::size_t>(dim) ||
      counts.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("build_mesh: extents and counts must have dim entries");
  }
  for (int a = 0; a < dim; ++a) {
    if (counts[a] < 2) {
      throw std::invalid_argument("build_mesh: every axis needs at least 2 grid points");
    }
    if (!(extents[a] > 0.0)) {
      throw std::invalid_argument("build_mesh: extents must be positive");
    }
  }

  MeshGrid m;
  m.dim = dim;
  m.extents = extents;
  m.counts = counts;

  const Index nx = counts[0];
  const Index ny = counts[1];
  const Index nz = dim == 3 ? counts[2] : 1;
  m.nodes.reserve(static_cast<std::size_t>(nx) * ny * nz);
  std::vector<Index> row_of_node;
  row_of_node.reserve(m.nodes.capacity());
  for (Index k = 0; k < nz; ++k) {
    for (Index j = 0; j < ny; ++j) {
      for (Index i = 0; i < nx; ++i) {
        Point p{extents[0] * i / (nx - 1), extents[1] * j / (ny - 1), 0.0};
        if (dim == 3) p[2] = extents[2] * k / (nz - 1);
        m.nodes.push_back(p);
        row_of_node.push_back(j);
      }
    }
  }

  if (dim == 2) {
    m.elements.reserve(2 * static_cast<std::size_t>(nx - 1) * (ny - 1));
    for (Index j = 0; j + 1 < ny; ++j) {
      for (Index i = 0; i + 1 < nx; ++i) {
        const Index n00 = m.node_id(i, j);
        const Index n10 = m.node_id(i + 1, j);
        const Index n01 = m.node_id(i, j + 1);
        const Index n11 = m.node_id(i + 1, j + 1);
        m.elements.push_back({n00, n10, n11, -1});
        m.elements.push_back({n00, n11, n01, -1});
      }
    }
  } else {
    // Kuhn split: one tetrahedron per monotone lattice path from the cell's
    // lower corner to its upper corner.
    static constexpr std::array<std::array<int, 3>, 6> kPaths{{
        {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
    }};
    m.elements.reserve(6 * static_cast<std::size_t>(nx - 1) * (ny - 1) * (nz - 1));
    for (Index k = 0; k + 1 < nz; ++k) {
      for (Index j = 0; j + 1 < ny; ++j) {
        for (Index i = 0; i + 1 < nx; ++i) {
          for (const auto& path : kPaths) {
            std::array<Index, 3> c{i, j, k};
            std::array<Index, 4> el{};
            el[0] = m.node_id(c[0], c[1], c[2]);
            for (int s = 0; s < 3; ++s) {
              ++c[path[s]];
              el[s + 1] = m.node_id(c[0], c[1], c[2]);
            }
            if (signed_volume(m, el) < 0.0) std::swap(el[2], el[3]);
            m.elements.push_back(el);
          }
        }
      }
    }
  }

  collect_face_facets(m, row_of_node, ny - 1, m.facets_top);
  collect_face_facets(m, row_of_node, 0, m.facets_bottom);
  return m;
}

const std::vector<Facet>& boundary_facets(const MeshGrid& mesh, Face which) {
  return which == Face::top ? mesh.facets_top : mesh.facets_bottom;
}

double element_volume(const MeshGrid& mesh, Index e) {
  return signed_volume(mesh, mesh.elements[e]);
}

double facet_measure(const MeshGrid& mesh, const Facet& f) {
  const auto& a = mesh.nodes[f.nodes[0]];
  const auto& b = mesh.nodes[f.nodes[1]];
  if (mesh.dim == 2) {
    return std::hypot(b[0] - a[0], b[1] - a[1], b[2] - a[2]);
  }
  const auto& c = mesh.nodes[f.nodes[2]];
  const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const double cx = u[1] * v[2] - u[2] * v[1];
  const double cy = u[2] * v[0] - u[0] * v[2];
  const double cz = u[0] * v[1] - u[1] * v[0];
  return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

}  // namespace tch
