#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace tch {

using Index = std::int32_t;

/// Boundary portions of the film domain. The y axis is the film height.
enum class Face { top, bottom };

using Point = std::array<double, 3>;

/// A (dim-1)-simplex on a tagged face. Unused vertex slots hold -1.
struct Facet {
  std::array<Index, 3> nodes{-1, -1, -1};
};

/// Uniform simplicial mesh of an axis-aligned box [0,Lx]x[0,Ly](x[0,Lz]).
///
/// Nodes are numbered lexicographically with x fastest, then y, then z.
/// Rectangles are split along the lower-left to upper-right diagonal; cuboids
/// use the six-tetrahedron Kuhn decomposition along the main diagonal. All
/// elements are stored with positive orientation.
struct MeshGrid {
  int dim = 2;
  std::vector<double> extents;
  std::vector<Index> counts;
  std::vector<Point> nodes;
  /// dim+1 node ids per element; unused slots (2D) hold -1.
  std::vector<std::array<Index, 4>> elements;
  std::vector<Facet> facets_top;
  std::vector<Facet> facets_bottom;

  [[nodiscard]] Index num_nodes() const { return static_cast<Index>(nodes.size()); }
  [[nodiscard]] Index num_elements() const { return static_cast<Index>(elements.size()); }
  [[nodiscard]] int nodes_per_element() const { return dim + 1; }
  [[nodiscard]] int nodes_per_facet() const { return dim; }
  /// Lexicographic node id of grid point (i, j, k).
  [[nodiscard]] Index node_id(Index i, Index j, Index k = 0) const;
};

MeshGrid build_mesh(int dim, const std::vector<double>& extents, const std::vector<Index>& counts);

const std::vector<Facet>& boundary_facets(const MeshGrid& mesh, Face which);

/// Signed volume (area in 2D) of element e.
double element_volume(const MeshGrid& mesh, Index e);

/// Measure (length in 2D, area in 3D) of a boundary facet.
double facet_measure(const MeshGrid& mesh, const Facet& f);

}  // namespace tch
