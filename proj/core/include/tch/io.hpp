#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tch/mesh.hpp"
#include "tch/simulation.hpp"

namespace tch {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Legacy ASCII VTK unstructured grid with one scalar point-data array.
/// Reals use 17 significant digits, so identical inputs give identical bytes.
void write_field_vtk(const MeshGrid& mesh, std::span<const double> field, const std::string& name,
                     const std::filesystem::path& path);

struct VtkField {
  std::vector<Point> points;
  std::vector<std::vector<Index>> cells;
  std::vector<int> cell_types;
  std::string name;
  std::vector<double> values;
};

/// Reads files written by write_field_vtk (and other legacy ASCII
/// unstructured grids with a single POINT_DATA scalar array).
VtkField read_field_vtk(const std::filesystem::path& path);

/// CSV with header step,species,iterations,residual,seconds; one row per
/// species per step. `seconds` is the wall time of that species' solve.
void write_stats(std::span<const StepRecord> records, const std::filesystem::path& path);

/// Binary 8-bit PGM (P5) of a nodal mask on a 2D structured grid, top row
/// first; mask value 1 maps to white.
void write_mask_pgm(const MeshGrid& mesh, std::span<const int> mask,
                    const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tch
