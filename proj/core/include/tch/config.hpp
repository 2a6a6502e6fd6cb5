#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tch/physics.hpp"
#include "tch/simulation.hpp"

namespace tch {

struct MeshSpec {
  int dim = 2;
  std::array<double, 3> extents{10.0, 2.5, 10.0};
  std::array<int, 3> counts{100, 50, 1};

  bool operator==(const MeshSpec&) const = default;
};

struct OutputSpec {
  std::string dir = "out";
  std::vector<double> snapshot_times;
  bool write_vtk = true;
  bool write_stats = true;

  bool operator==(const OutputSpec&) const = default;
};

enum class ThresholdRule { compare, absolute };
std::string to_string(ThresholdRule r);

struct BenchSpec {
  std::string mode = "run";
  int steps = 20;
  /// Extra steps a parameter-sweep entry is advanced to detect blow-up.
  int stability_steps = 200;
  /// Steps taken before measuring in the warm protocol.
  int warm_steps = 1000;
  std::vector<std::array<int, 3>> meshes;
  std::vector<double> eps_list;
  std::vector<double> tau_list;
  std::vector<double> eoc_taus;
  double eoc_tau_ref = 1e-5;
  double eoc_final_time = 0.0128;
  /// Largest dense system eig-check will factor.
  int eig_cap = 2000;
  ThresholdRule threshold_rule = ThresholdRule::compare;
  double threshold = 0.5;

  bool operator==(const BenchSpec&) const = default;
};

struct RunConfig {
  MeshSpec mesh;
  ModelParams model;
  SolverOptions solver;
  OutputSpec output;
  BenchSpec bench;

  bool operator==(const RunConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line;    // 1-based, 0 when not tied to a line
  std::size_t column;  // 1-based
};

/// Parses an INI-style document:
///
///   # comment
///   [mesh]
///   dim = 2
///   counts = 100, 50
///
/// Sections are mesh, model, solver, output and bench. Lists are comma
/// separated; a mesh list entry looks like 100x50 or 30x15x30. Omitted keys
/// keep their defaults. Unknown sections or keys, malformed values and
/// violated constraints raise ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Writes every key with full precision; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

/// Default settings for the reproduction studies (meshes, parameter lists,
/// step-size ladder).
RunConfig default_bench_config();

}  // namespace tch
