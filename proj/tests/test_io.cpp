#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tch/io.hpp"
#include "tch/simulation.hpp"

using namespace tch;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("VTK output of a two-triangle grid") {
  TempDir tmp("tch_test_io_vtk");
  const auto mesh = build_mesh(2, {1.0, 1.0}, {2, 2});
  const std::vector<double> f{0.1, 0.25, 1.0 / 3.0, -2.0};
  const auto file = tmp.path / "nested" / "phi.vtk";
  write_field_vtk(mesh, f, "phi_p", file);
  const std::string expected =
      "# vtk DataFile Version 3.0\nphi_p\nASCII\nDATASET UNSTRUCTURED_GRID\n"
      "POINTS 4 double\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n"
      "CELLS 2 8\n3 0 1 3\n3 0 3 2\n"
      "CELL_TYPES 2\n5\n5\n"
      "POINT_DATA 4\nSCALARS phi_p double 1\nLOOKUP_TABLE default\n"
      "0.10000000000000001\n0.25\n0.33333333333333331\n-2\n";
  CHECK(slurp(file) == expected);

  const auto back = read_field_vtk(file);
  CHECK(back.name == "phi_p");
  CHECK(back.values == f);
  CHECK(back.cell_types == std::vector<int>{5, 5});
  CHECK(back.cells == std::vector<std::vector<Index>>{{0, 1, 3}, {0, 3, 2}});
  CHECK(back.points.size() == 4);
}

TEST_CASE("VTK files round-trip exactly and reproduce byte for byte") {
  TempDir tmp("tch_test_io_rt");
  const auto mesh = build_mesh(2, {10.0, 2.5}, {100, 50});
  const auto state = initialize(mesh, ModelParams{}, 11);
  write_field_vtk(mesh, state.phi_p, "phi_p", tmp.path / "a.vtk");
  write_field_vtk(mesh, state.phi_p, "phi_p", tmp.path / "b.vtk");
  CHECK(slurp(tmp.path / "a.vtk") == slurp(tmp.path / "b.vtk"));
  const auto back = read_field_vtk(tmp.path / "a.vtk");
  CHECK(back.values == state.phi_p);
  CHECK(back.points == mesh.nodes);
  CHECK(back.cells.size() == static_cast<std::size_t>(mesh.num_elements()));
  for (std::size_t e = 0; e < back.cells.size(); ++e) {
    CHECK(back.cells[e] ==
          std::vector<Index>(mesh.elements[e].begin(), mesh.elements[e].begin() + 3));
  }
}

TEST_CASE("tetrahedral output") {
  TempDir tmp("tch_test_io_tet");
  const auto mesh = build_mesh(3, {1.0, 1.0, 1.0}, {2, 2, 2});
  write_field_vtk(mesh, std::vector<double>(8, 0.5), "phi_nfa", tmp.path / "t.vtk");
  const auto back = read_field_vtk(tmp.path / "t.vtk");
  CHECK(back.cells.size() == 6);
  CHECK(back.cell_types == std::vector<int>(6, 10));
  CHECK(back.cells[0].size() == 4);
}

TEST_CASE("VTK argument and format errors") {
  TempDir tmp("tch_test_io_err");
  const auto mesh = build_mesh(2, {1.0, 1.0}, {2, 2});
  CHECK_THROWS_AS(write_field_vtk(mesh, std::vector<double>(3), "x", tmp.path / "x.vtk"),
                  std::invalid_argument);
  CHECK_THROWS_AS(write_field_vtk(mesh, std::vector<double>(4), "two words", tmp.path / "x.vtk"),
                  std::invalid_argument);
  CHECK_THROWS_AS(read_field_vtk(tmp.path / "missing.vtk"), IoError);
  write_text(tmp.path / "bad.vtk", "not a vtk file\n");
  CHECK_THROWS_AS(read_field_vtk(tmp.path / "bad.vtk"), IoError);
  write_text(tmp.path / "trunc.vtk",
             "# vtk DataFile Version 3.0\nx\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 4 double\n0 0 0\n");
  CHECK_THROWS_AS(read_field_vtk(tmp.path / "trunc.vtk"), IoError);
}

TEST_CASE("solver statistics CSV") {
  TempDir tmp("tch_test_io_stats");
  write_stats({}, tmp.path / "empty.csv");
  CHECK(slurp(tmp.path / "empty.csv") == "step,species,iterations,residual,seconds\n");

  std::vector<StepRecord> recs(20);
  for (int k = 0; k < 20; ++k) {
    recs[k].step = k + 1;
    recs[k].t = (k + 1) * 1e-4;
    for (int s = 0; s < 2; ++s) {
      recs[k].reports[s].iterations = 10 + k + s;
      recs[k].reports[s].residual_norm = 1e-8 * (s + 1);
      recs[k].reports[s].wall_time = 0.125;
    }
  }
  write_stats(recs, tmp.path / "stats.csv");
  const auto ls = lines(slurp(tmp.path / "stats.csv"));
  REQUIRE(ls.size() == 41);
  CHECK(ls[0] == "step,species,iterations,residual,seconds");
  CHECK(ls[1] == "1,p,10,1e-08,0.125");
  CHECK(ls[2] == "1,nfa,11,2e-08,0.125");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    std::istringstream row(ls[i]);
    std::string step, species, its, res, secs;
    std::getline(row, step, ',');
    std::getline(row, species, ',');
    std::getline(row, its, ',');
    std::getline(row, res, ',');
    std::getline(row, secs, ',');
    CHECK(std::stoll(step) == static_cast<long long>((i + 1) / 2));
    CHECK(species == (i % 2 == 1 ? "p" : "nfa"));
    CHECK(std::stoi(its) > 0);
    CHECK(std::stod(res) > 0.0);
    CHECK(std::stod(secs) >= 0.0);
  }
}

TEST_CASE("stats from a real run follow the schema") {
  TempDir tmp("tch_test_io_run");
  const auto mesh = build_mesh(2, {10.0, 2.5}, {100, 50});
  ModelParams p;
  p.final_time = 20 * p.tau;
  const auto res = run(mesh, p, {});
  write_stats(res.records, tmp.path / "stats.csv");
  const auto ls = lines(slurp(tmp.path / "stats.csv"));
  CHECK(ls.size() == 41);
  CHECK(ls.back().rfind("20,nfa,", 0) == 0);
}

TEST_CASE("mask image") {
  TempDir tmp("tch_test_io_pgm");
  const auto mesh = build_mesh(2, {3.0, 1.0}, {3, 2});
  write_mask_pgm(mesh, std::vector<int>{1, 0, 0, 0, 1, 1}, tmp.path / "m.pgm");
  const std::string img = slurp(tmp.path / "m.pgm");
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(img.size() == header.size() + 6);
  CHECK(img.substr(0, header.size()) == header);
  const std::string px = img.substr(header.size());
  CHECK(px == std::string("\x00\xff\xff\xff\x00\x00", 6));
  CHECK_THROWS_AS(write_mask_pgm(mesh, std::vector<int>(5), tmp.path / "n.pgm"),
                  std::invalid_argument);
}
