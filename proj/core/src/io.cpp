#include "tch/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tch {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_field_vtk(const MeshGrid& mesh, std::span<const double> field, const std::string& name,
                     const std::filesystem::path& path) {
  if (field.size() != mesh.nodes.size()) {
    throw std::invalid_argument("write_field_vtk: field length does not match the node count");
  }
  if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
    throw std::invalid_argument("write_field_vtk: field name must be a non-empty word");
  }
  auto out = open_out(path);
  const std::size_t nv = mesh.dim == 2 ? 3 : 4;
  out << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.nodes.size() << " double\n";
  for (const auto& p : mesh.nodes) out << g17(p[0]) << ' ' << g17(p[1]) << ' ' << g17(p[2]) << '\n';
  out << "CELLS " << mesh.elements.size() << ' ' << mesh.elements.size() * (nv + 1) << '\n';
  for (const auto& e : mesh.elements) {
    out << nv;
    for (std::size_t a = 0; a < nv; ++a) out << ' ' << e[a];
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.elements.size() << '\n';
  const char* type = mesh.dim == 2 ? "5\n" : "10\n";
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) out << type;
  out << "POINT_DATA " << field.size() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : field) out << g17(v) << '\n';
  finish(out, path);
}

VtkField read_field_vtk(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const auto bad = [&](const std::string& what) {
    return IoError("'" + path.string() + "': " + what);
  };
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw bad("missing VTK header");
  std::getline(in, line);  // title
  std::getline(in, line);
  if (line.rfind("ASCII", 0) != 0) throw bad("only ASCII files are supported");

  VtkField f;
  std::string tok;
  while (in >> tok) {
    if (tok == "DATASET") {
      in >> tok;
      if (tok != "UNSTRUCTURED_GRID") throw bad("expected an unstructured grid");
    } else if (tok == "POINTS") {
      std::size_t n = 0;
      in >> n >> tok;
      f.points.resize(n);
      for (auto& p : f.points) in >> p[0] >> p[1] >> p[2];
    } else if (tok == "CELLS") {
      std::size_t n = 0, total = 0;
      in >> n >> total;
      f.cells.resize(n);
      for (auto& c : f.cells) {
        std::size_t k = 0;
        in >> k;
        c.resize(k);
        for (auto& v : c) in >> v;
      }
    } else if (tok == "CELL_TYPES") {
      std::size_t n = 0;
      in >> n;
      f.cell_types.resize(n);
      for (auto& t : f.cell_types) in >> t;
    } else if (tok == "POINT_DATA") {
      std::size_t n = 0;
      in >> n >> tok;
      if (tok != "SCALARS") throw bad("expected SCALARS after POINT_DATA");
      in >> f.name >> tok;
      std::getline(in, line);  // optional component count
      in >> tok;
      if (tok != "LOOKUP_TABLE") throw bad("expected LOOKUP_TABLE");
      in >> tok;
      f.values.resize(n);
      for (auto& v : f.values) in >> v;
    } else {
      throw bad("unexpected token '" + tok + "'");
    }
    if (!in) throw bad("truncated file");
  }
  return f;
}

void write_stats(std::span<const StepRecord> records, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "step,species,iterations,residual,seconds\n";
  for (const auto& r : records) {
    for (int s = 0; s < 2; ++s) {
      const auto& rep = r.reports[static_cast<std::size_t>(s)];
      out << r.step << ',' << (s == 0 ? "p" : "nfa") << ',' << rep.iterations << ','
          << g17(rep.residual_norm) << ',' << g17(rep.wall_time) << '\n';
    }
  }
  finish(out, path);
}

void write_mask_pgm(const MeshGrid& mesh, std::span<const int> mask,
                    const std::filesystem::path& path) {
  if (mesh.dim != 2) throw std::invalid_argument("write_mask_pgm: 2D grids only");
  if (mask.size() != mesh.nodes.size()) {
    throw std::invalid_argument("write_mask_pgm: mask length does not match the node count");
  }
  const auto nx = mesh.counts[0];
  const auto ny = mesh.counts[1];
  auto out = open_out(path, true);
  out << "P5\n" << nx << ' ' << ny << "\n255\n";
  std::string row(static_cast<std::size_t>(nx), '\0');
  for (Index j = ny - 1; j >= 0; --j) {
    for (Index i = 0; i < nx; ++i) {
      row[static_cast<std::size_t>(i)] =
          static_cast<char>(mask[static_cast<std::size_t>(mesh.node_id(i, j, 0))] ? 255 : 0);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  finish(out, path);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

}  // namespace tch
