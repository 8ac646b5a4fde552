#include "bubblelab/field_io.hpp"

#include <fstream>
#include <sstream>

#include "bubblelab/errors.hpp"
#include "bubblelab/output.hpp"

namespace bubblelab {

void write_field(const BallField& u, const std::filesystem::path& stem, nlohmann::ordered_json meta) {
  const BallLattice& L = u.lattice();
  const int n = L.n();
  const double o = L.coord(0);
  std::string s;
  s.reserve(L.size() * 64);
  s += "# vtk DataFile Version 3.0\n";
  s += "bubblelab ball field h=" + format_double(L.h()) + "\n";
  s += "ASCII\nDATASET STRUCTURED_POINTS\n";
  s += "DIMENSIONS " + std::to_string(n) + " " + std::to_string(n) + " " + std::to_string(n) + "\n";
  s += "ORIGIN " + format_double(o) + " " + format_double(o) + " " + format_double(o) + "\n";
  s += "SPACING " + format_double(L.h()) + " " + format_double(L.h()) + " " + format_double(L.h()) + "\n";
  s += "POINT_DATA " + std::to_string(L.size()) + "\n";
  s += "VECTORS u double\n";
  for (std::size_t i = 0; i < L.size(); ++i) {
    s += format_double(u.ux[i]);
    s += ' ';
    s += format_double(u.uy[i]);
    s += ' ';
    s += format_double(u.uz[i]);
    s += '\n';
  }
  s += "SCALARS kind int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < L.size(); ++i) {
    s += static_cast<char>('0' + static_cast<int>(L.kind(i)));
    s += '\n';
  }
  std::filesystem::path vtk = stem, side = stem;
  vtk += ".vtk";
  side += ".json";
  write_file_atomic(vtk, s);
  meta["h"] = L.h();
  meta["dims"] = {n, n, n};
  meta["origin"] = {o, o, o};
  meta["data"] = vtk.filename().string();
  write_file_atomic(side, dump_json(meta) + "\n");
}

BallField read_field(const std::filesystem::path& vtk) {
  std::ifstream in(vtk);
  if (!in) throw ConfigError("cannot open field " + vtk.string());
  std::string line, word;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw ConfigError("field " + vtk.string() + ": not a legacy VTK file");
  std::getline(in, line);
  int nx = 0, ny = 0, nz = 0;
  double spacing = 0.0;
  std::size_t points = 0;
  while (in >> word) {
    if (word == "DIMENSIONS") in >> nx >> ny >> nz;
    else if (word == "SPACING") {
      double sy, sz;
      in >> spacing >> sy >> sz;
    } else if (word == "ORIGIN") {
      double a, b, c;
      in >> a >> b >> c;
    } else if (word == "POINT_DATA") in >> points;
    else if (word == "VECTORS") {
      std::getline(in, line);
      break;
    }
  }
  if (!in || nx <= 0 || nx != ny || ny != nz || !(spacing > 0.0))
    throw ConfigError("field " + vtk.string() + ": missing or inconsistent header");
  auto lat = BallLattice::build(spacing);
  if (lat->n() != nx || points != lat->size()) throw ConfigError("field " + vtk.string() + ": dimensions do not match spacing");
  BallField u(lat);
  for (std::size_t i = 0; i < lat->size(); ++i)
    if (!(in >> u.ux[i] >> u.uy[i] >> u.uz[i])) throw ConfigError("field " + vtk.string() + ": truncated vector data");
  return u;
}

}  // namespace bubblelab
