#include "insfem/output.hpp"

#include <charconv>
#include <fstream>

#include "insfem/postprocess.hpp"

namespace insfem {

namespace {
int vtk_cell_type(ElemType t) {
  switch (t) {
    case ElemType::EDGE2:
      return 3;
    case ElemType::EDGE3:
      return 21;
    case ElemType::TRI3:
      return 5;
    case ElemType::TRI6:
      return 22;
    case ElemType::QUAD4:
      return 9;
    case ElemType::QUAD9:
      return 28;
  }
  return 0;
}
}  // namespace

std::string format_shortest(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

void write_vtk(const DofMap& dofs, const std::vector<double>& y, const std::string& path) {
  const Mesh& mesh = *dofs.mesh;
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");

  out << "# vtk DataFile Version 3.0\n";
  out << "insfem output\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const Vec2& p : mesh.nodes)
    out << format_shortest(p.x) << " " << format_shortest(p.y) << " 0\n";

  int conn_size = 0;
  for (const auto& e : mesh.elements) conn_size += static_cast<int>(e.size()) + 1;
  out << "CELLS " << mesh.n_elements() << " " << conn_size << "\n";
  for (const auto& e : mesh.elements) {
    out << e.size();
    for (int n : e) out << " " << n;
    out << "\n";
  }
  out << "CELL_TYPES " << mesh.n_elements() << "\n";
  const int ct = vtk_cell_type(mesh.elem_type);
  for (int e = 0; e < mesh.n_elements(); ++e) out << ct << "\n";

  out << "POINT_DATA " << mesh.n_nodes() << "\n";
  std::vector<std::vector<double>> nodal;
  for (size_t v = 0; v < dofs.vars.size(); ++v)
    nodal.push_back(node_values(dofs, y, static_cast<int>(v)));

  for (size_t v = 0; v < dofs.vars.size(); ++v) {
    out << "SCALARS " << dofs.vars[v].name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double val : nodal[v]) out << format_shortest(val) << "\n";
  }

  int iu1 = -1, iu2 = -1;
  for (size_t v = 0; v < dofs.vars.size(); ++v)
    if (dofs.vars[v].role == VarRole::VelocityComponent) (iu1 < 0 ? iu1 : iu2) = static_cast<int>(v);
  if (iu1 >= 0 && iu2 >= 0) {
    out << "VECTORS vel double\n";
    for (int n = 0; n < mesh.n_nodes(); ++n)
      out << format_shortest(nodal[iu1][n]) << " " << format_shortest(nodal[iu2][n]) << " 0\n";
  }
}

void write_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "time";
  for (const auto& n : names) out << "," << n;
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_shortest(row[i]);
    out << "\n";
  }
}

}  // namespace insfem
