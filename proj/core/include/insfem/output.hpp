#pragma once

#include <string>
#include <vector>

#include "insfem/assembly.hpp"

namespace insfem {

struct OutputOptions {
  std::string basename = "out";
  bool vtk = false;
  bool csv = false;
  int interval = 1;  // output every n-th step
};

// Legacy ASCII VTK unstructured grid with per-variable SCALARS point data
// and, when velocity components are present, a 3-component VECTORS field
// named `vel`.
void write_vtk(const DofMap& dofs, const std::vector<double>& y, const std::string& path);

// Header row of names, one row per step, time column first, shortest
// round-trip float formatting.
void write_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows,
               const std::string& path);

std::string format_shortest(double v);

}  // namespace insfem
