#pragma once

#include <map>
#include <memory>
#include <ostream>

#include "insfem/expression.hpp"
#include "insfem/hit.hpp"
#include "insfem/output.hpp"
#include "insfem/postprocess.hpp"
#include "insfem/timeloop.hpp"

namespace insfem {

// Everything an input file describes, resolved and validated.
struct SimulationSpec {
  Mesh mesh;
  bool has_mesh = false;
  std::vector<Variable> variables;
  WeakFormConfig config;
  KernelSet kernels;
  ConstraintSet constraints;
  ExecutionerOptions executioner;
  std::vector<Postprocessor> postprocessors;
  OutputOptions output;
  std::map<std::string, Expression> functions;
  std::map<std::string, double> initial_values;           // variable -> constant
  std::map<std::string, std::string> initial_functions;   // variable -> function name
  std::vector<std::string> warnings;                      // e.g. unmapped petsc options
};

// GlobalParams-aware object construction: kernel/bc `type` strings map onto
// the built-in classes; unknown types list the valid ones.
SimulationSpec build_simulation(const ParamTree& tree);

struct RunResult {
  bool solved = false;
  bool steady_state = false;
  std::string message;
  SystemState state;
  std::vector<std::string> pp_names;
  std::vector<std::vector<double>> pp_rows;  // time + values per output step
};

RunResult run_simulation(SimulationSpec& spec, const std::string& output_dir = ".",
                         std::ostream* log = nullptr);

// Convenience: substitute_dbe + parse_hit + build + run for a file's text.
RunResult run_input_text(const std::string& text, const std::string& basename,
                         const std::string& output_dir = ".", std::ostream* log = nullptr);

}  // namespace insfem
