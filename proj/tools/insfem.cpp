#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "insfem/acceptance.hpp"
#include "insfem/cases.hpp"
#include "insfem/simulation.hpp"

namespace {

int cmd_run(const std::string& file, const std::string& output_dir) {
  std::ifstream in(file);
  if (!in) {
    std::cerr << "error: cannot open input file '" << file << "'\n";
    return 2;
  }
  std::ostringstream text;
  text << in.rdbuf();

  std::string base = file;
  if (const size_t slash = base.find_last_of('/'); slash != std::string::npos)
    base = base.substr(slash + 1);
  if (const size_t dot = base.find_last_of('.'); dot != std::string::npos) base = base.substr(0, dot);

  try {
    const insfem::RunResult res =
        insfem::run_input_text(text.str(), base, output_dir, &std::cout);
    if (!res.solved) {
      std::cerr << "solve failed: " << res.message << "\n";
      return 1;
    }
    if (res.steady_state) std::cout << "steady state reached\n";
    return 0;
  } catch (const insfem::ParseError& e) {
    std::cerr << file << ":" << e.line << ": " << e.what() << "\n";
    return 2;
  } catch (const insfem::Error& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return 2;
  }
}

int cmd_verify(const std::string& suite, bool quiet) {
  const auto results = insfem::run_acceptance({suite}, quiet ? nullptr : &std::cout);
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("[%s] %-18s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
    std::fputs(r.details.c_str(), stdout);
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_study(const std::string& case_name, int levels, const std::string& element,
              const std::string& output_dir) {
  using namespace insfem;
  std::vector<int> ns;
  for (int l = 0, n = 8; l < levels; ++l, n *= 2) ns.push_back(n);

  ConvergenceStudy study;
  if (case_name == "advection1d" || case_name == "advection2d") {
    const int dim = case_name == "advection1d" ? 1 : 2;
    ScalarElement el;
    if (element == "p1")
      el = ScalarElement::P1;
    else if (element == "p2")
      el = ScalarElement::P2;
    else if (element == "q1")
      el = ScalarElement::Q1;
    else if (element == "q2")
      el = ScalarElement::Q2;
    else {
      std::cerr << "element for scalar studies must be one of: p1 p2 q1 q2\n";
      return 2;
    }
    study = run_scalar_advection_study(dim, el, ns);
  } else {
    InsElement el;
    if (element == "q1q1")
      el = InsElement::Q1Q1;
    else if (element == "q2q1")
      el = InsElement::Q2Q1;
    else if (element == "p1p1")
      el = InsElement::P1P1;
    else if (element == "p2p1")
      el = InsElement::P2P1;
    else {
      std::cerr << "element must be one of: q1q1 q2q1 p1p1 p2p1\n";
      return 2;
    }
    if (case_name == "mms-diffusion")
      study = run_ins_mms_study(MmsRegime::Diffusion, el, ns, &std::cout);
    else if (case_name == "mms-advection")
      study = run_ins_mms_study(MmsRegime::Advection, el, ns, &std::cout);
    else if (case_name == "jeffery-hamel")
      study = run_jeffery_hamel_study(el, ns, &std::cout);
    else {
      std::cerr << "unknown study case '" << case_name
                << "'; cases: advection1d advection2d mms-diffusion mms-advection jeffery-hamel\n";
      return 2;
    }
  }

  std::cout << format_study(study);
  const std::string path = output_dir + "/study_" + case_name + "_" + element + ".csv";
  write_study_csv(study, path);
  std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilized finite element solver for the incompressible Navier-Stokes equations"};
  app.require_subcommand(1);

  std::string input_file, output_dir = ".", suite = "all";
  std::string study_case, element = "q1q1";
  int levels = 4;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "Solve an input file");
  run->add_option("file", input_file, "input file (.i)")->required();
  run->add_option("--output-dir", output_dir, "directory for VTK/CSV outputs");

  CLI::App* verify = app.add_subcommand("verify", "Run built-in verification suites");
  verify->add_option("suite", suite,
                     "suite name or 'all' (advection, ins_mms, jeffery_hamel, mass_conservation, "
                     "jacobians, solvers, temporal, parser, cavity)");
  verify->add_flag("--quiet", quiet, "suppress per-solve progress output");

  CLI::App* study = app.add_subcommand("study", "Run a convergence study and write its CSV");
  study->add_option("case", study_case,
                    "advection1d advection2d mms-diffusion mms-advection jeffery-hamel")
      ->required();
  study->add_option("--levels", levels, "number of refinement levels (from n = 8)");
  study->add_option("--element", element, "q1q1 q2q1 p1p1 p2p1 (INS) or p1 p2 q1 q2 (scalar)");
  study->add_option("--output-dir", output_dir, "directory for the study CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(input_file, output_dir);
    if (verify->parsed()) return cmd_verify(suite, quiet);
    if (study->parsed()) return cmd_study(study_case, levels, element, output_dir);
  } catch (const insfem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
