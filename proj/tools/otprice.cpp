// Command-line front end: parse a problem file, dispatch a subcommand, print
// the report. Exit code 0 on success, 1 on validation errors, 2 on
// mathematical failures.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "otp/cli.hpp"
#include "otp/problem.hpp"

int main(int argc, char** argv) {
  CLI::App app{"c-convex pricing toolkit: discrete optimal transport, dual "
               "price corridors and constrained Lipschitz extension"};
  app.require_subcommand(1);

  std::string path;
  double tol_override = 0.0;
  bool has_tol = false;
  std::string csv_path;
  bool witness = false;
  bool quiet = false;

  const char* names[] = {"solve",        "duals",  "check-monotone",
                         "price-bounds", "verify", "lipschitz-extend"};
  const char* briefs[] = {
      "solve the transport problem and print the optimal plan",
      "solve and print the optimal dual prices",
      "test frozen pairs (or the plan support) for cyclic monotonicity",
      "compute the lowest/highest compatible price functions",
      "solve and verify duality and support monotonicity",
      "compute constrained minimal/maximal 1-Lipschitz extensions"};

  for (std::size_t k = 0; k < 6; ++k) {
    auto* sub = app.add_subcommand(names[k], briefs[k]);
    sub->add_option("problem", path, "problem file")->required();
    sub->add_option("--tol", tol_override, "override both tolerances")
        ->each([&](const std::string&) { has_tol = true; });
    sub->add_option("--csv", csv_path, "write corridor/extension CSV here");
    sub->add_flag("--witness", witness, "print violation witnesses");
    sub->add_flag("--quiet", quiet, "suppress per-point tables");
  }

  CLI11_PARSE(app, argc, argv);

  otp::RunOptions opt;
  if (has_tol) {
    if (!(tol_override > 0.0)) {
      std::fprintf(stderr, "error: --tol must be positive\n");
      return 1;
    }
    opt.tol = otp::Tolerance::with(tol_override);
  }
  if (!csv_path.empty()) opt.csv_path = csv_path;
  opt.witness = witness;
  opt.quiet = quiet;

  try {
    otp::ProblemFile pf = otp::parse_problem(path);
    otp::RunResult result =
        otp::run_command(app.get_subcommands().front()->get_name(), pf, opt);
    std::fputs(result.report.c_str(), stdout);
    return result.exit_code;
  } catch (const otp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return otp::is_mathematical_error(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
