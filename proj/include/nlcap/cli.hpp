#pragma once
//
// nlcap / cli : command-line front end with machine-readable reports.
//

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlcap {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Exit codes: 0 success, 1 solver non-convergence (report still written),
// 2 usage error, 3 internal invariant failure.
struct Invocation {
  std::string subcommand;
  std::vector<std::string> argv_echo;

  std::string group;       // "z:<d>" or "free:<k>"
  std::string graph_file;  // alternative to group + radius
  int radius = 2;
  std::vector<int> radii;
  std::string source = "e";  // ';'-separated labels; "e" is the identity
  std::string sink;          // ';'-separated labels, may be empty
  std::string phi = "l2";
  std::string combiner = "max";
  double exponent = 2.0;  // probe / scale p
  int rmax = 6;

  std::string shape = "interval";
  int dim = 2;
  int level = 2;
  std::vector<int> levels;
  double eps = 0.0;
  int parts = 0;  // certify: contiguous chunks; 0 = dyadic blocks from eps
  std::string strategy = "dyadic";
  bool equal_mass = false;
  std::string phi_kind = "lorentz";

  int max_iters = 50000;
  double tol = 1e-8;
  std::string step_rule = "polyak";
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string output = "-";
  bool timing = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses and validates argv (without the program name). Throws UsageError
/// on bad input; a --help request returns an Invocation with subcommand
/// "help" after printing the reference text.
Invocation parse_invocation(const std::vector<std::string>& args);

struct RunOutcome {
  int exit_code = 0;
  std::string rendered;  // report in the requested format
};

/// Executes a validated invocation and renders its report. The report is
/// deterministic for a fixed invocation and seed (timing is opt-in).
RunOutcome execute_and_report(const Invocation& inv);

/// Full front end: parse, execute, write the report to --output.
int run_cli(int argc, const char* const* argv);

}  // namespace nlcap
