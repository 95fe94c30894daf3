#pragma once

#include <string>
#include <vector>

#include "jetgeom/report.hpp"

namespace jetgeom {

struct RunConfig {
  std::string command;  // check-regular, equation-type, invariants, trivial-test, canonical-frame, cartan,
                        // lemma2-check, schwarzian-check
  std::string input;
  std::vector<std::string> points;  // "t=0,x[0,1]=1"; unassigned coordinates are 0
  int order = 4;
  std::string mode;  // empty: as in the problem file
  std::string transversal;
  int fiber_cap = -1;
  std::string scale = "1 + t^2";  // f for lemma2-check and schwarzian-check
  std::string out;
  bool timing = false;
};

struct RunOutcome {
  RunConfig config;
  Json report;
  int exit_code = 0;
  std::string summary;  // one-line human verdict
};

enum ExitCode { kExitOk = 0, kExitInternal = 1, kExitParse = 2, kExitRegularity = 3, kExitOrder = 4, kExitGating = 5 };

const std::vector<std::string>& command_names();

/// Parses flags (argv without the program name) and runs. Never throws; errors
/// become exit codes and an "error" entry in the report.
RunOutcome run_command(const std::vector<std::string>& args);

RunOutcome run_config(const RunConfig& config);

/// Deterministic serialization (two-space indent, trailing newline).
std::string dump_report(const Json& report);

}  // namespace jetgeom
