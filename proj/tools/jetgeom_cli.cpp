#include <fstream>
#include <iostream>

#include "jetgeom/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  jetgeom::RunOutcome r = jetgeom::run_command(args);
  if (r.report.is_null()) {  // --help
    std::cout << r.summary;
    return r.exit_code;
  }
  const std::string text = jetgeom::dump_report(r.report);
  if (r.config.out.empty()) {
    std::cout << text;
    std::cerr << r.summary << "\n";
  } else {
    std::ofstream f(r.config.out, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << r.config.out << "\n";
      return jetgeom::kExitInternal;
    }
    f << text;
    std::cout << r.summary << "\n";
  }
  return r.exit_code;
}
