#pragma once

#include <string>

#include "fpxl/config.hpp"

namespace fpxl {

// Executes the configured mode and writes its artifacts under
// cfg.out_dir. Throws the typed errors from errors.hpp; the CLI maps
// them onto exit codes (usage 2, hypothesis 3, numerical 4).
void run(const RunConfig& cfg);

// CLI entry point used by the binary; returns the process exit code.
int run_cli(int argc, char** argv);

// Floating-point formatting used in every CSV (17 significant digits).
std::string format_g17(double v);

}  // namespace fpxl
