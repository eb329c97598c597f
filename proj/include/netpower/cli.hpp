#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "netpower/config.hpp"

namespace netpower::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSchema = 3;

inline constexpr const char* kToolVersion = "0.1.0";

// Each command writes its CSV outputs plus `<command>.manifest` into out_dir
// and returns the paths written. The manifest is itself a valid config.

std::vector<std::string> cmd_spectrum(const RunConfig& config, const std::string& out_dir);
std::vector<std::string> cmd_analytic(const RunConfig& config, const std::string& out_dir);
std::vector<std::string> cmd_simulate(const RunConfig& config, const std::string& out_dir);
std::vector<std::string> cmd_critical(const RunConfig& config, const std::string& out_dir);

/// Merges analytic / simulate CSVs into per-series data files and a gnuplot
/// script. Throws SchemaError on unrecognized or non-overlapping inputs.
std::vector<std::string> cmd_plotdata(const std::vector<std::string>& inputs, const std::string& out_dir);

/// Entry point: returns the process exit code (0, 2 or 3).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace netpower::cli
