#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "netpower/experiments.hpp"

namespace netpower {

/// Flat `key = value` run configuration; `#` starts a comment.
///
/// Required: dim, side, s, alpha, noise, gamma_min, gamma_max, gamma_steps,
/// e_list (comma-separated). Optional: realizations (1), master_seed (0),
/// eps_check, output_dir ("."), threads (1), gamma0 (spectrum dump target,
/// defaults to gamma_min), write_realizations (1).
///
/// Manifests use the same format and add the keys command, tool_version,
/// timestamp and output_files, which the parser accepts and ignores.
struct RunConfig {
  SweepConfig sweep;
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  int gamma_steps = 0;
  std::optional<double> gamma0;
  std::string output_dir = ".";
  bool write_realizations = true;

  /// Recomputes sweep.gamma_grid from gamma_min/max/steps.
  void rebuild_gamma_grid();
  double spectrum_gamma() const { return gamma0.value_or(gamma_min); }
};

/// Throws ConfigError with the offending line on any problem.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Serializes every effective key, then the metadata entries given.
std::string config_text(const RunConfig& config, const std::map<std::string, std::string>& metadata = {});

}  // namespace netpower
