#include "netpower/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "netpower/csv.hpp"
#include "netpower/errors.hpp"

namespace netpower {

namespace {

const std::set<std::string> kMetadataKeys{"command", "tool_version", "timestamp", "output_files"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
}

long long to_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value[0] != '-') {
      const unsigned long long v = std::stoull(value, &used);
      if (used == value.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected an unsigned 64-bit integer, got '" + value + "'");
}

}  // namespace

void RunConfig::rebuild_gamma_grid() {
  sweep.gamma_grid.clear();
  if (gamma_steps == 1) {
    sweep.gamma_grid.push_back(gamma_min);
    return;
  }
  for (int k = 0; k < gamma_steps; ++k)
    sweep.gamma_grid.push_back(gamma_min + (gamma_max - gamma_min) * static_cast<double>(k) / (gamma_steps - 1));
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    if (values.count(key)) throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    values[key] = value;
  }

  static const std::set<std::string> known{"dim",         "side",         "s",           "alpha",      "noise",
                                           "gamma_min",   "gamma_max",    "gamma_steps", "e_list",     "realizations",
                                           "master_seed", "eps_check",    "output_dir",  "threads",    "gamma0",
                                           "write_realizations"};
  for (const auto& [key, value] : values)
    if (!known.count(key) && !kMetadataKeys.count(key)) throw ConfigError(source + ": unknown key '" + key + "'");

  const auto require = [&](const std::string& key) -> const std::string& {
    const auto it = values.find(key);
    if (it == values.end() || it->second.empty()) throw ConfigError(source + ": missing required key '" + key + "'");
    return it->second;
  };
  const auto optional = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = values.find(key);
    if (it == values.end() || it->second.empty()) return std::nullopt;
    return it->second;
  };

  RunConfig cfg;
  cfg.sweep.spec.dim = static_cast<int>(to_integer("dim", require("dim")));
  cfg.sweep.spec.side = static_cast<int>(to_integer("side", require("side")));
  cfg.sweep.spec.s = to_double("s", require("s"));
  cfg.sweep.alpha = to_double("alpha", require("alpha"));
  cfg.sweep.noise = to_double("noise", require("noise"));
  cfg.gamma_min = to_double("gamma_min", require("gamma_min"));
  cfg.gamma_max = to_double("gamma_max", require("gamma_max"));
  const long long steps = to_integer("gamma_steps", require("gamma_steps"));
  if (steps < 1 || steps > 1000000) throw ConfigError(source + ": gamma_steps must be in [1, 1e6]");
  cfg.gamma_steps = static_cast<int>(steps);

  std::istringstream elist(require("e_list"));
  std::string item;
  while (std::getline(elist, item, ',')) cfg.sweep.e_grid.push_back(to_double("e_list", trim(item)));

  if (auto v = optional("realizations")) {
    const long long r = to_integer("realizations", *v);
    if (r < 1 || r > 100000000) throw ConfigError(source + ": realizations must be positive");
    cfg.sweep.realizations = static_cast<int>(r);
  }
  if (auto v = optional("master_seed")) cfg.sweep.master_seed = to_u64("master_seed", *v);
  if (auto v = optional("eps_check")) cfg.sweep.eps_check = to_double("eps_check", *v);
  if (auto v = optional("output_dir")) cfg.output_dir = *v;
  if (auto v = optional("threads")) {
    const long long t = to_integer("threads", *v);
    if (t < 1 || t > 1024) throw ConfigError(source + ": threads must be in [1, 1024]");
    cfg.sweep.threads = static_cast<unsigned>(t);
  }
  if (auto v = optional("gamma0")) cfg.gamma0 = to_double("gamma0", *v);
  if (auto v = optional("write_realizations")) cfg.write_realizations = to_integer("write_realizations", *v) != 0;

  cfg.rebuild_gamma_grid();
  try {
    cfg.sweep.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(source + ": " + ex.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

std::string config_text(const RunConfig& config, const std::map<std::string, std::string>& metadata) {
  std::ostringstream out;
  const auto& sw = config.sweep;
  out << "dim = " << sw.spec.dim << '\n';
  out << "side = " << sw.spec.side << '\n';
  out << "s = " << csv::format(sw.spec.s) << '\n';
  out << "alpha = " << csv::format(sw.alpha) << '\n';
  out << "noise = " << csv::format(sw.noise) << '\n';
  out << "gamma_min = " << csv::format(config.gamma_min) << '\n';
  out << "gamma_max = " << csv::format(config.gamma_max) << '\n';
  out << "gamma_steps = " << config.gamma_steps << '\n';
  out << "e_list = ";
  for (std::size_t i = 0; i < sw.e_grid.size(); ++i) out << (i ? "," : "") << csv::format(sw.e_grid[i]);
  out << '\n';
  out << "realizations = " << sw.realizations << '\n';
  out << "master_seed = " << sw.master_seed << '\n';
  if (sw.eps_check) out << "eps_check = " << csv::format(*sw.eps_check) << '\n';
  out << "output_dir = " << config.output_dir << '\n';
  out << "threads = " << sw.threads << '\n';
  if (config.gamma0) out << "gamma0 = " << csv::format(*config.gamma0) << '\n';
  out << "write_realizations = " << (config.write_realizations ? 1 : 0) << '\n';
  for (const auto& [key, value] : metadata) out << key << " = " << value << '\n';
  return out.str();
}

}  // namespace netpower
