#include "netpower/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "netpower/analytic.hpp"
#include "netpower/csv.hpp"
#include "netpower/errors.hpp"
#include "netpower/experiments.hpp"
#include "netpower/spectrum.hpp"

namespace netpower::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kAnalyticColumns{"gamma",         "e",           "beta_stable",
                                                "beta_unstable", "pave_analytic", "pave_unstable",
                                                "var_analytic",  "pave_meanfield", "critical_gamma"};

const std::vector<std::string> kAggregateColumns{
    "gamma",         "e",           "beta_stable",    "beta_unstable",  "pave_analytic",
    "var_analytic",  "pave_unstable", "var_unstable", "pave_mc_mean",   "pave_mc_stderr",
    "var_mc_mean",   "var_mc_stderr", "feasible_fraction", "pave_meanfield", "eps_check_rel_diff"};

const std::vector<std::string> kRealizationColumns{"gamma", "e", "realization", "seed", "feasible", "pave", "pvar", "min_eig"};

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path prepare_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw ConfigError("cannot create output directory '" + out_dir + "'");
  return fs::path(out_dir);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

std::string write_manifest(const RunConfig& config, const std::string& command, const fs::path& dir,
                           const std::vector<std::string>& outputs) {
  RunConfig echo = config;
  echo.output_dir = dir.string();
  std::string joined;
  for (std::size_t i = 0; i < outputs.size(); ++i) joined += (i ? "," : "") + fs::path(outputs[i]).filename().string();
  const fs::path path = dir / (command + ".manifest");
  auto out = open_output(path);
  out << config_text(echo, {{"command", command},
                            {"tool_version", kToolVersion},
                            {"timestamp", timestamp_utc()},
                            {"output_files", joined}});
  return path.string();
}

std::string format_components(const std::vector<double>& q) {
  std::string out;
  for (std::size_t i = 0; i < q.size(); ++i) out += (i ? ";" : "") + csv::format(q[i]);
  return out;
}

}  // namespace

std::vector<std::string> cmd_spectrum(const RunConfig& config, const std::string& out_dir) {
  const fs::path dir = prepare_dir(out_dir);
  const GainProfile profile = config.sweep.profile();
  const EigenSpectrum spectrum =
      eigenvalues(profile, ChannelParams{config.sweep.alpha, config.sweep.noise, config.spectrum_gamma()});

  const fs::path path = dir / "spectrum.csv";
  auto out = open_output(path);
  csv::Writer writer(out, {"k_index", "q_components", "lambda"});
  for (std::size_t k = 0; k < spectrum.size(); ++k)
    writer.row({std::to_string(k), format_components(wave_vector(config.sweep.spec, k)), csv::format(spectrum.lambdas[k])});
  out.close();
  std::vector<std::string> paths{path.string()};
  paths.push_back(write_manifest(config, "spectrum", dir, paths));
  return paths;
}

std::vector<std::string> cmd_analytic(const RunConfig& config, const std::string& out_dir) {
  const fs::path dir = prepare_dir(out_dir);
  const GainProfile profile = config.sweep.profile();
  const auto records = run_analytic_sweep(config.sweep);

  std::map<double, double> critical;
  for (double e : config.sweep.e_grid) critical[e] = critical_gamma(profile, config.sweep.noise, e);

  const fs::path path = dir / "analytic.csv";
  auto out = open_output(path);
  csv::Writer writer(out, kAnalyticColumns);
  for (const auto& r : records) {
    writer.row({csv::format(r.gamma), csv::format(r.e), csv::format(r.beta_stable), csv::format(r.beta_unstable),
                csv::format(r.pave_analytic), csv::format(r.pave_unstable), csv::format(r.var_analytic),
                csv::format(r.pave_meanfield), csv::format(critical.at(r.e))});
  }
  out.close();
  std::vector<std::string> paths{path.string()};
  paths.push_back(write_manifest(config, "analytic", dir, paths));
  return paths;
}

std::vector<std::string> cmd_simulate(const RunConfig& config, const std::string& out_dir) {
  const fs::path dir = prepare_dir(out_dir);
  const MonteCarloResult result = run_monte_carlo(config.sweep);

  std::vector<std::string> paths;
  {
    const fs::path path = dir / "simulate.csv";
    auto out = open_output(path);
    csv::Writer writer(out, kAggregateColumns);
    for (const auto& r : result.records) {
      writer.row({csv::format(r.gamma), csv::format(r.e), csv::format(r.beta_stable), csv::format(r.beta_unstable),
                  csv::format(r.pave_analytic), csv::format(r.var_analytic), csv::format(r.pave_unstable),
                  csv::format(r.var_unstable), csv::format(r.pave_mc_mean), csv::format(r.pave_mc_stderr),
                  csv::format(r.var_mc_mean), csv::format(r.var_mc_stderr), csv::format(r.feasible_fraction),
                  csv::format(r.pave_meanfield), csv::format(r.eps_check_rel_diff)});
    }
    paths.push_back(path.string());
  }
  if (config.write_realizations) {
    const fs::path path = dir / "simulate_realizations.csv";
    auto out = open_output(path);
    csv::Writer writer(out, kRealizationColumns);
    for (const auto& r : result.rows) {
      writer.row({csv::format(r.gamma), csv::format(r.e), std::to_string(r.realization), csv::format(r.seed),
                  r.feasible ? "1" : "0", csv::format(r.pave), csv::format(r.pvar), csv::format(r.min_eig)});
    }
    paths.push_back(path.string());

    const fs::path hist_path = dir / "simulate_power_histogram.csv";
    auto hist_out = open_output(hist_path);
    csv::Writer hist_writer(hist_out, {"gamma", "e", "ratio_lo", "ratio_hi", "count"});
    for (const auto& h : result.histograms) {
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double lo = b == 0 ? 0.0 : h.edges[b - 1];
        const double hi = b < h.edges.size() ? h.edges[b] : std::numeric_limits<double>::infinity();
        hist_writer.row({csv::format(h.gamma), csv::format(h.e), csv::format(lo), csv::format(hi), csv::format(h.counts[b])});
      }
    }
    paths.push_back(hist_path.string());
  }
  paths.push_back(write_manifest(config, "simulate", dir, paths));
  return paths;
}

std::vector<std::string> cmd_critical(const RunConfig& config, const std::string& out_dir) {
  const fs::path dir = prepare_dir(out_dir);
  const SampleCriticalResult result = run_sample_critical(config.sweep);

  std::vector<std::string> paths;
  {
    const fs::path path = dir / "critical_samples.csv";
    auto out = open_output(path);
    csv::Writer writer(out, {"e", "realization", "seed", "max_feasible_gamma"});
    for (const auto& s : result.samples)
      writer.row({csv::format(s.e), std::to_string(s.realization), csv::format(s.seed), csv::format(s.max_feasible_gamma)});
    paths.push_back(path.string());
  }
  {
    const fs::path path = dir / "critical_summary.csv";
    auto out = open_output(path);
    csv::Writer writer(out, {"e", "critical_gamma", "gamma_e_closed_form", "sample_max", "sample_min", "sample_mean",
                             "sample_cv"});
    for (const auto& s : result.summary)
      writer.row({csv::format(s.e), csv::format(s.critical_gamma), csv::format(s.gamma_e_closed_form),
                  csv::format(s.sample_max), csv::format(s.sample_min), csv::format(s.sample_mean),
                  csv::format(s.sample_cv)});
    paths.push_back(path.string());
  }
  paths.push_back(write_manifest(config, "critical", dir, paths));
  return paths;
}

namespace {

struct SeriesPoint {
  double gamma;
  double value;
  std::optional<double> err;
};

using SeriesKey = std::pair<std::string, double>;  // (series, e)

enum class InputKind { analytic, aggregate, realizations };

InputKind classify(const csv::Table& table, const std::string& path) {
  if (table.has_columns({"pave_mc_mean", "pave_mc_stderr", "var_mc_mean", "feasible_fraction"}) &&
      table.has_columns({"gamma", "e", "pave_analytic", "pave_unstable", "var_analytic", "pave_meanfield"}))
    return InputKind::aggregate;
  if (table.has_columns(kAnalyticColumns)) return InputKind::analytic;
  if (table.has_columns(kRealizationColumns)) return InputKind::realizations;
  throw SchemaError("'" + path + "' does not match the analytic, simulate or realization schema");
}

std::set<std::pair<double, double>> grid_points(const csv::Table& table) {
  std::set<std::pair<double, double>> points;
  const auto g = table.column("gamma");
  const auto e = table.column("e");
  for (const auto& row : table.rows) points.emplace(*csv::parse_optional(row[g]), *csv::parse_optional(row[e]));
  return points;
}

void add_column_series(std::map<SeriesKey, std::vector<SeriesPoint>>& series, const csv::Table& table,
                       const std::string& name, const std::string& column, const std::string& err_column = {}) {
  const auto g = table.column("gamma");
  const auto e = table.column("e");
  const auto v = table.column(column);
  const std::optional<std::size_t> err = err_column.empty() ? std::nullopt : std::optional(table.column(err_column));
  for (const auto& row : table.rows) {
    const auto value = csv::parse_optional(row[v]);
    if (!value) continue;
    const double ev = *csv::parse_optional(row[e]);
    auto& points = series[{name, ev}];
    points.push_back({*csv::parse_optional(row[g]), *value, err ? csv::parse_optional(row[*err]) : std::nullopt});
  }
}

// Power curve of the realization that stays feasible over the most grid
// points at each e (earliest realization on ties).
void add_sample_max_series(std::map<SeriesKey, std::vector<SeriesPoint>>& series, const csv::Table& table) {
  const auto g = table.column("gamma");
  const auto e = table.column("e");
  const auto r = table.column("realization");
  const auto f = table.column("feasible");
  const auto p = table.column("pave");
  std::map<double, std::map<long, int>> feasible_counts;
  for (const auto& row : table.rows)
    if (row[f] == "1") ++feasible_counts[*csv::parse_optional(row[e])][std::stol(row[r])];
  for (const auto& [ev, counts] : feasible_counts) {
    long best = -1;
    int best_count = -1;
    for (const auto& [real, count] : counts) {
      if (count > best_count) {
        best = real;
        best_count = count;
      }
    }
    auto& points = series[{"sample_max", ev}];
    for (const auto& row : table.rows) {
      if (*csv::parse_optional(row[e]) != ev || std::stol(row[r]) != best || row[f] != "1") continue;
      points.push_back({*csv::parse_optional(row[g]), *csv::parse_optional(row[p]), std::nullopt});
    }
  }
}

std::string slug(double e) {
  std::string s = csv::format(e);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

}  // namespace

std::vector<std::string> cmd_plotdata(const std::vector<std::string>& inputs, const std::string& out_dir) {
  if (inputs.empty()) throw ConfigError("plotdata needs at least one input CSV");
  std::vector<std::pair<InputKind, csv::Table>> tables;
  for (const auto& path : inputs) {
    csv::Table table = csv::read_file(path);
    tables.emplace_back(classify(table, path), std::move(table));
  }
  for (std::size_t a = 0; a < tables.size(); ++a) {
    const auto pa = grid_points(tables[a].second);
    for (std::size_t b = a + 1; b < tables.size(); ++b) {
      const auto pb = grid_points(tables[b].second);
      bool overlap = false;
      for (const auto& pt : pa) overlap = overlap || pb.count(pt);
      if (!overlap) throw SchemaError("inputs '" + inputs[a] + "' and '" + inputs[b] + "' share no (gamma, e) points");
    }
  }

  std::map<SeriesKey, std::vector<SeriesPoint>> series;
  bool have_analytic = false;
  for (const auto& [kind, table] : tables) have_analytic = have_analytic || kind == InputKind::analytic;
  for (const auto& [kind, table] : tables) {
    if (kind == InputKind::analytic || (kind == InputKind::aggregate && !have_analytic)) {
      add_column_series(series, table, "stable", "pave_analytic");
      add_column_series(series, table, "unstable", "pave_unstable");
      add_column_series(series, table, "variance", "var_analytic");
      add_column_series(series, table, "meanfield", "pave_meanfield");
    }
    if (kind == InputKind::aggregate) {
      add_column_series(series, table, "mc_mean", "pave_mc_mean", "pave_mc_stderr");
      add_column_series(series, table, "mc_variance", "var_mc_mean", "var_mc_stderr");
    }
    if (kind == InputKind::realizations) add_sample_max_series(series, table);
  }

  const fs::path dir = prepare_dir(out_dir);
  std::vector<std::string> paths;
  {
    const fs::path path = dir / "plot_series.csv";
    auto out = open_output(path);
    csv::Writer writer(out, {"series", "e", "gamma", "value", "err"});
    for (const auto& [key, points] : series)
      for (const auto& pt : points) writer.row({key.first, csv::format(key.second), csv::format(pt.gamma), csv::format(pt.value), csv::format(pt.err)});
    paths.push_back(path.string());
  }

  std::set<double> erasures;
  for (const auto& [key, points] : series) {
    erasures.insert(key.second);
    const fs::path path = dir / ("series_" + key.first + "_e" + slug(key.second) + ".dat");
    auto out = open_output(path);
    out << "# gamma value err\n";
    for (const auto& pt : points)
      out << csv::format(pt.gamma) << ' ' << csv::format(pt.value) << ' ' << csv::format(pt.err.value_or(0.0)) << '\n';
    paths.push_back(path.string());
  }

  const fs::path script = dir / "plot.gp";
  auto gp = open_output(script);
  gp << "# gnuplot script: one panel per erasure probability\n"
     << "set terminal pngcairo size 900,650\n"
     << "set logscale y\n"
     << "set xlabel 'SINR target'\n"
     << "set ylabel 'average power'\n";
  const std::map<std::string, std::string> styles{{"stable", "with lines lw 2 lc rgb 'blue'"},
                                                  {"unstable", "with lines lw 2 dt 2 lc rgb 'dark-green'"},
                                                  {"variance", "with lines lw 1 lc rgb 'red'"},
                                                  {"meanfield", "with lines lw 1 dt 3 lc rgb 'black'"},
                                                  {"mc_mean", "with yerrorbars pt 7 ps 0.6 lc rgb 'orange'"},
                                                  {"mc_variance", "with yerrorbars pt 5 ps 0.5 lc rgb 'purple'"},
                                                  {"sample_max", "with lines dt 4 lc rgb 'gray40'"}};
  for (double e : erasures) {
    gp << "set output 'power_e" << slug(e) << ".png'\n"
       << "set title 'e = " << csv::format(e) << "'\n"
       << "plot ";
    bool first = true;
    for (const auto& [key, points] : series) {
      if (key.second != e) continue;
      gp << (first ? "" : ", \\\n     ") << "'series_" << key.first << "_e" << slug(e) << ".dat' using 1:2"
         << (key.first.rfind("mc_", 0) == 0 ? ":3" : "") << ' ' << styles.at(key.first) << " title '" << key.first << "'";
      first = false;
    }
    gp << '\n';
  }
  paths.push_back(script.string());
  return paths;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum-power SINR solutions on lattice networks with random erasures", "netpower"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_path;
  std::string out_override;
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::optional<unsigned> threads;
  bool quiet = false;
  std::vector<std::string> plot_inputs;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_override, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "master seed (overrides master_seed)");
    sub->add_option("--realizations", realizations, "realization count (overrides realizations)");
    sub->add_option("--threads", threads, "worker threads (overrides threads)");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };
  auto* spectrum = app.add_subcommand("spectrum", "dump lambda(q) for the configured lattice");
  auto* analytic = app.add_subcommand("analytic", "fixed-point mean power and variance over the grid");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo realizations against the analytic values");
  auto* critical = app.add_subcommand("critical", "per-realization largest feasible SINR target");
  for (auto* sub : {spectrum, analytic, simulate, critical}) add_common(sub);
  auto* plotdata = app.add_subcommand("plotdata", "merge CSV outputs into plotting series");
  plotdata->add_option("inputs", plot_inputs, "analytic / simulate CSV files")->required();
  plotdata->add_option("--out", out_override, "output directory")->required();
  plotdata->add_flag("--quiet", quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    std::vector<std::string> written;
    if (plotdata->parsed()) {
      written = cmd_plotdata(plot_inputs, out_override);
    } else {
      RunConfig config = load_config(config_path);
      if (seed) config.sweep.master_seed = *seed;
      if (realizations) {
        if (*realizations < 1) throw ConfigError("--realizations must be positive");
        config.sweep.realizations = *realizations;
      }
      if (threads) {
        if (*threads < 1) throw ConfigError("--threads must be positive");
        config.sweep.threads = *threads;
      }
      if (!out_override.empty()) config.output_dir = out_override;
      if (spectrum->parsed()) written = cmd_spectrum(config, config.output_dir);
      if (analytic->parsed()) written = cmd_analytic(config, config.output_dir);
      if (simulate->parsed()) written = cmd_simulate(config, config.output_dir);
      if (critical->parsed()) written = cmd_critical(config, config.output_dir);
    }
    if (!quiet)
      for (const auto& path : written) out << "wrote " << path << '\n';
    return kExitOk;
  } catch (const SchemaError& e) {
    err << "netpower: input schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const ConfigError& e) {
    err << "netpower: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "netpower: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace netpower::cli
