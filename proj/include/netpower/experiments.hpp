#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "netpower/lattice.hpp"

namespace netpower {

struct SweepConfig {
  LatticeSpec spec;
  double alpha = 4.0;
  double noise = 1.0;
  std::vector<double> gamma_grid;
  std::vector<double> e_grid;
  int realizations = 1;
  std::uint64_t master_seed = 0;
  std::optional<double> eps_check;
  unsigned threads = 1;

  void validate() const;
  GainProfile profile() const;
};

/// One (gamma, e) grid point. Analytic fields come from the fixed-point
/// formulas, Monte Carlo fields are averages over feasible realizations.
struct SweepRecord {
  double gamma = 0.0;
  double e = 0.0;
  std::optional<double> beta_stable;
  std::optional<double> beta_unstable;
  std::optional<double> pave_analytic;
  std::optional<double> var_analytic;
  std::optional<double> pave_unstable;
  std::optional<double> var_unstable;
  std::optional<double> pave_mc_mean;
  std::optional<double> pave_mc_stderr;
  std::optional<double> var_mc_mean;
  std::optional<double> var_mc_stderr;
  double feasible_fraction = 0.0;
  std::optional<double> pave_meanfield;
  /// Largest relative p_ave gap between the regularized and restricted solves.
  std::optional<double> eps_check_rel_diff;
};

/// Per-realization outcome at one grid point.
struct RealizationRow {
  double gamma = 0.0;
  double e = 0.0;
  int realization = 0;
  std::uint64_t seed = 0;
  bool feasible = false;
  double pave = 0.0;
  double pvar = 0.0;
  double min_eig = 0.0;
  std::size_t active = 0;
  /// max_k |SINR_k / gamma - 1| for feasible rows, 0 otherwise.
  double sinr_deviation = 0.0;
};

/// Per-link powers relative to their realization mean, pooled over the
/// feasible realizations of one grid point. counts[0] holds ratios below
/// edges.front(), counts[i] those in [edges[i-1], edges[i]), and the last
/// entry those at or above edges.back().
struct PowerHistogram {
  double gamma = 0.0;
  double e = 0.0;
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
};

/// Log-spaced edges, ten per decade, offset half a bin so a ratio of 1 sits mid-bin.
std::vector<double> power_ratio_edges();

struct MonteCarloResult {
  std::vector<SweepRecord> records;
  std::vector<RealizationRow> rows;
  std::vector<PowerHistogram> histograms;  ///< same order as records
};

/// Injective in (e_index, realization) for a fixed master seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::size_t e_index, std::size_t realization);

/// Records ordered by e-grid index, then gamma.
std::vector<SweepRecord> run_analytic_sweep(const SweepConfig& config);

/// Analytic and Monte Carlo fields together. Realizations run on
/// `config.threads` workers; aggregation follows realization order so the
/// result does not depend on the worker count.
MonteCarloResult run_monte_carlo(const SweepConfig& config);

struct SampleCritical {
  double e = 0.0;
  int realization = 0;
  std::uint64_t seed = 0;
  double max_feasible_gamma = 0.0;
};

struct SampleCriticalSummary {
  double e = 0.0;
  double critical_gamma = 0.0;
  double gamma_e_closed_form = 0.0;
  double sample_max = 0.0;
  double sample_min = 0.0;
  double sample_mean = 0.0;
  double sample_cv = 0.0;
};

struct SampleCriticalResult {
  std::vector<SampleCritical> samples;
  std::vector<SampleCriticalSummary> summary;
};

/// Per-realization largest feasible SINR target for every e in the grid,
/// using the same masks as run_monte_carlo.
SampleCriticalResult run_sample_critical(const SweepConfig& config);

struct ComparisonRow {
  double gamma = 0.0;
  double e = 0.0;
  std::optional<double> pave_rel_error;
  std::optional<double> pave_z;
  std::optional<double> var_rel_error;
  std::optional<double> var_z;
};

struct EndpointDiscrepancy {
  double e = 0.0;
  std::optional<double> analytic_endpoint;   ///< largest gamma with a stable root
  std::optional<double> empirical_endpoint;  ///< largest gamma with a feasible sample
  std::optional<double> rel_discrepancy;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::vector<EndpointDiscrepancy> endpoints;
  double max_abs_pave_rel_error = 0.0;
};

/// Point-by-point errors of Monte Carlo means against the analytic values
/// of `analytic` (matched by position). Throws GridMismatchError.
ComparisonTable compare(const std::vector<SweepRecord>& analytic, const std::vector<SweepRecord>& mc);

}  // namespace netpower
