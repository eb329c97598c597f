#include "netpower/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "netpower/analytic.hpp"
#include "netpower/erasure.hpp"
#include "netpower/errors.hpp"
#include "netpower/numeric.hpp"
#include "netpower/spectrum.hpp"

namespace netpower {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
// handled exactly once; callers write results into index-addressed slots.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Moments {
  std::optional<double> mean;
  std::optional<double> stderr_;
};

Moments moments(const std::vector<double>& values) {
  Moments out;
  if (values.empty()) return out;
  const auto k = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= k;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  out.mean = mean;
  out.stderr_ = values.size() > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
  return out;
}

SweepRecord analytic_record(const GainProfile& profile, double noise, double gamma, double e) {
  SweepRecord rec;
  rec.gamma = gamma;
  rec.e = e;
  const ChannelParams params{profile.alpha, noise, gamma};
  try {
    rec.pave_meanfield = mean_field_power(profile, params, e);
  } catch (const MeanFieldInfeasibleError&) {
  }
  if (e >= 1.0) return rec;

  const EigenSpectrum spectrum = eigenvalues(profile, params);
  std::vector<FixedPointSolution> roots;
  try {
    roots = solve_beta(e, spectrum);
  } catch (const NoSolutionError&) {
    return rec;
  }
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
    if (it->branch == Branch::stable && !rec.beta_stable) {
      rec.beta_stable = it->beta;
      rec.pave_analytic = it->p_ave;
      if (!std::isnan(it->variance)) rec.var_analytic = it->variance;
    }
  }
  for (const auto& fp : roots) {
    if (fp.branch == Branch::unstable && !rec.beta_unstable) {
      rec.beta_unstable = fp.beta;
      rec.pave_unstable = fp.p_ave;
      if (!std::isnan(fp.variance)) rec.var_unstable = fp.variance;
    }
  }
  return rec;
}

inline std::optional<double> relative(std::optional<double> value, std::optional<double> reference) {
  if (!value || !reference || *reference == 0.0) return std::nullopt;
  return (*value - *reference) / *reference;
}

// Differences at rounding level count as zero, so exact-agreement cases
// with zero spread (e = 0) do not produce infinite z-scores.
std::optional<double> z_score(std::optional<double> value, std::optional<double> stderr_, std::optional<double> reference) {
  if (!value || !stderr_ || !reference) return std::nullopt;
  const double diff = *value - *reference;
  if (std::abs(diff) <= 1e-12 * std::max(std::abs(*reference), std::abs(*value))) return 0.0;
  if (*stderr_ == 0.0) return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  return diff / *stderr_;
}

}  // namespace

void SweepConfig::validate() const {
  spec.validate();
  ChannelParams{alpha, noise, 1.0}.validate();
  if (gamma_grid.empty()) throw std::invalid_argument("gamma grid is empty");
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    if (!(gamma_grid[i] > 0.0)) throw std::invalid_argument("gamma grid values must be positive");
    if (i > 0 && !(gamma_grid[i] > gamma_grid[i - 1])) throw std::invalid_argument("gamma grid must be strictly increasing");
  }
  if (e_grid.empty()) throw std::invalid_argument("erasure grid is empty");
  for (double e : e_grid)
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("erasure probabilities must lie in [0, 1]");
  if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
  if (eps_check && !(*eps_check > 0.0)) throw std::invalid_argument("eps_check must be positive");
}

GainProfile SweepConfig::profile() const { return gain_profile(spec, ChannelParams{alpha, noise, 1.0}); }

std::uint64_t derive_seed(std::uint64_t master_seed, std::size_t e_index, std::size_t realization) {
  if (e_index >= (1ULL << 32) || realization >= (1ULL << 32)) throw std::out_of_range("seed derivation index too large");
  const std::uint64_t packed = (static_cast<std::uint64_t>(e_index) << 32) | static_cast<std::uint64_t>(realization);
  return mix64(mix64(master_seed) ^ mix64(packed));
}

std::vector<SweepRecord> run_analytic_sweep(const SweepConfig& config) {
  config.validate();
  const GainProfile profile = config.profile();
  std::vector<SweepRecord> out;
  out.reserve(config.e_grid.size() * config.gamma_grid.size());
  for (double e : config.e_grid)
    for (double gamma : config.gamma_grid) out.push_back(analytic_record(profile, config.noise, gamma, e));
  return out;
}

std::vector<double> power_ratio_edges() {
  std::vector<double> edges;
  for (int k = -20; k < 30; ++k) edges.push_back(std::pow(10.0, (k + 0.5) / 10.0));
  return edges;
}

MonteCarloResult run_monte_carlo(const SweepConfig& config) {
  config.validate();
  const GainProfile profile = config.profile();
  const std::size_t n = profile.g.size();
  const std::size_t n_gamma = config.gamma_grid.size();
  const auto n_real = static_cast<std::size_t>(config.realizations);

  std::vector<Matrix> dense;
  if (config.eps_check) {
    for (double gamma : config.gamma_grid) dense.push_back(build_matrix(profile, {config.alpha, config.noise, gamma}));
  }

  // rows[(j * R + r) * G + g]
  std::vector<RealizationRow> rows(config.e_grid.size() * n_real * n_gamma);
  std::vector<double> eps_gap(rows.size(), kNaN);
  const std::vector<double> edges = power_ratio_edges();
  std::vector<std::vector<std::uint64_t>> counts(rows.size());

  parallel_for(config.e_grid.size() * n_real, config.threads, [&](std::size_t task) {
    const std::size_t j = task / n_real;
    const std::size_t r = task % n_real;
    const double e = config.e_grid[j];
    const std::uint64_t seed = derive_seed(config.master_seed, j, r);
    const ErasureMask mask = sample_mask(n, e, seed);
    const std::size_t active = mask.active_count();
    std::optional<ActiveNetwork> network;
    if (active > 0) network.emplace(profile, mask);

    for (std::size_t g = 0; g < n_gamma; ++g) {
      const double gamma = config.gamma_grid[g];
      RealizationRow& row = rows[task * n_gamma + g];
      row.gamma = gamma;
      row.e = e;
      row.realization = static_cast<int>(r);
      row.seed = seed;
      row.active = active;
      if (!network) {
        row.pave = row.pvar = kNaN;
        row.min_eig = std::numeric_limits<double>::infinity();
        continue;
      }
      const PowerSolution s = network->solve(config.noise, gamma);
      row.feasible = s.feasible;
      row.pave = s.p_ave;
      row.pvar = s.p_var;
      row.min_eig = s.min_active_eigenvalue;
      if (s.feasible) {
        row.sinr_deviation = max_sinr_deviation(profile, {config.alpha, config.noise, gamma}, s);
        auto& hist = counts[task * n_gamma + g];
        hist.assign(edges.size() + 1, 0);
        for (Eigen::Index k = 0; k < s.powers.size(); ++k) {
          const double ratio = s.powers(k) / s.p_ave;
          ++hist[static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), ratio) - edges.begin())];
        }
        if (config.eps_check) {
          const RegularizedPowers reg = solve_powers_regularized(dense[g], mask, *config.eps_check);
          eps_gap[task * n_gamma + g] = std::abs(reg.active->p_ave - s.p_ave) / s.p_ave;
        }
      }
    }
  });

  MonteCarloResult out;
  out.records = run_analytic_sweep(config);
  for (std::size_t j = 0; j < config.e_grid.size(); ++j) {
    for (std::size_t g = 0; g < n_gamma; ++g) {
      SweepRecord& rec = out.records[j * n_gamma + g];
      std::vector<double> paves, vars;
      std::optional<double> worst_gap;
      PowerHistogram hist{rec.gamma, rec.e, edges, std::vector<std::uint64_t>(edges.size() + 1, 0)};
      for (std::size_t r = 0; r < n_real; ++r) {
        const std::size_t at = (j * n_real + r) * n_gamma + g;
        if (!rows[at].feasible) continue;
        for (std::size_t b = 0; b < counts[at].size(); ++b) hist.counts[b] += counts[at][b];
        paves.push_back(rows[at].pave);
        vars.push_back(rows[at].pvar);
        if (!std::isnan(eps_gap[at])) worst_gap = std::max(worst_gap.value_or(0.0), eps_gap[at]);
      }
      rec.feasible_fraction = static_cast<double>(paves.size()) / static_cast<double>(n_real);
      const Moments pm = moments(paves);
      const Moments vm = moments(vars);
      rec.pave_mc_mean = pm.mean;
      rec.pave_mc_stderr = pm.stderr_;
      rec.var_mc_mean = vm.mean;
      rec.var_mc_stderr = vm.stderr_;
      rec.eps_check_rel_diff = worst_gap;
      out.histograms.push_back(std::move(hist));
    }
  }

  out.rows.reserve(rows.size());
  for (std::size_t j = 0; j < config.e_grid.size(); ++j)
    for (std::size_t g = 0; g < n_gamma; ++g)
      for (std::size_t r = 0; r < n_real; ++r) out.rows.push_back(rows[(j * n_real + r) * n_gamma + g]);
  return out;
}

SampleCriticalResult run_sample_critical(const SweepConfig& config) {
  config.validate();
  const GainProfile profile = config.profile();
  const std::size_t n = profile.g.size();
  const auto n_real = static_cast<std::size_t>(config.realizations);

  SampleCriticalResult out;
  out.samples.resize(config.e_grid.size() * n_real);
  parallel_for(out.samples.size(), config.threads, [&](std::size_t task) {
    const std::size_t j = task / n_real;
    const std::size_t r = task % n_real;
    SampleCritical& sample = out.samples[task];
    sample.e = config.e_grid[j];
    sample.realization = static_cast<int>(r);
    sample.seed = derive_seed(config.master_seed, j, r);
    const ErasureMask mask = sample_mask(n, sample.e, sample.seed);
    sample.max_feasible_gamma =
        mask.active_count() == 0 ? kNaN : max_feasible_gamma_sample(profile, config.noise, mask);
  });

  for (std::size_t j = 0; j < config.e_grid.size(); ++j) {
    SampleCriticalSummary summary;
    summary.e = config.e_grid[j];
    const GammaE ge = gamma_e(profile, {config.alpha, config.noise, 1.0}, summary.e);
    summary.critical_gamma = ge.gamma;
    summary.gamma_e_closed_form = ge.closed_form;
    std::vector<double> values;
    for (std::size_t r = 0; r < n_real; ++r) {
      const double v = out.samples[j * n_real + r].max_feasible_gamma;
      if (!std::isnan(v)) values.push_back(v);
    }
    if (values.empty()) {
      summary.sample_max = summary.sample_min = summary.sample_mean = summary.sample_cv = kNaN;
    } else {
      summary.sample_max = *std::max_element(values.begin(), values.end());
      summary.sample_min = *std::min_element(values.begin(), values.end());
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      summary.sample_mean = mean;
      summary.sample_cv = std::sqrt(ss / static_cast<double>(values.size())) / mean;
    }
    out.summary.push_back(summary);
  }
  return out;
}

ComparisonTable compare(const std::vector<SweepRecord>& analytic, const std::vector<SweepRecord>& mc) {
  if (analytic.size() != mc.size()) throw GridMismatchError("analytic and Monte Carlo grids differ in size");
  ComparisonTable table;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const SweepRecord& a = analytic[i];
    const SweepRecord& m = mc[i];
    if (a.gamma != m.gamma || a.e != m.e) throw GridMismatchError("analytic and Monte Carlo grids differ at row " + std::to_string(i));
    ComparisonRow row{a.gamma, a.e, relative(m.pave_mc_mean, a.pave_analytic),
                      z_score(m.pave_mc_mean, m.pave_mc_stderr, a.pave_analytic), relative(m.var_mc_mean, a.var_analytic),
                      z_score(m.var_mc_mean, m.var_mc_stderr, a.var_analytic)};
    if (row.pave_rel_error) table.max_abs_pave_rel_error = std::max(table.max_abs_pave_rel_error, std::abs(*row.pave_rel_error));
    table.rows.push_back(row);

    auto it = std::find_if(table.endpoints.begin(), table.endpoints.end(), [&](const auto& ep) { return ep.e == a.e; });
    if (it == table.endpoints.end()) {
      table.endpoints.push_back(EndpointDiscrepancy{a.e, std::nullopt, std::nullopt, std::nullopt});
      it = table.endpoints.end() - 1;
    }
    if (a.pave_analytic) it->analytic_endpoint = std::max(it->analytic_endpoint.value_or(a.gamma), a.gamma);
    if (m.feasible_fraction > 0.0) it->empirical_endpoint = std::max(it->empirical_endpoint.value_or(m.gamma), m.gamma);
  }
  for (auto& ep : table.endpoints) ep.rel_discrepancy = relative(ep.empirical_endpoint, ep.analytic_endpoint);
  return table;
}

}  // namespace netpower
