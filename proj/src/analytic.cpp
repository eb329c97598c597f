#include "netpower/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "netpower/errors.hpp"

namespace netpower {

namespace {

constexpr int kGridPoints = 2048;
constexpr double kConvergedResidual = 1e-10;
constexpr double kEdgeDenominator = 1e-14;

void require_open_unit(double erasure) {
  if (!(erasure > 0.0 && erasure < 1.0)) throw std::invalid_argument("erasure probability must lie in (0, 1)");
}

// Left end of the resolvent domain: beta + lambda(q) > 0 for every q.
double domain_left(const EigenSpectrum& spectrum, double floor = 0.0) {
  return std::max(floor, std::max(0.0, -spectrum.lambda_min)) * (1.0 + 1e-12) + 1e-300;
}

// Bisection to adjacent doubles between points of opposite residual sign.
template <class F>
double bisect(F&& fn, double a, double b) {
  double fa = fn(a);
  double fb = fn(b);
  for (int it = 0; it < 400; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = fn(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return std::abs(fa) <= std::abs(fb) ? a : b;
}

template <class F>
double golden_max(F&& fn, double a, double c) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = c - kInvPhi * (c - a);
  double x2 = a + kInvPhi * (c - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  for (int it = 0; it < 200 && c - a > 1e-16 * c; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (c - a);
      f2 = fn(x2);
    } else {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - kInvPhi * (c - a);
      f1 = fn(x1);
    }
  }
  return f1 >= f2 ? x1 : x2;
}

// Roots of `fn` on (left, hi] from a log-spaced scan of the offset beta - left,
// with bisection per sign change. If the scan shows no sign change, the
// largest sample is refined by golden section so that two nearby roots
// straddling a narrow positive peak are still found.
template <class F>
std::vector<double> scan_roots(F&& fn, double left, double hi) {
  const double span = hi - left;
  const double t_lo = span * 1e-16;
  std::vector<double> beta(kGridPoints), value(kGridPoints);
  for (int k = 0; k < kGridPoints; ++k) {
    const double frac = static_cast<double>(k) / (kGridPoints - 1);
    beta[static_cast<std::size_t>(k)] = k == kGridPoints - 1 ? hi : left + t_lo * std::pow(span / t_lo, frac);
    value[static_cast<std::size_t>(k)] = fn(beta[static_cast<std::size_t>(k)]);
  }

  std::vector<double> roots;
  for (std::size_t k = 0; k + 1 < beta.size(); ++k) {
    if (value[k] == 0.0) {
      roots.push_back(beta[k]);
    } else if (value[k + 1] != 0.0 && (value[k] > 0.0) != (value[k + 1] > 0.0)) {
      roots.push_back(bisect(fn, beta[k], beta[k + 1]));
    }
  }
  if (!roots.empty()) return roots;

  const auto peak = static_cast<std::size_t>(std::max_element(value.begin(), value.end()) - value.begin());
  const double a = beta[peak == 0 ? 0 : peak - 1];
  const double c = beta[std::min(peak + 1, beta.size() - 1)];
  if (!(c > a)) return roots;
  const double top = golden_max(fn, a, c);
  const double f_top = fn(top);
  if (f_top == 0.0) {
    roots.push_back(top);
  } else if (f_top > 0.0) {
    if (fn(a) < 0.0) roots.push_back(bisect(fn, a, top));
    if (fn(c) < 0.0) roots.push_back(bisect(fn, top, c));
  }
  return roots;
}

double mean_over(const EigenSpectrum& spectrum, auto&& term) {
  double total = 0.0;
  for (double lambda : spectrum.lambdas) total += term(lambda);
  return total / static_cast<double>(spectrum.size());
}

FixedPointSolution classify(double beta, double erasure, const EigenSpectrum& spectrum) {
  FixedPointSolution fp;
  fp.beta = beta;
  fp.residual = beta_residual(beta, erasure, spectrum);
  fp.converged = std::abs(fp.residual) <= kConvergedResidual;
  fp.branch = resolvent_slope(beta, spectrum) > 0.0 ? Branch::stable : Branch::unstable;
  fp.p_ave = pave_erased(fp, spectrum, erasure);
  try {
    fp.variance = variance_erased(fp, spectrum, erasure);
  } catch (const EdgeError&) {
    fp.variance = std::numeric_limits<double>::quiet_NaN();
  }
  return fp;
}

EigenSpectrum spectrum_at(const GainProfile& profile, double noise, double gamma) {
  return eigenvalues(profile, ChannelParams{profile.alpha, noise, gamma});
}

bool has_root(const GainProfile& profile, double noise, double erasure, double gamma) {
  try {
    solve_beta(erasure, spectrum_at(profile, noise, gamma));
    return true;
  } catch (const NoSolutionError&) {
    return false;
  }
}

}  // namespace

const char* to_string(Branch branch) { return branch == Branch::stable ? "stable" : "unstable"; }

double beta_residual(double beta, double erasure, const EigenSpectrum& spectrum) {
  if (beta == 0.0 && spectrum.lambda_min > 0.0) return erasure;
  if (!(beta + spectrum.lambda_min > 0.0)) {
    std::ostringstream msg;
    msg << "beta = " << beta << " outside the resolvent domain (lambda_min = " << spectrum.lambda_min << ")";
    throw DomainError(msg.str());
  }
  return erasure - mean_over(spectrum, [beta](double lambda) { return beta / (beta + lambda); });
}

double resolvent_slope(double beta, const EigenSpectrum& spectrum) {
  return mean_over(spectrum, [beta](double lambda) {
    const double shifted = beta + lambda;
    return lambda / (shifted * shifted);
  });
}

std::vector<FixedPointSolution> solve_beta(double erasure, const EigenSpectrum& spectrum) {
  if (erasure == 0.0) {
    if (!(spectrum.lambda_min > 0.0)) throw NoSolutionError("no fixed point without erasures once lambda_min <= 0");
    return {classify(0.0, 0.0, spectrum)};
  }
  require_open_unit(erasure);

  const auto residual = [&](double beta) { return beta_residual(beta, erasure, spectrum); };
  const double left = domain_left(spectrum);
  const double scale = std::max({spectrum.lambda_max(), std::abs(spectrum.lambda_min), 1e-300});
  double hi = std::max(erasure / (1.0 - erasure) * scale, 2.0 * left);
  for (int it = 0; it < 2000 && residual(hi) >= 0.0; ++it) hi *= 2.0;

  const auto betas = scan_roots(residual, left, hi);
  if (betas.empty()) {
    std::ostringstream msg;
    msg << "fixed-point equation has no root at e = " << erasure << " (lambda0 = " << spectrum.lambda0 << ")";
    throw NoSolutionError(msg.str());
  }
  std::vector<FixedPointSolution> out;
  for (double beta : betas) out.push_back(classify(beta, erasure, spectrum));
  return out;
}

double pave_erased(const FixedPointSolution& fp, const EigenSpectrum& spectrum, double erasure) {
  const double shifted = fp.beta + spectrum.lambda0;
  if (!(shifted > 0.0)) throw DivergenceError("beta + lambda0 <= 0: mean power diverges");
  return 1.0 / ((1.0 - erasure) * shifted);
}

double variance_erased(const FixedPointSolution& fp, const EigenSpectrum& spectrum, double erasure) {
  const double beta = fp.beta;
  const double numerator = mean_over(spectrum, [beta](double lambda) {
    const double shifted = beta + lambda;
    return beta / (shifted * shifted);
  });
  const double denominator = resolvent_slope(beta, spectrum);
  if (std::abs(denominator) < kEdgeDenominator) throw EdgeError("variance diverges on the spectrum edge");
  const double shifted0 = beta + spectrum.lambda0;
  return (numerator / denominator - erasure / (1.0 - erasure)) / ((1.0 - erasure) * shifted0 * shifted0);
}

CriticalPoint critical_point(const GainProfile& profile, double noise, double erasure) {
  const double gamma_star = max_feasible_gamma_no_erasure(profile);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (!std::isfinite(gamma_star) || erasure >= 1.0) return {kInf, 0.0, 0.0, 0.0};
  if (!(erasure >= 0.0)) throw std::invalid_argument("erasure probability must lie in [0, 1]");
  if (erasure == 0.0) return {gamma_star, 0.0, 0.0, 0.0};

  double lo = gamma_star;
  double hi = 2.0 * gamma_star;
  while (has_root(profile, noise, erasure, hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12 * gamma_star) return {kInf, 0.0, 0.0, 0.0};
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    (has_root(profile, noise, erasure, mid) ? lo : hi) = mid;
  }

  const EigenSpectrum spectrum = spectrum_at(profile, noise, lo);
  CriticalPoint cp{lo, 0.0, 0.0, 0.0};
  std::vector<FixedPointSolution> roots;
  try {
    roots = solve_beta(erasure, spectrum);
  } catch (const NoSolutionError&) {
    // Only reachable when the extension above gamma* is empty.
    return cp;
  }
  const double unstable_beta = roots.front().beta;
  const double stable_beta = roots.back().beta;
  const auto slope = [&](double beta) { return resolvent_slope(beta, spectrum); };
  if (roots.size() >= 2 && slope(unstable_beta) < 0.0 && slope(stable_beta) > 0.0) {
    cp.beta = bisect(slope, unstable_beta, stable_beta);
  } else {
    cp.beta = stable_beta;
  }
  cp.beta_residual = beta_residual(cp.beta, erasure, spectrum);
  const double inverse_mean = mean_over(spectrum, [&](double lambda) { return 1.0 / (lambda + cp.beta); });
  cp.edge_residual = std::abs(slope(cp.beta)) / inverse_mean;
  return cp;
}

double critical_gamma(const GainProfile& profile, double noise, double erasure) {
  return critical_point(profile, noise, erasure).gamma;
}

GammaE gamma_e(const GainProfile& profile, const ChannelParams& params, double erasure) {
  if (!(erasure >= 0.0 && erasure <= 1.0)) throw std::invalid_argument("erasure probability must lie in [0, 1]");
  const CriticalPoint cp = critical_point(profile, params.noise, erasure);
  const double gamma_star = max_feasible_gamma_no_erasure(profile);
  GammaE out{cp.gamma, cp.beta, 0.0};
  out.closed_form = std::isfinite(gamma_star) ? gamma_star / (1.0 + params.noise * cp.beta * gamma_star) : gamma_star;
  return out;
}

double solve_beta_eps(double erasure, double eps, const EigenSpectrum& spectrum) {
  require_open_unit(erasure);
  if (!(eps > 0.0)) throw std::invalid_argument("regularization must be positive");
  const auto residual = [&](double beta) {
    return erasure / (1.0 - eps / beta) -
           mean_over(spectrum, [beta](double lambda) { return beta / (beta + lambda); });
  };
  const double left = domain_left(spectrum, eps);
  const double scale = std::max({spectrum.lambda_max(), std::abs(spectrum.lambda_min), eps});
  double hi = std::max(erasure / (1.0 - erasure) * scale + eps / (1.0 - erasure), 2.0 * left);
  for (int it = 0; it < 2000 && residual(hi) >= 0.0; ++it) hi *= 2.0;

  const auto betas = scan_roots(residual, left, hi);
  if (betas.empty()) throw NoSolutionError("regularized fixed-point equation has no root");
  return betas.back();
}

double mean_field_power(const GainProfile& profile, const ChannelParams& params, double erasure) {
  const double denominator = 1.0 - params.gamma0 * (1.0 - erasure) * interference_sum(profile);
  if (!(denominator > 0.0)) {
    std::ostringstream msg;
    msg << "mean-field power diverges at gamma = " << params.gamma0 << ", e = " << erasure;
    throw MeanFieldInfeasibleError(msg.str());
  }
  return params.noise * params.gamma0 / denominator;
}

double mean_field_singular_gamma(const GainProfile& profile, double erasure) {
  const double effective = (1.0 - erasure) * interference_sum(profile);
  return effective > 0.0 ? 1.0 / effective : std::numeric_limits<double>::infinity();
}

}  // namespace netpower
