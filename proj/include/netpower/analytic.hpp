#pragma once

#include <vector>

#include "netpower/lattice.hpp"
#include "netpower/spectrum.hpp"

namespace netpower {

// Large-network asymptotics of the erased system. Every reciprocal-space
// average below is the discrete mean over the N points of the finite torus.

enum class Branch { stable, unstable };

const char* to_string(Branch branch);

/// A root beta of  e = <beta / (beta + lambda(q))>_q.
struct FixedPointSolution {
  double beta = 0.0;
  Branch branch = Branch::stable;
  double p_ave = 0.0;
  double variance = 0.0;  ///< NaN exactly on the spectrum edge
  bool converged = false;
  double residual = 0.0;
};

/// e - <beta / (beta + lambda)>. Throws DomainError if beta + lambda(q) <= 0
/// for some q.
double beta_residual(double beta, double erasure, const EigenSpectrum& spectrum);

/// <lambda / (beta + lambda)^2>: derivative of the fixed-point average with
/// respect to beta. Its sign separates the stable and unstable branches and
/// its zero marks the spectrum edge.
double resolvent_slope(double beta, const EigenSpectrum& spectrum);

/// All roots in increasing beta, each classified and carrying its mean power
/// and variance. One root when lambda0 > 0, two below the merge point when
/// lambda0 < 0. Throws NoSolutionError when there is none. e = 0 yields the
/// trivial root beta = 0 if lambda0 > 0.
std::vector<FixedPointSolution> solve_beta(double erasure, const EigenSpectrum& spectrum);

/// 1 / ((1 - e)(beta + lambda0)).
double pave_erased(const FixedPointSolution& fp, const EigenSpectrum& spectrum, double erasure);

/// Variance of the active-link powers:
///   [1/((1-e)(beta+lambda0)^2)] * ( <beta/(beta+lambda)^2> / <lambda/(beta+lambda)^2> - e/(1-e) ).
/// Negative on the unstable branch; throws EdgeError when the denominator
/// average vanishes.
double variance_erased(const FixedPointSolution& fp, const EigenSpectrum& spectrum, double erasure);

/// Point where the two roots merge.
struct CriticalPoint {
  double gamma = 0.0;
  double beta = 0.0;            ///< merged root (stationary point of the residual)
  double beta_residual = 0.0;   ///< e - <beta/(beta+lambda)> at the merged root
  double edge_residual = 0.0;   ///< |<lambda/(lambda+beta)^2>| / <1/(lambda+beta)>
};

/// Largest SINR target with a stable fixed point, bisected to ~1e-14
/// relative. Equals the erasure-free bound at e = 0 and is +infinity at e = 1.
CriticalPoint critical_point(const GainProfile& profile, double noise, double erasure);
double critical_gamma(const GainProfile& profile, double noise, double erasure);

/// Maximum supported SINR target under erasures (the critical point), with
/// the closed form gamma*/(1 + n beta_e gamma*) evaluated at the merged root
/// for comparison. gamma* is the erasure-free bound.
struct GammaE {
  double gamma = 0.0;
  double beta = 0.0;
  double closed_form = 0.0;
};
GammaE gamma_e(const GainProfile& profile, const ChannelParams& params, double erasure);

/// Stable root of the finite-regularization equation
///   e / (1 - eps/beta) = <beta / (beta + lambda)>.
double solve_beta_eps(double erasure, double eps, const EigenSpectrum& spectrum);

/// Mean-field power n gamma / (1 - gamma (1 - e) sum_{m != 0} g(m)).
double mean_field_power(const GainProfile& profile, const ChannelParams& params, double erasure);

/// 1 / ((1 - e) sum_{m != 0} g(m)), where the mean-field power diverges.
double mean_field_singular_gamma(const GainProfile& profile, double erasure);

}  // namespace netpower
