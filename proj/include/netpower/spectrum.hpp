#pragma once

#include <cstddef>
#include <vector>

#include "netpower/lattice.hpp"

namespace netpower {

/// Eigenvalues of the circulant SINR matrix M, indexed row-major by the
/// reciprocal vector index k (q = 2*pi*k/L per dimension). Unsorted, so
/// lambdas[0] is the q = 0 eigenvalue.
struct EigenSpectrum {
  LatticeSpec spec;
  std::vector<double> lambdas;
  double lambda0 = 0.0;
  double lambda_min = 0.0;

  std::size_t size() const { return lambdas.size(); }
  double lambda_max() const;

  /// Builds a spectrum from raw values, deriving lambda0 and lambda_min.
  static EigenSpectrum from_values(LatticeSpec spec, std::vector<double> lambdas);
};

/// lambda(q) = (1/gamma0 - sum_{m != 0} g(m) cos(q.m)) / noise via a
/// discrete Fourier transform of the first row of M.
EigenSpectrum eigenvalues(const GainProfile& profile, const ChannelParams& params);

/// Uniform per-link power 1/lambda0 of the erasure-free network.
double pave_no_erasure(const EigenSpectrum& spectrum, const ChannelParams& params);

/// Largest gamma0 with lambda0 > 0; +infinity when there is no interference.
double max_feasible_gamma_no_erasure(const GainProfile& profile);

/// Wave-vector components 2*pi*k_i/L of the flat reciprocal index.
std::vector<double> wave_vector(const LatticeSpec& spec, std::size_t k);

}  // namespace netpower
