#include "netpower/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "netpower/errors.hpp"

namespace netpower {

namespace {

using Complex = std::complex<double>;

// In-place forward DFT over a row-major [side]^dim array.
void forward_dft(std::vector<Complex>& data, const LatticeSpec& spec) {
  Eigen::FFT<double> fft;
  const auto side = static_cast<std::size_t>(spec.side);
  std::vector<Complex> in(side), out(side);
  if (spec.dim == 1) {
    fft.fwd(out, data);
    data = out;
    return;
  }
  for (std::size_t row = 0; row < side; ++row) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(row * side), side, in.begin());
    fft.fwd(out, in);
    std::copy(out.begin(), out.end(), data.begin() + static_cast<std::ptrdiff_t>(row * side));
  }
  for (std::size_t col = 0; col < side; ++col) {
    for (std::size_t row = 0; row < side; ++row) in[row] = data[row * side + col];
    fft.fwd(out, in);
    for (std::size_t row = 0; row < side; ++row) data[row * side + col] = out[row];
  }
}

}  // namespace

double EigenSpectrum::lambda_max() const { return *std::max_element(lambdas.begin(), lambdas.end()); }

EigenSpectrum EigenSpectrum::from_values(LatticeSpec spec, std::vector<double> lambdas) {
  EigenSpectrum out{spec, std::move(lambdas), 0.0, 0.0};
  out.lambda0 = out.lambdas.at(0);
  out.lambda_min = *std::min_element(out.lambdas.begin(), out.lambdas.end());
  return out;
}

EigenSpectrum eigenvalues(const GainProfile& profile, const ChannelParams& params) {
  params.validate();
  const std::size_t n = profile.g.size();
  if (n != profile.spec.sites()) throw std::invalid_argument("gain profile length does not match lattice");

  // First row of M: diagonal 1/(n gamma0), off-diagonal -g/n.
  std::vector<Complex> row(n);
  row[0] = Complex(profile.g[0] / (params.noise * params.gamma0), 0.0);
  for (std::size_t m = 1; m < n; ++m) row[m] = Complex(-profile.g[m] / params.noise, 0.0);
  forward_dft(row, profile.spec);

  std::vector<double> lambdas(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double re = row[k].real();
    const double im = row[k].imag();
    if (std::abs(im) >= 1e-9 * (1.0 + std::abs(re))) {
      std::ostringstream msg;
      msg << "eigenvalue " << k << " has imaginary part " << im << "; gain profile is not symmetric";
      throw AsymmetryError(msg.str());
    }
    lambdas[k] = re;
  }
  return EigenSpectrum::from_values(profile.spec, std::move(lambdas));
}

double pave_no_erasure(const EigenSpectrum& spectrum, const ChannelParams& params) {
  // lambda0 within rounding of zero counts as the feasibility boundary.
  const double scale = 1.0 / (params.noise * params.gamma0);
  if (!(spectrum.lambda0 > 64.0 * std::numeric_limits<double>::epsilon() * scale)) {
    std::ostringstream msg;
    msg << "no finite uniform power at gamma0 = " << params.gamma0 << " (lambda0 = " << spectrum.lambda0 << ")";
    throw InfeasibleError(msg.str(), spectrum.lambda0);
  }
  return 1.0 / spectrum.lambda0;
}

double max_feasible_gamma_no_erasure(const GainProfile& profile) {
  const double total = interference_sum(profile);
  if (total <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / total;
}

std::vector<double> wave_vector(const LatticeSpec& spec, std::size_t k) {
  std::vector<double> q;
  for (int c : spec.coordinates(k)) q.push_back(2.0 * std::numbers::pi * c / spec.side);
  return q;
}

}  // namespace netpower
