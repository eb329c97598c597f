#include "netpower/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace netpower {

void LatticeSpec::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("lattice dimension must be 1 or 2, got " + std::to_string(dim));
  if (side < 3) throw std::invalid_argument("lattice side must be >= 3, got " + std::to_string(side));
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("link distance ratio s must be positive");
}

std::size_t LatticeSpec::sites() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(side);
  return n;
}

std::vector<int> LatticeSpec::coordinates(std::size_t index) const {
  std::vector<int> coords(static_cast<std::size_t>(dim));
  for (int k = dim - 1; k >= 0; --k) {
    coords[static_cast<std::size_t>(k)] = static_cast<int>(index % static_cast<std::size_t>(side));
    index /= static_cast<std::size_t>(side);
  }
  return coords;
}

std::size_t LatticeSpec::flat_index(std::span<const int> coords) const {
  std::size_t index = 0;
  for (int c : coords) {
    const int wrapped = ((c % side) + side) % side;
    index = index * static_cast<std::size_t>(side) + static_cast<std::size_t>(wrapped);
  }
  return index;
}

std::size_t LatticeSpec::offset_index(std::size_t i, std::size_t j) const {
  const auto l = static_cast<std::size_t>(side);
  if (dim == 1) return (j + l - i) % l;
  const std::size_t row = (j / l + l - i / l) % l;
  const std::size_t col = (j % l + l - i % l) % l;
  return row * l + col;
}

void ChannelParams::validate() const {
  if (!(alpha >= 2.0) || !std::isfinite(alpha)) throw std::invalid_argument("pathloss exponent must be >= 2");
  if (!(noise > 0.0) || !std::isfinite(noise)) throw std::invalid_argument("noise must be positive");
  if (!(gamma0 > 0.0)) throw std::invalid_argument("SINR target must be positive");
}

double torus_distance(std::span<const int> offset, int side) {
  double r2 = 0.0;
  for (int m : offset) {
    const int wrapped = ((m % side) + side) % side;
    const int image = std::min(wrapped, side - wrapped);
    r2 += static_cast<double>(image) * image;
  }
  return std::sqrt(r2);
}

namespace {

double gain_from_r2(double r2, double s, double alpha) {
  if (r2 == 0.0) return 1.0;
  return std::pow(s * s / (r2 + s * s), alpha / 2.0);
}

}  // namespace

double gain(std::span<const int> offset, const LatticeSpec& spec, const ChannelParams& params) {
  const double r = torus_distance(offset, spec.side);
  return gain_from_r2(r * r, spec.s, params.alpha);
}

GainProfile gain_profile(const LatticeSpec& spec, const ChannelParams& params) {
  spec.validate();
  params.validate();
  GainProfile profile{spec, params.alpha, std::vector<double>(spec.sites())};
  for (std::size_t m = 0; m < profile.g.size(); ++m) {
    double r2 = 0.0;
    for (int c : spec.coordinates(m)) {
      const int image = std::min(c, spec.side - c);
      r2 += static_cast<double>(image) * image;
    }
    profile.g[m] = gain_from_r2(r2, spec.s, params.alpha);
  }
  return profile;
}

double interference_sum(const GainProfile& profile) {
  double total = 0.0;
  for (std::size_t m = 1; m < profile.g.size(); ++m) total += profile.g[m];
  return total;
}

}  // namespace netpower
