#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace netpower {

/// Square torus of side L in d = 1 or 2 dimensions with link-distance ratio
/// s = delta / ell. Sites are indexed row-major over (m_1, ..., m_d).
struct LatticeSpec {
  int dim = 1;
  int side = 3;
  double s = 0.5;

  /// Throws std::invalid_argument unless dim in {1,2}, side >= 3, s > 0.
  void validate() const;
  std::size_t sites() const;

  /// Row-major coordinates of a flat index.
  std::vector<int> coordinates(std::size_t index) const;
  std::size_t flat_index(std::span<const int> coords) const;

  /// Flat index of the componentwise offset (j - i) mod L.
  std::size_t offset_index(std::size_t i, std::size_t j) const;
};

struct ChannelParams {
  double alpha = 4.0;
  double noise = 1.0;
  double gamma0 = 1.0;

  void validate() const;
};

/// First row of the circulant gain matrix: g[m] for every torus offset m.
struct GainProfile {
  LatticeSpec spec;
  double alpha = 4.0;
  std::vector<double> g;
};

/// Euclidean norm of the minimum-image offset on the torus.
double torus_distance(std::span<const int> offset, int side);

double gain(std::span<const int> offset, const LatticeSpec& spec, const ChannelParams& params);

GainProfile gain_profile(const LatticeSpec& spec, const ChannelParams& params);

/// Sum of g[m] over m != 0.
double interference_sum(const GainProfile& profile);

}  // namespace netpower
