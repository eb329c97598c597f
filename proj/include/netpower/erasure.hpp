#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace netpower {

/// Activity pattern of the links: active[i] == false means link i is erased.
/// `erasure` is the probability that a link is removed.
struct ErasureMask {
  std::vector<bool> active;
  double erasure = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return active.size(); }
  std::size_t active_count() const;
  /// '1' for active, '0' for erased, in index order.
  std::string bits() const;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Uniform double in [0, 1) drawn for entry `index` of stream `seed`.
double counter_uniform(std::uint64_t seed, std::uint64_t index);

/// Each entry is erased independently with probability `erasure`. Entry i
/// depends only on (seed, i), so masks of different lengths share prefixes.
ErasureMask sample_mask(std::size_t n, double erasure, std::uint64_t seed);

ErasureMask full_mask(std::size_t n);

std::vector<std::size_t> active_indices(const ErasureMask& mask);

}  // namespace netpower
