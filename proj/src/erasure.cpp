#include "netpower/erasure.hpp"

#include <algorithm>
#include <stdexcept>

namespace netpower {

std::size_t ErasureMask::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

std::string ErasureMask::bits() const {
  std::string out(active.size(), '0');
  for (std::size_t i = 0; i < active.size(); ++i)
    if (active[i]) out[i] = '1';
  return out;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t word = mix64(mix64(seed) ^ mix64(index ^ 0xd1b54a32d192ed03ULL));
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

ErasureMask sample_mask(std::size_t n, double erasure, std::uint64_t seed) {
  if (!(erasure >= 0.0 && erasure <= 1.0)) throw std::invalid_argument("erasure probability must lie in [0, 1]");
  ErasureMask mask{std::vector<bool>(n), erasure, seed};
  for (std::size_t i = 0; i < n; ++i) mask.active[i] = !(counter_uniform(seed, i) < erasure);
  return mask;
}

ErasureMask full_mask(std::size_t n) { return ErasureMask{std::vector<bool>(n, true), 0.0, 0}; }

std::vector<std::size_t> active_indices(const ErasureMask& mask) {
  std::vector<std::size_t> out;
  out.reserve(mask.active.size());
  for (std::size_t i = 0; i < mask.active.size(); ++i)
    if (mask.active[i]) out.push_back(i);
  return out;
}

}  // namespace netpower
