#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netpower {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Discrete Fourier transform of a gain row produced a non-negligible
// imaginary part, i.e. the profile is not circulant-symmetric.
struct AsymmetryError : Error {
  using Error::Error;
};

// No positive finite power vector meets the SINR target.
struct InfeasibleError : Error {
  InfeasibleError(const std::string& what, double min_eigenvalue = 0.0, std::size_t non_positive = 0)
      : Error(what), min_active_eigenvalue(min_eigenvalue), non_positive_powers(non_positive) {}
  double min_active_eigenvalue;
  std::size_t non_positive_powers;
};

struct EmptyNetworkError : Error {
  using Error::Error;
};

struct SingularSystemError : Error {
  using Error::Error;
};

// Argument outside the resolvent domain (beta + lambda(q) <= 0 somewhere).
struct DomainError : Error {
  using Error::Error;
};

// The fixed-point equation has no root: past the critical SINR target.
struct NoSolutionError : Error {
  using Error::Error;
};

struct DivergenceError : Error {
  using Error::Error;
};

// Variance denominator vanished: the root sits on the spectrum edge.
struct EdgeError : Error {
  using Error::Error;
};

struct MeanFieldInfeasibleError : Error {
  using Error::Error;
};

struct GridMismatchError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct SchemaError : Error {
  using Error::Error;
};

}  // namespace netpower
