#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "netpower/erasure.hpp"
#include "netpower/lattice.hpp"

namespace netpower {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Powers of the active links for one realization. `powers[i]` belongs to
/// link `indices[i]`; erased links carry no power.
struct PowerSolution {
  std::vector<std::size_t> indices;
  Vector powers;
  bool feasible = false;
  double min_active_eigenvalue = 0.0;
  std::size_t non_positive = 0;
  double p_ave = 0.0;
  double p_var = 0.0;
};

/// Mean and population variance, two-pass.
std::pair<double, double> mean_and_variance(const Vector& values);

/// Dense N x N SINR matrix: M_ii = 1/(n gamma0), M_ij = -g(j - i)/n.
Matrix build_matrix(const GainProfile& profile, const ChannelParams& params);

/// Principal submatrix of `m` on the given indices.
Matrix principal_submatrix(const Matrix& m, const std::vector<std::size_t>& indices);

/// Solves M_a P = 1 on the active set and reports feasibility without
/// throwing on infeasible instances. When M_a is not positive definite the
/// powers come from a symmetric-indefinite factorization, for diagnostics.
PowerSolution evaluate_powers(const Matrix& m, const ErasureMask& mask);

/// As evaluate_powers, but throws InfeasibleError unless the solution is
/// feasible and EmptyNetworkError when no link is active.
PowerSolution solve_powers(const Matrix& m, const ErasureMask& mask);

struct RegularizedPowers {
  Vector full;                          ///< length N, zero on erased links
  std::optional<PowerSolution> active;  ///< restriction, absent if all erased
};

/// Solves (E M E + eps I) P = E 1 on the full N-dimensional system.
RegularizedPowers solve_powers_regularized(const Matrix& m, const ErasureMask& mask, double eps);

/// Largest SINR target at which this realization still has a feasible
/// solution, by bisection to 1e-6 relative. +infinity when feasible at 1e6.
double max_feasible_gamma_sample(const GainProfile& profile, double noise, const ErasureMask& mask);

/// Largest |SINR_k / gamma0 - 1| over active links, recomputed from gains.
double max_sinr_deviation(const GainProfile& profile, const ChannelParams& params, const PowerSolution& solution);

/// Gain-restricted view of one realization, reused across SINR targets.
/// M_a(gamma) = (I / gamma - G_a) / n where G_a holds the off-diagonal gains.
class ActiveNetwork {
 public:
  enum class Spectrum { skip, compute };

  ActiveNetwork(const GainProfile& profile, const ErasureMask& mask, Spectrum spectrum = Spectrum::compute);

  std::size_t size() const { return indices_.size(); }
  const std::vector<std::size_t>& indices() const { return indices_; }

  /// Largest eigenvalue of G_a. Present only when computed at construction.
  std::optional<double> interference_radius() const { return radius_; }

  /// Feasibility test (Cholesky success and positive powers), no eigenvalues.
  bool feasible(double noise, double gamma) const;

  /// Full solution. min_active_eigenvalue uses the cached radius when
  /// available and a dense eigensolve otherwise.
  PowerSolution solve(double noise, double gamma) const;

 private:
  Matrix system(double noise, double gamma) const;

  std::vector<std::size_t> indices_;
  Matrix cross_gains_;
  std::optional<double> radius_;
};

}  // namespace netpower
