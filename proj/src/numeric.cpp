#include "netpower/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "netpower/errors.hpp"
#include "netpower/spectrum.hpp"

namespace netpower {

namespace {

double min_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

std::size_t count_non_positive(const Vector& p) {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!(p(i) > 0.0)) ++count;
  return count;
}

// Factorizes the restricted system and fills everything except the
// eigenvalue, which the caller supplies (it may be cached).
PowerSolution solve_restricted(const Matrix& ma, std::vector<std::size_t> indices, double min_eig) {
  PowerSolution out;
  out.indices = std::move(indices);
  out.min_active_eigenvalue = min_eig;
  const Vector ones = Vector::Ones(ma.rows());
  Eigen::LLT<Matrix> llt(ma);
  bool definite = llt.info() == Eigen::Success;
  if (definite) {
    out.powers = llt.solve(ones);
  } else {
    Eigen::LDLT<Matrix> ldlt(ma);
    out.powers = ldlt.solve(ones);
  }
  out.non_positive = count_non_positive(out.powers);
  // A Cholesky breakdown overrides a rounding-level positive eigenvalue.
  out.feasible = definite && min_eig > 0.0 && out.non_positive == 0;
  std::tie(out.p_ave, out.p_var) = mean_and_variance(out.powers);
  return out;
}

[[noreturn]] void throw_infeasible(const PowerSolution& s) {
  std::ostringstream msg;
  msg << "no feasible power vector: min active eigenvalue " << s.min_active_eigenvalue << ", " << s.non_positive
      << " non-positive powers";
  throw InfeasibleError(msg.str(), s.min_active_eigenvalue, s.non_positive);
}

}  // namespace

std::pair<double, double> mean_and_variance(const Vector& values) {
  const auto n = values.size();
  if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double mean = values.sum() / static_cast<double>(n);
  const double var = (values.array() - mean).square().sum() / static_cast<double>(n);
  return {mean, var};
}

Matrix build_matrix(const GainProfile& profile, const ChannelParams& params) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(profile.g.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto off = profile.spec.offset_index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      m(i, j) = i == j ? profile.g[0] / (params.noise * params.gamma0) : -profile.g[off] / params.noise;
    }
  }
  return m;
}

Matrix principal_submatrix(const Matrix& m, const std::vector<std::size_t>& indices) {
  const auto k = static_cast<Eigen::Index>(indices.size());
  Matrix sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      sub(a, b) = m(static_cast<Eigen::Index>(indices[static_cast<std::size_t>(a)]),
                    static_cast<Eigen::Index>(indices[static_cast<std::size_t>(b)]));
  return sub;
}

PowerSolution evaluate_powers(const Matrix& m, const ErasureMask& mask) {
  if (static_cast<std::size_t>(m.rows()) != mask.size()) throw std::invalid_argument("mask length does not match matrix");
  auto indices = active_indices(mask);
  if (indices.empty()) throw EmptyNetworkError("no active links in the network");
  const Matrix ma = principal_submatrix(m, indices);
  return solve_restricted(ma, std::move(indices), min_eigenvalue(ma));
}

PowerSolution solve_powers(const Matrix& m, const ErasureMask& mask) {
  PowerSolution s = evaluate_powers(m, mask);
  if (!s.feasible) throw_infeasible(s);
  return s;
}

RegularizedPowers solve_powers_regularized(const Matrix& m, const ErasureMask& mask, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("regularization must be positive");
  const auto n = m.rows();
  if (static_cast<std::size_t>(n) != mask.size()) throw std::invalid_argument("mask length does not match matrix");

  Vector e(n);
  for (Eigen::Index i = 0; i < n; ++i) e(i) = mask.active[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  Matrix system = e.asDiagonal() * m * e.asDiagonal();
  system.diagonal().array() += eps;

  RegularizedPowers out;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() == Eigen::Success) {
    out.full = llt.solve(e);
  } else {
    Eigen::LDLT<Matrix> ldlt(system);
    if (ldlt.info() != Eigen::Success) throw SingularSystemError("regularized factorization failed");
    out.full = ldlt.solve(e);
  }
  const double residual = (system * out.full - e).lpNorm<Eigen::Infinity>();
  const double scale = system.lpNorm<Eigen::Infinity>() * out.full.lpNorm<Eigen::Infinity>() + 1.0;
  if (!out.full.allFinite() || residual > 1e-8 * scale) {
    std::ostringstream msg;
    msg << "regularized solve at eps = " << eps << " left residual " << residual;
    throw SingularSystemError(msg.str());
  }

  auto indices = active_indices(mask);
  if (!indices.empty()) {
    const Matrix ma = principal_submatrix(m, indices);
    PowerSolution s;
    s.powers.resize(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t a = 0; a < indices.size(); ++a)
      s.powers(static_cast<Eigen::Index>(a)) = out.full(static_cast<Eigen::Index>(indices[a]));
    s.indices = std::move(indices);
    s.min_active_eigenvalue = min_eigenvalue(ma);
    s.non_positive = count_non_positive(s.powers);
    s.feasible = s.min_active_eigenvalue > 0.0 && s.non_positive == 0;
    std::tie(s.p_ave, s.p_var) = mean_and_variance(s.powers);
    out.active = std::move(s);
  }
  return out;
}

double max_feasible_gamma_sample(const GainProfile& profile, double noise, const ErasureMask& mask) {
  constexpr double kCap = 1e6;
  constexpr double kRelTol = 1e-6;
  const ActiveNetwork network(profile, mask, ActiveNetwork::Spectrum::skip);
  if (network.size() == 0) throw EmptyNetworkError("no active links in the network");

  const double interference = interference_sum(profile);
  double lo = 0.0;
  double hi = interference > 0.0 ? 1.0 / ((1.0 - mask.erasure) * interference) : kCap;
  if (!std::isfinite(hi) || hi > kCap) hi = kCap;
  while (network.feasible(noise, hi)) {
    if (hi >= kCap) return std::numeric_limits<double>::infinity();
    lo = hi;
    hi = std::min(2.0 * hi, kCap);
  }
  if (lo == 0.0) lo = hi / 2.0;
  while (!network.feasible(noise, lo)) {
    hi = lo;
    lo /= 2.0;
  }
  while (hi - lo > kRelTol * lo) {
    const double mid = 0.5 * (lo + hi);
    (network.feasible(noise, mid) ? lo : hi) = mid;
  }
  return lo;
}

double max_sinr_deviation(const GainProfile& profile, const ChannelParams& params, const PowerSolution& solution) {
  const auto& idx = solution.indices;
  double worst = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    double interference = 0.0;
    for (std::size_t b = 0; b < idx.size(); ++b) {
      if (a == b) continue;
      interference += profile.g[profile.spec.offset_index(idx[b], idx[a])] * solution.powers(static_cast<Eigen::Index>(b));
    }
    const double sinr = solution.powers(static_cast<Eigen::Index>(a)) * profile.g[0] / (params.noise + interference);
    worst = std::max(worst, std::abs(sinr / params.gamma0 - 1.0));
  }
  return worst;
}

ActiveNetwork::ActiveNetwork(const GainProfile& profile, const ErasureMask& mask, Spectrum spectrum)
    : indices_(active_indices(mask)) {
  if (mask.size() != profile.g.size()) throw std::invalid_argument("mask length does not match lattice");
  const auto k = static_cast<Eigen::Index>(indices_.size());
  cross_gains_.resize(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      cross_gains_(a, b) =
          a == b ? 0.0
                 : profile.g[profile.spec.offset_index(indices_[static_cast<std::size_t>(a)],
                                                       indices_[static_cast<std::size_t>(b)])];
    }
  }
  if (spectrum == Spectrum::compute && k > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cross_gains_, Eigen::EigenvaluesOnly);
    radius_ = solver.eigenvalues()(k - 1);
  }
}

Matrix ActiveNetwork::system(double noise, double gamma) const {
  Matrix ma = -cross_gains_ / noise;
  ma.diagonal().array() += 1.0 / (noise * gamma);
  return ma;
}

bool ActiveNetwork::feasible(double noise, double gamma) const {
  Eigen::LLT<Matrix> llt(system(noise, gamma));
  if (llt.info() != Eigen::Success) return false;
  const Vector p = llt.solve(Vector::Ones(static_cast<Eigen::Index>(size())));
  return count_non_positive(p) == 0;
}

PowerSolution ActiveNetwork::solve(double noise, double gamma) const {
  if (indices_.empty()) throw EmptyNetworkError("no active links in the network");
  const Matrix ma = system(noise, gamma);
  const double min_eig = radius_ ? (1.0 / gamma - *radius_) / noise : min_eigenvalue(ma);
  return solve_restricted(ma, indices_, min_eig);
}

}  // namespace netpower
