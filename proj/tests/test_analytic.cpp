#include <doctest.h>

#include <cmath>
#include <limits>

#include "netpower/analytic.hpp"
#include "netpower/errors.hpp"
#include "netpower/numeric.hpp"

using namespace netpower;

namespace {

const ChannelParams kUnit{4.0, 1.0, 1.0};

const GainProfile& ring500() {
  static const GainProfile p = gain_profile({1, 500, 0.5}, kUnit);
  return p;
}

EigenSpectrum spectrum_at(const GainProfile& p, double gamma) { return eigenvalues(p, {p.alpha, 1.0, gamma}); }

EigenSpectrum flat(double lambda, std::size_t n = 16) {
  return EigenSpectrum::from_values({1, static_cast<int>(n), 1.0}, std::vector<double>(n, lambda));
}

}  // namespace

TEST_CASE("fixed-point residual") {
  const auto spec = spectrum_at(ring500(), 2.0);
  CHECK(beta_residual(0.0, 0.37, spec) == 0.37);
  const auto f = flat(0.8);
  CHECK(std::abs(beta_residual(0.4 * 0.8 / 0.6, 0.4, f)) < 1e-15);
  const auto roots = solve_beta(0.5, spec);
  REQUIRE(roots.size() == 1);
  CHECK(std::abs(beta_residual(roots[0].beta, 0.5, spec)) < 1e-10);

  const auto beyond = spectrum_at(ring500(), 1.1 / interference_sum(ring500()));
  CHECK_THROWS_AS(beta_residual(0.5 * -beyond.lambda0, 0.5, beyond), DomainError);
}

TEST_CASE("fixed-point roots") {
  SUBCASE("small erasure") {
    const auto spec = spectrum_at(ring500(), 3.0);
    const auto roots = solve_beta(1e-9, spec);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0].beta < 1e-8);
    CHECK(roots[0].branch == Branch::stable);
  }
  SUBCASE("flat spectrum") {
    for (double e : {0.1, 0.5, 0.9}) {
      const auto roots = solve_beta(e, flat(1.7));
      REQUIRE(roots.size() == 1);
      CHECK(roots[0].beta == doctest::Approx(e * 1.7 / (1 - e)).epsilon(1e-12));
    }
  }
  SUBCASE("just beyond the erasure-free bound") {
    const double gstar = 1.0 / interference_sum(ring500());
    const auto spec = spectrum_at(ring500(), gstar * 1.01);
    REQUIRE(spec.lambda0 < 0.0);
    const auto roots = solve_beta(0.5, spec);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0].beta < roots[1].beta);
    CHECK(roots[0].branch == Branch::unstable);
    CHECK(roots[1].branch == Branch::stable);
    for (const auto& r : roots) CHECK(std::abs(r.residual) <= 1e-10);
    // Grid oracle: the residual changes sign around each root.
    for (const auto& r : roots) {
      const double sa = beta_residual(r.beta * (1 - 1e-6), 0.5, spec);
      const double sb = beta_residual(r.beta * (1 + 1e-6), 0.5, spec);
      CHECK(sa * sb < 0.0);
    }
    CHECK(variance_erased(roots[0], spec, 0.5) < 0.0);
    CHECK(variance_erased(roots[1], spec, 0.5) > 0.0);
  }
  SUBCASE("past the critical point") {
    const double gc = critical_gamma(ring500(), 1.0, 0.5);
    CHECK_THROWS_AS(solve_beta(0.5, spectrum_at(ring500(), gc * 1.001)), NoSolutionError);
  }
}

TEST_CASE("branch structure over a target scan") {
  const double gstar = 1.0 / interference_sum(ring500());
  const double gc = critical_gamma(ring500(), 1.0, 0.5);
  for (int k = 1; k <= 30; ++k) {
    const double gamma = gc * k / 31.0;
    const auto spec = spectrum_at(ring500(), gamma);
    const auto roots = solve_beta(0.5, spec);
    if (gamma < gstar) {
      REQUIRE(roots.size() == 1);
      CHECK(roots[0].branch == Branch::stable);
    } else if (spec.lambda0 < 0.0) {
      REQUIRE(roots.size() == 2);
      CHECK(roots[1].branch == Branch::stable);
      CHECK(resolvent_slope(roots[1].beta, spec) > 0.0);
    }
    for (const auto& r : roots) CHECK(std::abs(r.residual) <= 1e-10);
  }
}

TEST_CASE("average power under erasures") {
  SUBCASE("vanishing erasure recovers the uniform power") {
    const auto spec = spectrum_at(ring500(), 5.0);
    const auto fp = solve_beta(1e-10, spec).front();
    CHECK(pave_erased(fp, spec, 1e-10) == doctest::Approx(1.0 / spec.lambda0).epsilon(1e-8));
  }
  SUBCASE("nearly total erasure approaches the isolated-link power") {
    const auto big = gain_profile({1, 1000, 0.5}, kUnit);
    const auto spec = spectrum_at(big, 1.0);
    const auto fp = solve_beta(0.999, spec).back();
    CHECK(std::abs(pave_erased(fp, spec, 0.999) - 1.0) < 0.01);
  }
  SUBCASE("flat spectrum cancels") {
    const auto f = flat(0.6);
    const auto fp = solve_beta(0.35, f).front();
    CHECK(pave_erased(fp, f, 0.35) == doctest::Approx(1.0 / 0.6).epsilon(1e-12));
    CHECK(std::abs(variance_erased(fp, f, 0.35)) < 1e-12);
  }
  SUBCASE("decreasing in e at fixed target") {
    double previous = std::numeric_limits<double>::infinity();
    for (double e : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
      const auto spec = spectrum_at(ring500(), 8.0);
      const auto fp = solve_beta(e, spec).back();
      const double p = pave_erased(fp, spec, e);
      CHECK(p < previous);
      previous = p;
    }
  }
  SUBCASE("non-positive resolvent diverges") {
    FixedPointSolution fp;
    fp.beta = 0.1;
    CHECK_THROWS_AS(pave_erased(fp, flat(-0.5), 0.5), DivergenceError);
  }
}

TEST_CASE("variance of the active powers") {
  const auto spec = spectrum_at(ring500(), 4.0);
  FixedPointSolution zero;
  zero.beta = 0.0;
  // Uniform powers without erasures.
  CHECK(variance_erased(zero, spec, 0.0) == 0.0);
  const auto fp = solve_beta(0.3, spec).back();
  CHECK(variance_erased(fp, spec, 0.3) > 0.0);

  // Diverges as the critical point is approached from the stable side.
  const double gc = critical_gamma(ring500(), 1.0, 0.3);
  double previous = 0.0;
  for (double d : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    const auto s = spectrum_at(ring500(), gc * (1 - d));
    const double v = variance_erased(solve_beta(0.3, s).back(), s, 0.3);
    CHECK(v > previous);
    previous = v;
  }
}

TEST_CASE("variance against Monte Carlo sample variance" * doctest::may_fail()) {
  // Known deviation: the fixed-point variance is an asymptotic approximation
  // that misses the local correlations of a short-range circulant, and at
  // mid-range targets the gap exceeds three standard errors.
  const double gc = critical_gamma(ring500(), 1.0, 0.3);
  const double gamma = 0.5 * gc;
  const auto spec = spectrum_at(ring500(), gamma);
  const double predicted = variance_erased(solve_beta(0.3, spec).back(), spec, 0.3);
  std::vector<double> samples;
  for (int r = 0; r < 200; ++r) {
    const ActiveNetwork net(ring500(), sample_mask(500, 0.3, 1000 + r), ActiveNetwork::Spectrum::skip);
    const auto sol = net.solve(1.0, gamma);
    if (sol.feasible) samples.push_back(sol.p_var);
  }
  REQUIRE(samples.size() > 100);
  double mean = 0.0, sq = 0.0;
  for (double v : samples) mean += v;
  mean /= samples.size();
  for (double v : samples) sq += (v - mean) * (v - mean);
  const double stderr_ = std::sqrt(sq / (samples.size() - 1) / samples.size());
  MESSAGE("predicted " << predicted << ", sampled " << mean << " +- " << stderr_);
  CHECK(std::abs(mean - predicted) <= 3 * stderr_);
}

TEST_CASE("critical target") {
  const double gstar = 1.0 / interference_sum(ring500());
  CHECK(critical_gamma(ring500(), 1.0, 0.0) == doctest::Approx(gstar).epsilon(1e-14));
  CHECK(std::abs(critical_gamma(ring500(), 1.0, 1e-6) - gstar) < 1e-3 * gstar);
  CHECK(critical_gamma(ring500(), 1.0, 1.0) == std::numeric_limits<double>::infinity());

  double previous = gstar;
  for (double e : {0.3, 0.5, 0.7}) {
    const auto cp = critical_point(ring500(), 1.0, e);
    CHECK(cp.gamma > previous);
    previous = cp.gamma;
    CHECK(cp.edge_residual < 1e-6);
    CHECK(std::abs(cp.beta_residual) < 1e-6);
    CHECK(solve_beta(e, spectrum_at(ring500(), cp.gamma * (1 - 1e-9))).size() >= 1);
  }

  // Where the stable-branch variance denominator vanishes is the merge point.
  const double gc = critical_gamma(ring500(), 1.0, 0.5);
  double lo = 0.5 * gc, hi = gc;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto s = spectrum_at(ring500(), mid);
    const auto roots = solve_beta(0.5, s);
    const double b = roots.back().beta;
    double norm = 0.0;
    for (double l : s.lambdas) norm += 1.0 / (l + b);
    norm /= s.size();
    (resolvent_slope(b, s) > 1e-6 * norm ? lo : hi) = mid;
  }
  CHECK(std::abs(lo - gc) <= 1e-4 * gc);
}

TEST_CASE("supported target under erasures") {
  const auto small = gamma_e(ring500(), kUnit, 1e-8);
  CHECK(small.gamma == doctest::Approx(1.0 / interference_sum(ring500())).epsilon(1e-6));
  const auto half = gamma_e(ring500(), kUnit, 0.5);
  CHECK(std::abs(half.gamma - critical_gamma(ring500(), 1.0, 0.5)) <= 1e-4 * half.gamma);
  CHECK(std::isfinite(half.closed_form));
  CHECK(gamma_e(ring500(), kUnit, 1.0).gamma == std::numeric_limits<double>::infinity());
}

TEST_CASE("regularized fixed point") {
  const auto spec = spectrum_at(ring500(), 2.0);
  const double beta0 = solve_beta(0.4, spec).back().beta;
  for (double eps : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) CHECK(std::abs(solve_beta_eps(0.4, eps, spec) - beta0) < 10 * eps);

  const auto f = flat(0.9);
  for (double eps : {1e-2, 1e-4}) {
    // e/(1 - eps/beta) = beta/(beta + lambda)  =>  beta = (e lambda + eps)/(1 - e)
    CHECK(solve_beta_eps(0.25, eps, f) == doctest::Approx((0.25 * 0.9 + eps) / 0.75).epsilon(1e-12));
  }
  CHECK(solve_beta_eps(1e-9, 1e-9, spec) < 1e-7);
}

TEST_CASE("mean-field power") {
  const ChannelParams params{4.0, 1.0, 6.0};
  CHECK(mean_field_power(ring500(), params, 1.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(mean_field_power(ring500(), params, 0.0) ==
        doctest::Approx(pave_no_erasure(eigenvalues(ring500(), params), params)).epsilon(1e-12));
  CHECK_THROWS_AS(mean_field_power(ring500(), {4.0, 1.0, 2.0 / interference_sum(ring500())}, 0.2),
                  MeanFieldInfeasibleError);

  const auto plane = gain_profile({2, 50, 0.5}, {5.0, 1.0, 1.0});
  const double gc = critical_gamma(plane, 1.0, 0.5);
  const double gamma = 0.5 * gc;
  const double mf = mean_field_power(plane, {5.0, 1.0, gamma}, 0.5);
  CHECK(std::isfinite(mf));
  CHECK(mf > 0.0);
  CHECK(mean_field_singular_gamma(plane, 0.5) > gc);
}
