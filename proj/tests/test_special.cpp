#include <catch2/catch_amalgamated.hpp>

#include "sdelab/quadrature.hpp"
#include "sdelab/special.hpp"

using namespace sdelab;

TEST_CASE("normal cdf and quantile invert each other") {
  for (const double p : {1e-8, 1e-4, 0.025, 0.31, 0.5, 0.77, 0.975, 1.0 - 1e-6}) {
    CHECK(normal_cdf(normal_quantile(p)) == Catch::Approx(p).epsilon(1e-10));
  }
  CHECK(normal_quantile(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("incomplete gamma basics") {
  // P(1, x) = 1 - e^{-x}
  for (const double x : {0.1, 1.0, 3.0, 10.0})
    CHECK(gamma_p(1.0, x) == Catch::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  // P(1/2, x) = erf(sqrt(x))
  for (const double x : {0.2, 1.0, 4.0})
    CHECK(gamma_p(0.5, x) == Catch::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
  CHECK(gamma_q(2.5, 0.0) == Catch::Approx(1.0));
}

TEST_CASE("gamma quantile round trip") {
  for (const double shape : {0.5, 1.0, 3.2}) {
    for (const double p : {0.05, 0.5, 0.95}) {
      const double x = gamma_quantile(p, shape, 1.0);
      CHECK(gamma_cdf(x, shape, 1.0) == Catch::Approx(p).margin(1e-10));
    }
  }
  // median of Gamma(1/2, 1), used by the hitting-time oracle
  CHECK(gamma_quantile(0.5, 0.5, 1.0) == Catch::Approx(0.2274682115597864).epsilon(1e-8));
}

TEST_CASE("noncentral chi-square cdf sanity") {
  // ncp -> 0 reduces to the central law
  CHECK(noncentral_chi_square_cdf(3.0, 3.0, 0.0) ==
        Catch::Approx(chi_square_cdf(3.0, 3.0)).epsilon(1e-12));
  // monotone in x, mass accumulates near mean dof + ncp
  const double lo = noncentral_chi_square_cdf(2.0, 3.0, 5.0);
  const double hi = noncentral_chi_square_cdf(12.0, 3.0, 5.0);
  CHECK(lo < hi);
  CHECK(noncentral_chi_square_cdf(1000.0, 3.0, 5.0) == Catch::Approx(1.0).margin(1e-9));
  // large noncentrality: normal approximation check within a percent
  const double dof = 2.0, ncp = 800.0;
  const double mean = dof + ncp, var = 2.0 * (dof + 2.0 * ncp);
  const double at = mean + 0.7 * std::sqrt(var);
  CHECK(noncentral_chi_square_cdf(at, dof, ncp) ==
        Catch::Approx(normal_cdf(0.7)).margin(0.02));
}

TEST_CASE("ball volume") {
  CHECK(unit_ball_volume(3) == Catch::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-14));
  CHECK(unit_ball_volume(4) == Catch::Approx(std::numbers::pi * std::numbers::pi / 2.0).epsilon(1e-14));
}

TEST_CASE("gauss hermite integrates gaussians exactly enough") {
  const auto rule = gauss_hermite(20);
  double mass = 0.0, second = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    mass += rule.weights[i];
    second += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
  }
  CHECK(mass == Catch::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK(second == Catch::Approx(0.5 * std::sqrt(std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("adaptive simpson on a mildly singular integrand") {
  // int_0^1 x^{-1/2} dx = 2
  const double v = adaptive_simpson([](double x) { return x > 0 ? 1.0 / std::sqrt(x) : 0.0; },
                                    1e-14, 1.0, 1e-10, 48);
  CHECK(v == Catch::Approx(2.0).margin(2e-5));
}

TEST_CASE("halton fills the cube evenly") {
  Halton seq(3, 123);
  double mean[3] = {0, 0, 0};
  const int n = 4096;
  double pt[3];
  for (int i = 0; i < n; ++i) {
    seq.point(i, pt);
    for (int k = 0; k < 3; ++k) mean[k] += pt[k];
  }
  for (int k = 0; k < 3; ++k) CHECK(mean[k] / n == Catch::Approx(0.5).margin(0.01));
}
