#include <catch2/catch_amalgamated.hpp>

#include "sdelab/bessel.hpp"
#include "sdelab/hardy.hpp"

using namespace sdelab;

TEST_CASE("closed-form bound values") {
  CHECK(hhlt_lower(3, 2) == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(hhlt_lower(3, 3) == Catch::Approx(0.43050).margin(1e-5));
  CHECK(paper_upper(3, 3) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(paper_upper(3, 2) == Catch::Approx(1.5).epsilon(1e-15));
  CHECK(paper_upper(4, 4) == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(hhlt_upper(3, 3) == Catch::Approx(7.4022).margin(1e-3));
  CHECK(hhlt_upper(3, 2) == Catch::Approx(14.804).margin(2e-3));
}

TEST_CASE("hhlt lower bound decreases in N") {
  for (const int d : {3, 5, 9}) {
    double prev = 1e300;
    for (int n = 2; n <= 60; ++n) {
      const double v = hhlt_lower(d, n);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("factorial versus polynomial growth in d") {
  CHECK(hhlt_upper(6, 3) / hhlt_upper(3, 3) > 3.0 * paper_upper(6, 3) / paper_upper(3, 3));
  CHECK(hhlt_upper(10, 3) / hhlt_upper(3, 3) > 100.0 * paper_upper(10, 3) / paper_upper(3, 3));
}

TEST_CASE("kappa thresholds") {
  CHECK(kappa_thresholds(3, 2).kappa_hyp == Catch::Approx(16.0).epsilon(1e-15));
  CHECK(kappa_thresholds(3, 1000).kappa_hyp == Catch::Approx(4.0).epsilon(0.01));
  CHECK(kappa_thresholds(7, 10).k_int_endpoint == Catch::Approx(16.0).epsilon(1e-15));
  CHECK(kappa_thresholds(3, 2).k_int_endpoint == Catch::Approx(16.0).epsilon(1e-15));
  CHECK(kappa_thresholds(3, 2).kappa_hyp2 == 16.0);
}

TEST_CASE("sandwich and improvement over the exhaustive grid") {
  for (int d = 3; d <= 12; ++d) {
    for (int n = 2; n <= 100; ++n) {
      const double lo = hhlt_lower(d, n);
      const double up = paper_upper(d, n);
      REQUIRE(lo > 0.0);
      REQUIRE(lo <= up);
      if (n >= 3) REQUIRE(up < hhlt_upper(d, n));
      // kappa_hyp2 = 16 <= k_int endpoint, equality iff the first branch wins
      const auto t = kappa_thresholds(d, n);
      REQUIRE(t.kappa_hyp2 <= t.k_int_endpoint + 1e-12);
      const double dm2 = double(d - 2), dm1 = double(d - 1);
      const double branch =
          double(n) / (1.0 + std::sqrt(1.0 + 3.0 * dm2 * dm2 / (dm1 * dm1) * double(n - 1) *
                                                 double(n - 2)));
      if (branch > 1.0)
        REQUIRE(t.k_int_endpoint > 16.0);
      else
        REQUIRE(t.k_int_endpoint == 16.0);
    }
  }
}

TEST_CASE("N = 2 exactness of the lower bound") {
  for (int d = 3; d <= 12; ++d)
    CHECK(hhlt_lower(d, 2) ==
          Catch::Approx(double(d - 2) * double(d - 2) / 2.0).epsilon(1e-14));
}

TEST_CASE("blow-up cross-check identity") {
  // sqrt(kappa*) (d-2)^2/N / paper_upper(d, N) = 4 to machine precision
  for (int d = 3; d <= 12; ++d)
    for (const int n : {2, 3, 10, 57}) {
      const double lhs = std::sqrt(sticky_threshold(d)) * double(d - 2) * double(d - 2) /
                         double(n) / paper_upper(d, n);
      CHECK(lhs == Catch::Approx(4.0).epsilon(1e-13));
    }
}

TEST_CASE("bound row assembles all columns") {
  const auto row = bound_row(4, 5);
  CHECK(row.hhlt_lower == hhlt_lower(4, 5));
  CHECK(row.paper_upper == paper_upper(4, 5));
  CHECK(row.hhlt_upper == hhlt_upper(4, 5));
  CHECK(row.kappa_hyp == kappa_thresholds(4, 5).kappa_hyp);
  CHECK(!row.variational.has_value());
}

TEST_CASE("variational estimator at reduced budget brackets the N = 2 constant") {
  VariationalOptions opt;
  opt.samples_opt = 20000;
  opt.samples_final = 120000;
  opt.sweeps = 2;
  const auto res = variational_upper(3, 2, opt);
  // exact separation-of-variables value is (d-2)^2/2 = 0.5
  CHECK(res.c_hat > 0.45);
  CHECK(res.c_hat < 0.65);
  CHECK(res.c_hat >= hhlt_lower(3, 2) - 3.0 * res.stderr_batches);
  CHECK_THROWS_AS(variational_upper(3, 4), UnsupportedN);
}
