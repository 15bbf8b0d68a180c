#include <catch2/catch_amalgamated.hpp>

#include "sdelab/bessel.hpp"
#include "sdelab/rng.hpp"
#include "sdelab/stats.hpp"

using namespace sdelab;

TEST_CASE("dispersion dimension formula") {
  CHECK(bessel_dimension(2, 3, 0.0) == 3.0);
  CHECK(bessel_dimension(2, 3, 144.0) == 0.0);  // exactly the sticky threshold
  CHECK(bessel_dimension(3, 3, 16.0) == 4.0);
  CHECK(bessel_dimension(2, 3, 48.0) == Catch::Approx(3.0 - std::sqrt(48.0) / 4.0).epsilon(1e-15));
  CHECK(bessel_dimension(2, 3, 160.0) == Catch::Approx(-0.16227766).margin(1e-6));
}

TEST_CASE("mu is monotone in kappa and d") {
  double prev = bessel_dimension(2, 3, 0.0);
  for (double k = 1.0; k < 300.0; k += 7.3) {
    const double mu = bessel_dimension(2, 3, k);
    CHECK(mu < prev);
    prev = mu;
  }
  // increasing in d holds on kappa < 16 (the derivative in d is 1 - sqrt(kappa)/4)
  for (const double k : {0.0, 5.0, 15.9})
    for (int d = 3; d < 11; ++d)
      CHECK(bessel_dimension(2, d + 1, k) > bessel_dimension(2, d, k));
}

TEST_CASE("sticky threshold values") {
  CHECK(sticky_threshold(3) == 144.0);
  CHECK(sticky_threshold(4) == 64.0);
  CHECK(sticky_threshold(100) == Catch::Approx(16.0).epsilon(0.05));
  // threshold is the first sticky kappa, bit for bit
  for (int d = 3; d <= 12; ++d) {
    const double ks = sticky_threshold(d);
    CHECK(bessel_dimension(2, d, ks) <= 0.0);
    CHECK(bessel_dimension(2, d, std::nextafter(ks, 0.0)) > 0.0);
  }
}

TEST_CASE("regime classification examples") {
  const auto sticky = classify_regime(2, 3, 160.0);
  CHECK(sticky.label == RegimeLabel::sticky);
  CHECK(sticky.mu == Catch::Approx(-0.16227766).margin(1e-6));

  const auto ns = classify_regime(2, 3, 100.0);
  CHECK(ns.label == RegimeLabel::non_sticky);
  CHECK(ns.kappa_bprime_lo == Catch::Approx(48.0).epsilon(1e-12));
  CHECK(ns.kappa_bprime_hi == Catch::Approx(144.0).epsilon(1e-12));
  CHECK(100.0 > ns.kappa_bprime_lo);
  CHECK(100.0 < ns.kappa_bprime_hi);

  const auto boundary = classify_regime(2, 3, 16.0);
  CHECK(boundary.label == RegimeLabel::no_collision);  // mu = 2 inclusive
  CHECK(boundary.mu == Catch::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("classifier by mu and by kappa threshold agree exactly") {
  // includes points planted within a few ulps of the threshold
  CounterRng rng(11, 0);
  long checked = 0;
  for (int d = 3; d <= 9; ++d) {
    const double ks = sticky_threshold(d);
    std::vector<double> kappas;
    for (int i = 0; i < 1500; ++i) kappas.push_back(rng.next_double() * 2.2 * ks);
    double lo = ks, hi = ks;
    for (int i = 0; i < 6; ++i) {
      kappas.push_back(lo = std::nextafter(lo, 0.0));
      kappas.push_back(hi = std::nextafter(hi, 1e9));
    }
    kappas.push_back(ks);
    for (const double kappa : kappas) {
      for (const int N : {2, 3, 7}) {
        const bool by_mu = classify_regime(N, d, kappa).label == RegimeLabel::sticky;
        const bool by_kappa = kappa >= ks;
        REQUIRE(by_mu == by_kappa);
        ++checked;
      }
    }
  }
  CHECK(checked > 10000);
}

TEST_CASE("exact transition sampler moments") {
  CounterRng rng(12, 0);
  const long n = 100000;
  {
    BesselParams p{3.0, 0.0};
    RunningMoments m;
    for (long i = 0; i < n; ++i) m.add(sample_besq_transition(p, 1.0, rng));
    CHECK(std::abs(m.mean - 3.0) < 4.0 * m.stderr_mean());
    CHECK(m.variance() == Catch::Approx(2.0 * 3.0).epsilon(0.05));
  }
  {
    BesselParams p{3.0, 1.0};
    RunningMoments m;
    for (long i = 0; i < n; ++i) m.add(sample_besq_transition(p, 1.0, rng));
    CHECK(std::abs(m.mean - 4.0) < 4.0 * m.stderr_mean());
    CHECK(m.variance() == Catch::Approx(4.0 * 1.0 + 2.0 * 3.0).epsilon(0.05));
  }
  {
    // mean x0 + mu t and variance 4 x0 t + 2 mu t^2 at another (mu, t)
    BesselParams p{1.2679, 2.0};
    RunningMoments m;
    for (long i = 0; i < n; ++i) m.add(sample_besq_transition(p, 0.5, rng));
    CHECK(std::abs(m.mean - (2.0 + 1.2679 * 0.5)) < 4.0 * m.stderr_mean());
    CHECK(m.variance() == Catch::Approx(4.0 * 2.0 * 0.5 + 2.0 * 1.2679 * 0.25).epsilon(0.05));
  }
  CHECK_THROWS_AS(sample_besq_transition(BesselParams{-0.1, 1.0}, 1.0, rng),
                  UnsupportedDimension);
}

TEST_CASE("transition sampler matches its own cdf") {
  CounterRng rng(13, 0);
  BesselParams p{2.4, 0.7};
  std::vector<double> s;
  for (int i = 0; i < 30000; ++i) s.push_back(sample_besq_transition(p, 0.8, rng));
  const double d = ks_statistic(s, [&](double x) { return besq_transition_cdf(p, 0.8, x); });
  CHECK(d < 0.012);
}

TEST_CASE("hitting time sampler: median oracle and cdf") {
  // T0 = x0/(2G), G ~ Gamma(1 - mu/2): median via the Gamma quantile
  BesselParams p{1.0, 1.0};
  const double g_median = gamma_quantile(0.5, 1.0 - 0.5 * p.mu, 1.0);
  const double t_median = p.x0 / (2.0 * g_median);
  CHECK(t_median == Catch::Approx(2.1981).margin(2e-4));

  CounterRng rng(14, 0);
  std::vector<double> s;
  for (int i = 0; i < 100000; ++i) s.push_back(sample_hitting_time(p, rng));
  std::sort(s.begin(), s.end());
  CHECK(quantile_sorted(s, 0.5) == Catch::Approx(t_median).epsilon(0.02));

  const double d = ks_statistic(s, [&](double t) { return hitting_time_cdf(p, t); });
  CHECK(d < 0.006);

  CHECK_THROWS_AS(sample_hitting_time(BesselParams{2.0, 1.0}, rng), UnsupportedDimension);
  CHECK_THROWS_AS(sample_hitting_time(BesselParams{-0.2, 1.0}, rng), UnsupportedDimension);
}

TEST_CASE("hitting time limit mu -> 2-") {
  // shape -> 0 pushes T0 stochastically to infinity
  CounterRng rng(15, 0);
  BesselParams near2{1.995, 1.0};
  long huge = 0;
  for (int i = 0; i < 2000; ++i)
    if (sample_hitting_time(near2, rng) > 1e3) ++huge;
  CHECK(huge > 1000);
}

TEST_CASE("euler path basics") {
  CounterRng rng(16, 0);
  {
    BesselParams p{0.0, 0.0};
    const auto r = besq_euler_path(p, 1e-3, 1.0, rng);
    CHECK(r.terminal == 0.0);
    CHECK(r.absorbed);
    CHECK(r.first_zero_time == Catch::Approx(1e-3));
  }
  {
    BesselParams p{3.0, 1.0};
    RunningMoments m;
    for (int i = 0; i < 10000; ++i) m.add(besq_euler_path(p, 1e-3, 1.0, rng).terminal);
    CHECK(std::abs(m.mean - 4.0) < 3.0 * m.stderr_mean());
  }
}

TEST_CASE("absorption frequency in the sticky regime matches the gamma law") {
  // mu = -0.1623: P(T0 <= 20) = Q(1 - mu/2, x0/40) ~ 0.982
  const double mu = bessel_dimension(2, 3, 160.0);
  BesselParams p{mu, 1.0};
  const double oracle = hitting_time_cdf(p, 20.0);
  CHECK(oracle == Catch::Approx(0.982).margin(0.002));

  CounterRng rng(17, 0);
  long absorbed = 0;
  const long n = 4000;
  for (long i = 0; i < n; ++i)
    if (besq_euler_path(p, 1e-3, 20.0, rng).absorbed) ++absorbed;
  const double freq = double(absorbed) / double(n);
  CHECK(std::abs(freq - oracle) < 0.015);
}

TEST_CASE("exact sampler vs euler reference in distribution", "[slow]") {
  CounterRng rng(18, 0);
  const long n = 100000;
  const struct {
    double mu, t;
  } cases[] = {{0.5, 0.25}, {1.2679, 0.5}, {3.0, 0.25}};
  for (const auto& c : cases) {
    BesselParams p{c.mu, 1.0};
    std::vector<double> exact, euler;
    exact.reserve(n);
    euler.reserve(n);
    for (long i = 0; i < n; ++i) exact.push_back(sample_besq_transition(p, c.t, rng));
    for (long i = 0; i < n; ++i) {
      auto res = besq_euler_path(p, 1e-5, c.t, rng);
      euler.push_back(res.terminal);
    }
    CHECK(ks_two_sample(exact, euler) < 0.02);
  }
}

TEST_CASE("hitting law vs absorbed euler first passage", "[slow]") {
  BesselParams p{1.2679, 1.0};
  CounterRng rng(19, 0);
  const double t_max = 4.0;
  const long n = 20000;
  std::vector<double> exact, euler;
  for (long i = 0; i < n; ++i) exact.push_back(sample_hitting_time(p, rng));
  for (long i = 0; i < n; ++i) {
    const auto r = besq_euler_path(p, 1e-5, t_max, rng);
    euler.push_back(r.hit_zero ? r.first_zero_time : std::numeric_limits<double>::infinity());
  }
  CHECK(ks_censored(exact, euler, t_max) < 0.03);
}
