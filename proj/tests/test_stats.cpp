#include <catch2/catch_amalgamated.hpp>

#include "sdelab/rng.hpp"
#include "sdelab/stats.hpp"

using namespace sdelab;

TEST_CASE("ks statistic against exact cdf") {
  CounterRng rng(5, 0);
  std::vector<double> s;
  for (int i = 0; i < 20000; ++i) s.push_back(rng.next_double());
  const double d = ks_statistic(s, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d < 0.015);  // ~1.36/sqrt(n) at 95%
  // a shifted sample must be flagged
  for (auto& x : s) x = std::min(1.0, x + 0.1);
  CHECK(ks_statistic(s, [](double x) { return std::clamp(x, 0.0, 1.0); }) > 0.08);
}

TEST_CASE("two-sample ks") {
  CounterRng a(6, 0), b(6, 1);
  std::vector<double> xs, ys, zs;
  for (int i = 0; i < 10000; ++i) {
    xs.push_back(a.normal());
    ys.push_back(b.normal());
    zs.push_back(b.normal() + 0.25);
  }
  CHECK(ks_two_sample(xs, ys) < 0.025);
  CHECK(ks_two_sample(xs, zs) > 0.06);
}

TEST_CASE("wilson interval brackets the truth") {
  const auto w = wilson_interval(480, 1000);
  CHECK(w.lo < 0.48);
  CHECK(w.hi > 0.48);
  CHECK(w.halfwidth == Catch::Approx(0.031).margin(0.004));
  const auto z = wilson_interval(0, 100);
  CHECK(z.lo == 0.0);
  CHECK(z.hi > 0.0);
}

TEST_CASE("energy distance is zero for equal laws and positive otherwise") {
  CounterRng a(7, 0), b(7, 1);
  std::vector<double> xs, ys, zs;
  for (int i = 0; i < 4000; ++i) {
    xs.push_back(a.normal());
    ys.push_back(b.normal());
    zs.push_back(2.0 * b.normal() + 1.0);
  }
  const double same = energy_distance_1d(xs, ys);
  const double diff = energy_distance_1d(xs, zs);
  CHECK(std::abs(same) < 0.02);
  CHECK(diff > 0.2);
  // brute-force cross check on a small sample
  std::vector<double> u(xs.begin(), xs.begin() + 200);
  std::vector<double> v(zs.begin(), zs.begin() + 150);
  double ab = 0, aa = 0, bb = 0;
  for (double x : u)
    for (double y : v) ab += std::abs(x - y);
  for (double x : u)
    for (double y : u) aa += std::abs(x - y);
  for (double x : v)
    for (double y : v) bb += std::abs(x - y);
  const double brute = 2.0 * ab / (200.0 * 150.0) - aa / (200.0 * 200.0) - bb / (150.0 * 150.0);
  CHECK(energy_distance_1d(u, v) == Catch::Approx(brute).margin(1e-10));
}

TEST_CASE("ls slope through origin") {
  std::vector<double> x = {1, 2, 3, 4}, y = {2.1, 3.9, 6.2, 7.8};
  CHECK(ls_slope_through_origin(x, y) == Catch::Approx(1.97).margin(0.05));
}

TEST_CASE("censored ks equals plain ks when nothing is censored") {
  std::vector<double> a = {0.1, 0.4, 0.9}, b = {0.2, 0.3, 0.8};
  CHECK(ks_censored(a, b, 10.0) == Catch::Approx(ks_two_sample(a, b)).margin(1e-12));
}
