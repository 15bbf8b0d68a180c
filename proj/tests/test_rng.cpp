#include <catch2/catch_amalgamated.hpp>

#include "sdelab/rng.hpp"
#include "sdelab/special.hpp"

using namespace sdelab;

TEST_CASE("philox known answers") {
  // Random123 kat_vectors, philox4x32-10
  auto z = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(z[0] == 0x6627e8d5u);
  CHECK(z[1] == 0xe169c58du);
  CHECK(z[2] == 0xbc57ac4cu);
  CHECK(z[3] == 0x9b00dbd8u);

  const uint32_t ff = 0xffffffffu;
  auto f = Philox4x32::block({ff, ff, ff, ff}, {ff, ff});
  CHECK(f[0] == 0x408f276du);
  CHECK(f[1] == 0x41c83b0eu);
  CHECK(f[2] == 0xa20bc7c6u);
  CHECK(f[3] == 0x6d5451fdu);

  auto pi = Philox4x32::block({0x243F6A88u, 0x85A308D3u, 0x13198A2Eu, 0x03707344u},
                              {0xA4093822u, 0x299F31D0u});
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and distinct") {
  CounterRng a(42, 7, 1), b(42, 7, 1), c(42, 8, 1), d(43, 7, 1);
  for (int i = 0; i < 100; ++i) {
    const uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
  }
}

TEST_CASE("normal moments") {
  CounterRng rng(1, 0);
  const long n = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
    sum4 += z * z * z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum2 / n == Catch::Approx(1.0).margin(0.02));
  CHECK(sum4 / n == Catch::Approx(3.0).margin(0.1));
}

TEST_CASE("gamma mean and variance") {
  CounterRng rng(2, 0);
  for (const double shape : {0.37, 1.0, 4.5}) {
    const long n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (long i = 0; i < n; ++i) {
      const double g = rng.gamma(shape, 2.0);
      sum += g;
      sum2 += g * g;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == Catch::Approx(2.0 * shape).epsilon(0.02));
    CHECK(var == Catch::Approx(4.0 * shape).epsilon(0.05));
  }
}

TEST_CASE("poisson mean across both samplers") {
  CounterRng rng(3, 0);
  for (const double mean : {0.4, 3.0, 25.0, 400.0}) {
    const long n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (long i = 0; i < n; ++i) {
      const double k = double(rng.poisson(mean));
      sum += k;
      sum2 += k * k;
    }
    const double m = sum / n;
    const double var = sum2 / n - m * m;
    CHECK(m == Catch::Approx(mean).epsilon(0.02));
    CHECK(var == Catch::Approx(mean).epsilon(0.05));
  }
}

TEST_CASE("uniform doubles stay in (0,1)") {
  CounterRng rng(9, 9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}
