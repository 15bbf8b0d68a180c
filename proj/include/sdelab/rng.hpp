// Counter-based random streams (Philox4x32-10) plus the samplers the lab needs.
//
// Every stream is keyed by (master seed, stream id, substream id) and owns a
// 64-bit draw counter, so results never depend on thread scheduling: worker k
// producing path p draws exactly the same numbers as any other worker would.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "sdelab/errors.hpp"

namespace sdelab {

struct Philox4x32 {
  // One 10-round block: 128-bit counter, 64-bit key -> 128 output bits.
  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
    constexpr uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = uint64_t(kM0) * ctr[0];
      const uint64_t p1 = uint64_t(kM1) * ctr[2];
      ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], uint32_t(p1),
             uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], uint32_t(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

inline constexpr double kZigguratR = 3.442619855899;

// Splittable stream over Philox blocks. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = uint64_t;

  CounterRng(uint64_t master_seed, uint64_t stream, uint64_t substream = 0)
      : key_{uint32_t(stream & 0xFFFFFFFFu), uint32_t(stream >> 32)},
        hi_{uint32_t(master_seed & 0xFFFFFFFFu), uint32_t(master_seed >> 32)},
        sub_(substream) {}

  static constexpr uint64_t min() { return 0; }
  static constexpr uint64_t max() { return ~uint64_t(0); }

  uint64_t operator()() { return next_u64(); }

  uint64_t next_u64() {
    if (phase_ == 0) {
      const std::array<uint32_t, 4> ctr = {uint32_t(counter_ & 0xFFFFFFFFu),
                                           uint32_t(counter_ >> 32),
                                           uint32_t(sub_ & 0xFFFFFFFFu) ^ hi_[0],
                                           uint32_t(sub_ >> 32) ^ hi_[1]};
      const auto out = Philox4x32::block(ctr, key_);
      cached_ = (uint64_t(out[2]) << 32) | out[3];
      ++counter_;
      phase_ = 1;
      return (uint64_t(out[0]) << 32) | out[1];
    }
    phase_ = 0;
    return cached_;
  }

  // Uniform on (0, 1); never returns 0 so logs are safe.
  double next_double() {
    const uint64_t bits = next_u64() >> 11;  // 53 bits
    return (double(bits) + 0.5) * 0x1.0p-53;
  }

  // Marsaglia-Tsang ziggurat, 128 layers; the slow branch is rare.
  double normal() {
    const auto& zt = ziggurat_tables();
    for (;;) {
      const uint64_t bits = next_u64();
      const int32_t hz = int32_t(uint32_t(bits));
      const uint32_t iz = uint32_t(hz) & 127u;
      if (uint32_t(std::abs(hz)) < zt.kn[iz]) return hz * zt.wn[iz];
      // edge of the layer
      double x = hz * zt.wn[iz];
      if (iz == 0) {
        // tail beyond r
        double y;
        do {
          x = -std::log(next_double()) / kZigguratR;
          y = -std::log(next_double());
        } while (y + y < x * x);
        return hz > 0 ? kZigguratR + x : -kZigguratR - x;
      }
      if (zt.fn[iz] + next_double() * (zt.fn[iz - 1] - zt.fn[iz]) <
          std::exp(-0.5 * x * x))
        return x;
    }
  }

  double exponential() { return -std::log(next_double()); }

  // Marsaglia-Tsang, with the usual boost for shape < 1.
  double gamma(double shape, double scale = 1.0) {
    if (!(shape > 0.0)) throw UnsupportedDimension("gamma: shape must be positive");
    if (shape < 1.0) {
      const double u = next_double();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_double();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  double chi_square(double dof) { return gamma(0.5 * dof, 2.0); }

  uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw UnsupportedDimension("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 12.0) {
      // inversion by sequential search
      const double L = std::exp(-mean);
      uint64_t k = 0;
      double p = next_double();
      while (p > L && k < 4096) {
        p *= next_double();
        ++k;
      }
      return k;
    }
    return poisson_ptrd(mean);
  }

 private:
  struct ZigguratTables {
    uint32_t kn[128];
    double wn[128];
    double fn[128];
  };

  static const ZigguratTables& ziggurat_tables() {
    static const ZigguratTables zt = [] {
      ZigguratTables t;
      const double m1 = 2147483648.0;
      double dn = kZigguratR, tn = kZigguratR;
      const double vn = 9.91256303526217e-3;
      const double q = vn / std::exp(-0.5 * dn * dn);
      t.kn[0] = uint32_t((dn / q) * m1);
      t.kn[1] = 0;
      t.wn[0] = q / m1;
      t.wn[127] = dn / m1;
      t.fn[0] = 1.0;
      t.fn[127] = std::exp(-0.5 * dn * dn);
      for (int i = 126; i >= 1; --i) {
        dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
        t.kn[i + 1] = uint32_t((dn / tn) * m1);
        tn = dn;
        t.fn[i] = std::exp(-0.5 * dn * dn);
        t.wn[i] = dn / m1;
      }
      return t;
    }();
    return zt;
  }

  // Hormann's PTRD transformed-rejection sampler for mean >= ~10.
  uint64_t poisson_ptrd(double mu) {
    const double smu = std::sqrt(mu);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = next_double() - 0.5;
      const double v = next_double();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
      if (kf < 0.0) continue;
      if (us >= 0.07 && v <= v_r) return uint64_t(kf);
      if (us < 0.013 && v > us) continue;
      const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      const double rhs = kf * std::log(mu) - mu - std::lgamma(kf + 1.0);
      if (lhs <= rhs) return uint64_t(kf);
    }
  }

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 2> hi_;
  uint64_t sub_ = 0;
  uint64_t counter_ = 0;
  uint64_t cached_ = 0;
  int phase_ = 0;
};

}  // namespace sdelab
