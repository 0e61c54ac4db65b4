#pragma once

// Counter-based random numbers. Every replica of every Monte Carlo task gets
// its own Philox4x32-10 stream, so results never depend on how replicas are
// split across worker threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "scanstat/errors.hpp"

namespace scanstat {

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Task-local replica numbering is injective up to 2^40 replicas per task.
inline constexpr std::uint64_t kMaxReplicasPerTask = std::uint64_t{1} << 40;

constexpr std::uint64_t replica_stream(std::uint64_t task, std::uint64_t replica) {
  return (task << 40) ^ (replica & (kMaxReplicasPerTask - 1));
}

/// Philox4x32 with 10 rounds (Salmon et al., Random123). Key = master seed,
/// counter = (block index, stream id).
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using block_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  Philox4x32() : Philox4x32(SeedSpec{}) {}

  explicit Philox4x32(SeedSpec seed)
      : key_{static_cast<std::uint32_t>(seed.master_seed),
             static_cast<std::uint32_t>(seed.master_seed >> 32)},
        stream_(seed.stream_id) {}

  static block_type encrypt(block_type ctr, key_type key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  result_type operator()() {
    if (index_ == 4) refill();
    return buffer_[index_++];
  }

  void discard(std::uint64_t n) {
    for (; n > 0; --n) (*this)();
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  void refill() {
    const block_type ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    buffer_ = encrypt(ctr, key_);
    ++block_;
    index_ = 0;
  }

  key_type key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  block_type buffer_{};
  int index_ = 4;
};

/// Variate generation on top of one Philox stream.
class Generator {
 public:
  explicit Generator(SeedSpec seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    const std::uint32_t a = engine_() >> 5;
    const std::uint32_t b = engine_() >> 6;
    return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::int64_t binomial(std::int64_t trials, double p) {
    std::int64_t k = 0;
    for (std::int64_t t = 0; t < trials; ++t) k += bernoulli(p) ? 1 : 0;
    return k;
  }

  /// Inversion for small means, Hormann's PTRS transformed rejection above 10.
  std::int64_t poisson(double mean) {
    if (mean <= 10.0) return poisson_inversion(mean);
    return poisson_ptrs(mean);
  }

  /// Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Philox4x32& engine() { return engine_; }

 private:
  std::int64_t poisson_inversion(double mean) {
    const double u = uniform();
    double term = std::exp(-mean);
    double cdf = term;
    std::int64_t k = 0;
    // The tail beyond k = 200 has probability below 1e-150 for mean <= 10.
    while (u >= cdf && k < 200) {
      ++k;
      term *= mean / static_cast<double>(k);
      cdf += term;
    }
    return k;
  }

  std::int64_t poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
      if (us >= 0.07 && v <= vr) return k;
      if (k < 0 || (us < 0.013 && v > us)) continue;
      const double kd = static_cast<double>(k);
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          -mean + kd * loglam - std::lgamma(kd + 1.0)) {
        return k;
      }
    }
  }

  Philox4x32 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scanstat
