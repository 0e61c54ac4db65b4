#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "scanstat/distribution.hpp"
#include "scanstat/random.hpp"

using namespace scanstat;

namespace {

// Known-answer vectors published with Random123 (kat_vectors, philox4x32_10).
TEST(Philox, KnownAnswerVectors) {
  EXPECT_EQ(Philox4x32::encrypt({0, 0, 0, 0}, {0, 0}),
            (Philox4x32::block_type{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (Philox4x32::block_type{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::encrypt({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (Philox4x32::block_type{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, SameSeedSameStream) {
  Philox4x32 a({42, 7}), b({42, 7});
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(a(), b());
}

TEST(Philox, DiscardMatchesDraws) {
  Philox4x32 a({1, 2}), b({1, 2});
  a.discard(13);
  for (int k = 0; k < 13; ++k) b();
  EXPECT_EQ(a(), b());
}

TEST(ReplicaStream, InjectiveAcrossTasks) {
  EXPECT_NE(replica_stream(1, 0), replica_stream(2, 0));
  EXPECT_NE(replica_stream(1, 5), replica_stream(1, 6));
  EXPECT_EQ(replica_stream(3, 9), replica_stream(3, 9));
}

TEST(Generator, UniformRangeAndMean) {
  Generator g({11, 0});
  const int n = 200000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double u = g.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Generator, GaussianMoments) {
  Generator g({5, 3});
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = g.normal();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(var, 1.0, 5.0 * std::sqrt(2.0 / n));
}

double chi_square_pvalue(const std::map<std::int64_t, double>& observed, const std::map<std::int64_t, double>& expected,
                         int* dof) {
  double stat = 0.0;
  for (const auto& [k, e] : expected) {
    const auto it = observed.find(k);
    const double o = it == observed.end() ? 0.0 : it->second;
    stat += (o - e) * (o - e) / e;
  }
  *dof = static_cast<int>(expected.size()) - 1;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(*dof), stat));
}

// Poisson fit with cells pooled so every expected count is at least 5.
void check_poisson_fit(double mean, std::uint64_t seed) {
  Generator g({seed, 0});
  const int n = 100000;
  std::map<std::int64_t, double> counts;
  for (int k = 0; k < n; ++k) counts[g.poisson(mean)] += 1.0;

  std::map<std::int64_t, double> expected, observed;
  std::int64_t lo = 0;
  double pmf = std::exp(-mean), cum = 0.0, acc = 0.0, obs = 0.0;
  for (std::int64_t k = 0;; ++k) {
    if (k > 0) pmf *= mean / static_cast<double>(k);
    acc += pmf * n;
    obs += counts.count(k) ? counts[k] : 0.0;
    cum += pmf;
    if (acc >= 5.0 && (1.0 - cum) * n >= 5.0) {
      expected[lo] = acc;
      observed[lo] = obs;
      lo = k + 1;
      acc = obs = 0.0;
    } else if ((1.0 - cum) * n < 5.0) {
      double tail_obs = 0.0;
      for (const auto& [v, c] : counts)
        if (v >= lo) tail_obs += c;
      expected[lo] = acc + (1.0 - cum) * n;
      observed[lo] = tail_obs;
      break;
    }
  }
  int dof = 0;
  EXPECT_GT(chi_square_pvalue(observed, expected, &dof), 0.001) << "mean " << mean << " dof " << dof;
}

TEST(Generator, PoissonInversionGoodnessOfFit) { check_poisson_fit(3.5, 21); }

TEST(Generator, PoissonRejectionGoodnessOfFit) { check_poisson_fit(25.0, 22); }

TEST(Generator, BernoulliGoodnessOfFit) {
  Generator g({3, 1});
  const int n = 100000;
  const double p = 0.3;
  double ones = 0.0;
  for (int k = 0; k < n; ++k) ones += g.bernoulli(p) ? 1.0 : 0.0;
  int dof = 0;
  EXPECT_GT(chi_square_pvalue({{0, n - ones}, {1, ones}}, {{0, n * (1 - p)}, {1, n * p}}, &dof), 0.001);
}

TEST(Generator, BinomialMean) {
  Generator g({9, 9});
  const int n = 50000;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += static_cast<double>(g.binomial(8, 0.3));
  EXPECT_NEAR(s / n, 2.4, 5.0 * std::sqrt(8 * 0.3 * 0.7 / n));
}

TEST(Generator, DistinctStreamsUncorrelated) {
  const std::size_t side = 300;
  const auto a = generate_field(Gaussian{0.0, 1.0}, side, side, {77, 1});
  const auto b = generate_field(Gaussian{0.0, 1.0}, side, side, {77, 2});
  double sab = 0.0, sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t k = 0; k < va.size(); ++k) {
    sa += va[k];
    sb += vb[k];
    sab += va[k] * vb[k];
    saa += va[k] * va[k];
    sbb += vb[k] * vb[k];
  }
  const double n = static_cast<double>(va.size());
  const double cov = sab / n - sa / n * sb / n;
  const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  EXPECT_LT(std::fabs(corr), 4.0 / std::sqrt(n));
}

}  // namespace
