#include <gtest/gtest.h>

#include <cmath>

#include "scanstat/distribution.hpp"
#include "scanstat/field.hpp"

using namespace scanstat;

namespace {

TEST(Field, IndexConventionColumnFirst) {
  Field<int> f(3, 2);
  f(3, 1) = 7;  // column 3, row 1
  EXPECT_EQ(f.row(1)[2], 7);
  EXPECT_EQ(f.at(3, 1), 7);
  EXPECT_THROW(f.at(4, 1), IndexError);
  EXPECT_THROW(f.at(1, 3), IndexError);
  EXPECT_THROW(Field<int>(0, 4), GeometryError);
}

TEST(GenerateField, DegenerateBernoulli) {
  const auto zeros = generate_field(Bernoulli{0.0}, 4, 4, {1, 0});
  const auto ones = generate_field(Bernoulli{1.0}, 4, 4, {1, 0});
  for (double v : zeros.values()) EXPECT_EQ(v, 0.0);
  for (double v : ones.values()) EXPECT_EQ(v, 1.0);
}

TEST(GenerateField, BernoulliHalfSampleMean) {
  const auto f = generate_field(Bernoulli{0.5}, 1000, 100, {2024, 5});
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  EXPECT_NEAR(sum / 1e5, 0.5, 3.0 * std::sqrt(0.25 / 1e5));
}

TEST(GenerateField, Deterministic) {
  const auto a = generate_field(Poisson{4.0}, 17, 9, {99, 3});
  const auto b = generate_field(Poisson{4.0}, 17, 9, {99, 3});
  const auto c = generate_field(Poisson{4.0}, 17, 9, {99, 4});
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == c);
  EXPECT_EQ(a.provenance.distribution, "poisson(mean=4)");
}

TEST(GenerateField, ParameterDomain) {
  EXPECT_THROW(generate_field(Bernoulli{1.5}, 2, 2, {}), ParameterError);
  EXPECT_THROW(generate_field(Binomial{0, 0.5}, 2, 2, {}), ParameterError);
  EXPECT_THROW(generate_field(Poisson{0.0}, 2, 2, {}), ParameterError);
  EXPECT_THROW(generate_field(Gaussian{0.0, -1.0}, 2, 2, {}), ParameterError);
  EXPECT_THROW(generate_field(Bernoulli{0.5}, 0, 2, {}), GeometryError);
}

TEST(GenerateField, EntriesFiniteAndIntegral) {
  const auto g = generate_field(Gaussian{1.0, 2.0}, 20, 20, {4, 4});
  for (double v : g.values()) EXPECT_TRUE(std::isfinite(v));
  EXPECT_FALSE(is_integral(g));
  EXPECT_TRUE(is_integral(generate_field(Binomial{8, 0.3}, 20, 20, {4, 4})));
}

}  // namespace
