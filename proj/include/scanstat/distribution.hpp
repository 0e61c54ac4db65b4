#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>

#include "scanstat/errors.hpp"
#include "scanstat/field.hpp"
#include "scanstat/random.hpp"

namespace scanstat {

struct Bernoulli {
  double p = 0.5;
};

struct Binomial {
  std::int64_t trials = 1;
  double p = 0.5;
};

struct Poisson {
  double mean = 1.0;
};

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};

using MarginalDistribution = std::variant<Bernoulli, Binomial, Poisson, Gaussian>;

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(std::string(name) + " must lie in [0, 1]");
}
}  // namespace detail

inline void validate(const MarginalDistribution& dist) {
  std::visit(detail::overloaded{
                 [](const Bernoulli& d) { detail::require_probability(d.p, "bernoulli p"); },
                 [](const Binomial& d) {
                   if (d.trials < 1) throw ParameterError("binomial trials must be >= 1");
                   detail::require_probability(d.p, "binomial p");
                 },
                 [](const Poisson& d) {
                   if (!(d.mean > 0.0) || !std::isfinite(d.mean)) throw ParameterError("poisson mean must be > 0");
                 },
                 [](const Gaussian& d) {
                   if (!std::isfinite(d.mean)) throw ParameterError("gaussian mean must be finite");
                   if (!(d.variance > 0.0) || !std::isfinite(d.variance)) {
                     throw ParameterError("gaussian variance must be > 0");
                   }
                 },
             },
             dist);
}

inline bool is_integer_valued(const MarginalDistribution& dist) { return !std::holds_alternative<Gaussian>(dist); }

inline std::string describe(const MarginalDistribution& dist) {
  std::ostringstream os;
  os.precision(17);
  std::visit(detail::overloaded{
                 [&](const Bernoulli& d) { os << "bernoulli(p=" << d.p << ")"; },
                 [&](const Binomial& d) { os << "binomial(trials=" << d.trials << ",p=" << d.p << ")"; },
                 [&](const Poisson& d) { os << "poisson(mean=" << d.mean << ")"; },
                 [&](const Gaussian& d) { os << "gaussian(mean=" << d.mean << ",variance=" << d.variance << ")"; },
             },
             dist);
  return os.str();
}

/// Fills `out` (already sized) with i.i.d. draws, consuming `gen` in storage order.
inline void fill_iid(const MarginalDistribution& dist, Generator& gen, RandomField& out) {
  auto values = out.values();
  std::visit(detail::overloaded{
                 [&](const Bernoulli& d) {
                   for (double& v : values) v = gen.bernoulli(d.p) ? 1.0 : 0.0;
                 },
                 [&](const Binomial& d) {
                   for (double& v : values) v = static_cast<double>(gen.binomial(d.trials, d.p));
                 },
                 [&](const Poisson& d) {
                   for (double& v : values) v = static_cast<double>(gen.poisson(d.mean));
                 },
                 [&](const Gaussian& d) {
                   const double sd = std::sqrt(d.variance);
                   for (double& v : values) v = d.mean + sd * gen.normal();
                 },
             },
             dist);
}

/// Source lattice of i.i.d. draws; a pure function of (dist, dims, seed).
inline RandomField generate_field(const MarginalDistribution& dist, std::size_t cols, std::size_t rows,
                                  SeedSpec seed) {
  validate(dist);
  RandomField field(cols, rows);
  Generator gen(seed);
  fill_iid(dist, gen, field);
  field.provenance = Provenance{describe(dist), seed, seed.stream_id};
  return field;
}

}  // namespace scanstat
