#pragma once

// Extreme-value approximation for maxima of stationary 1-dependent sequences:
// q_m ~ H(q1, q2, m) with the explicit error bound m * F(alpha, m) * (1 - q1)^2,
// valid whenever q1 >= 1 - alpha >= 0.9.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>

#include "scanstat/errors.hpp"

namespace scanstat {

inline constexpr double kMaxAlpha = 0.1;

enum class LSelection { boundary, optimize };

inline const char* to_string(LSelection mode) { return mode == LSelection::boundary ? "boundary" : "optimize"; }

struct Theorem1Constants {
  double alpha = 0.0;
  double t2 = 0.0;
  double l = 0.0;
  double eta = 0.0;
  double K = 0.0;
  double L = 0.0;
  double E = 0.0;
  double Gamma = 0.0;
};

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= kMaxAlpha)) {
    throw DomainError("alpha = " + std::to_string(alpha) + " outside (0, 0.1]");
  }
}

/// The three real roots of alpha*t^3 - t + 1 = 0 in increasing order
/// (one negative, two positive for 0 < alpha < 4/27).
inline std::array<double, 3> cubic_roots(double alpha) {
  check_alpha(alpha);
  // Depressed form t^3 + p t + q = 0 with p = -1/alpha, q = 1/alpha.
  const double p = -1.0 / alpha;
  const double q = 1.0 / alpha;
  const double r = 2.0 * std::sqrt(-p / 3.0);
  const double phi = std::acos(std::clamp(1.5 * q / p * std::sqrt(-3.0 / p), -1.0, 1.0)) / 3.0;
  std::array<double, 3> roots{};
  for (int k = 0; k < 3; ++k) roots[k] = r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0);

  const auto f = [alpha](double t) { return alpha * t * t * t - t + 1.0; };
  const auto df = [alpha](double t) { return 3.0 * alpha * t * t - 1.0; };
  for (double& t : roots) {
    for (int it = 0; it < 4; ++it) {
      const double next = t - f(t) / df(t);
      if (!(std::fabs(f(next)) < std::fabs(f(t)))) break;
      t = next;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// t2(alpha): the middle root of alpha*t^3 - t + 1 = 0, i.e. the smallest
/// positive root. It tends to 1 as alpha -> 0 and is about 1.1535 at 0.1.
inline double solve_t2(double alpha) { return cubic_roots(alpha)[1]; }

/// Constants K, L, E, Gamma for an explicit choice of l (> t2^3).
inline Theorem1Constants theorem1_constants(double alpha, double l) {
  check_alpha(alpha);
  Theorem1Constants c;
  c.alpha = alpha;
  c.t2 = solve_t2(alpha);
  const double t2_cubed = c.t2 * c.t2 * c.t2;
  if (!(l > t2_cubed)) throw ValidityError("l", "l must exceed t2^3 = " + std::to_string(t2_cubed));
  c.l = l;
  const double a = alpha;
  const double eta = 1.0 + l * a;
  c.eta = eta;

  const double inner = 1.0 - a * eta * eta;  // 1 - alpha (1 + l alpha)^2
  if (!(inner > 0.0)) throw ValidityError("1-alpha*eta^2", "1 - alpha*(1 + l*alpha)^2 is not positive");
  const double k_den = 1.0 - 2.0 * a * eta / (inner * inner);
  if (!(k_den > 0.0)) throw ValidityError("K denominator", "1 - 2*alpha*eta/(1 - alpha*eta^2)^2 is not positive");
  const double k_num = (11.0 - 3.0 * a) / ((1.0 - a) * (1.0 - a)) +
                       2.0 * l * (1.0 + 3.0 * a) * (2.0 + 3.0 * l * a - a * (2.0 - l * a) * eta * eta) /
                           (inner * inner * inner);
  c.K = k_num / k_den;

  const double s = 1.0 + a + 3.0 * a * a;
  const double a3 = a * a * a;
  c.L = 3.0 * c.K * s * (s + c.K * a3) + a3 * a3 * c.K * c.K * c.K + 9.0 * a * (4.0 + 3.0 * a + 3.0 * a * a) + 55.1;

  const double e_bracket = inner * inner - a * eta * eta * std::pow(1.0 + eta - 2.0 * a * eta, 2);
  if (!(e_bracket > 0.0)) throw ValidityError("E denominator", "denominator of E(alpha) is not positive");
  const double e_num = std::pow(eta, 5) * std::pow(1.0 + (1.0 - 2.0 * a) * eta, 4) * (1.0 + a * (eta - 2.0)) *
                       (1.0 + eta + (1.0 - 3.0 * a) * eta * eta);
  c.E = e_num / (2.0 * std::pow(inner, 4) * e_bracket);
  c.Gamma = c.L + c.E;
  return c;
}

/// F(alpha, m) = 1 + 3/m + [Gamma/m + K](1 - q1); requires q1 >= 1 - alpha.
inline double error_factor_F(const Theorem1Constants& c, double m, double q1) {
  if (!(m >= 1.0)) throw DomainError("m must be >= 1");
  if (!(q1 <= 1.0) || q1 < 1.0 - c.alpha) {
    throw HypothesisError("q1 = " + std::to_string(q1) + " violates q1 >= 1 - alpha = " +
                          std::to_string(1.0 - c.alpha));
  }
  return 1.0 + 3.0 / m + (c.Gamma / m + c.K) * (1.0 - q1);
}

/// Boundary choice l = t2^3 (1 + 1e-6).
inline Theorem1Constants theorem1_constants(double alpha) {
  const double t2 = solve_t2(alpha);
  return theorem1_constants(alpha, t2 * t2 * t2 * (1.0 + 1e-6));
}

/// Golden-section search for the l in (t2^3, 4 t2^3] minimising F(alpha, m).
/// Values of l where a denominator turns non-positive score +infinity.
inline Theorem1Constants theorem1_constants_optimized(double alpha, double m, double q1) {
  const double t2 = solve_t2(alpha);
  const double t2_cubed = t2 * t2 * t2;
  const auto objective = [&](double l) {
    try {
      return error_factor_F(theorem1_constants(alpha, l), m, q1);
    } catch (const ValidityError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double lo = t2_cubed * (1.0 + 1e-6);
  double hi = 4.0 * t2_cubed;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12 * t2_cubed; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  // Never return worse than the boundary choice.
  const Theorem1Constants boundary = theorem1_constants(alpha);
  const double best_l = f1 <= f2 ? x1 : x2;
  const double best_f = std::min(f1, f2);
  if (!(best_f < error_factor_F(boundary, m, q1))) return boundary;
  return theorem1_constants(alpha, best_l);
}

struct HValue {
  double value = 0.0;
  bool clamped = false;
};

/// H(q1, q2, m) = (2 q1 - q2) / [1 + q1 - q2 + 2 (q1 - q2)^2]^m, clamped to [0, 1].
inline HValue approximant_H(double q1, double q2, double m) {
  if (!(q1 >= 0.0 && q1 <= 1.0 && q2 >= 0.0 && q2 <= 1.0)) throw DomainError("H arguments must be probabilities");
  if (q2 > q1) {
    throw OrderingError("H requires q2 <= q1, got q1 = " + std::to_string(q1) + ", q2 = " + std::to_string(q2));
  }
  const double d = q1 - q2;
  const double raw = (2.0 * q1 - q2) / std::pow(1.0 + d + 2.0 * d * d, m);
  HValue h{raw, false};
  if (raw > 1.0) h = {1.0, true};
  if (raw < 0.0) h = {0.0, true};
  return h;
}

/// Right-hand side m (|x1 - x2| + |y1 - y2|) of the Lipschitz bound on H.
inline double lipschitz_gap(double x1, double y1, double x2, double y2, double m) {
  return m * (std::fabs(x1 - x2) + std::fabs(y1 - y2));
}

}  // namespace scanstat
