#pragma once

// Two-step approximation of P(S <= n) for the scan statistic over a
// block-factor field, with its error ledger.
//
// The scan region is cut into slabs of A_s = m_s + c_s - 2 anchors along each
// axis; the slab maxima form 1-dependent stationary sequences, so the
// extreme-value approximant is applied once along each axis. Its inputs
// Q_uv = P(max of Y over (u-1)A1 x (v-1)A2 anchors <= n), u, v in {2, 3},
// are estimated by Monte Carlo.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scanstat/block_factor.hpp"
#include "scanstat/distribution.hpp"
#include "scanstat/errors.hpp"
#include "scanstat/field.hpp"
#include "scanstat/haiman.hpp"
#include "scanstat/parallel.hpp"
#include "scanstat/random.hpp"
#include "scanstat/scan.hpp"

namespace scanstat {

/// Monte Carlo task identifiers; replica r of task t draws from stream replica_stream(t, r).
enum class Task : std::uint64_t { estimate_quv = 1, simulate = 2 };

/// Smallest alpha handed to the constants. A larger alpha only weakens the
/// hypothesis q1 >= 1 - alpha, so flooring keeps the bound valid when an
/// estimate is exactly 1.
inline constexpr double kAlphaFloor = 1e-9;

struct ExperimentSpec {
  LatticeGeometry geometry;
  std::size_t m1 = 2;
  std::size_t m2 = 2;
  MarginalDistribution distribution = Bernoulli{0.5};
  BlockFactorTransform transform = identity_transform();
  std::vector<double> thresholds;
  std::uint64_t iterations = 100000;  // ITER for the Q_uv estimates
  double z = 1.96;
  std::uint64_t seed = 0;
  LSelection l_mode = LSelection::boundary;
  unsigned threads = 1;
};

/// m2 = c2 = 1: rows are independent and the scan runs along rows only.
inline bool independent_rows(const ExperimentSpec& spec) { return spec.m2 == 1 && spec.geometry.c2() == 1; }

inline bool integer_scan(const ExperimentSpec& spec) {
  return is_integer_valued(spec.distribution) && spec.transform.preserves_integers;
}

/// Slab widths A_s = m_s + c_s - 2 (A2 = 0 for independent rows).
inline std::pair<std::size_t, std::size_t> slab_widths(const ExperimentSpec& spec) {
  return {spec.m1 + spec.geometry.c1() - 2, spec.m2 + spec.geometry.c2() - 2};
}

inline void validate(const ExperimentSpec& spec) {
  validate(spec.distribution);
  spec.geometry.validate();
  if (spec.transform.c1 != spec.geometry.c1() || spec.transform.c2 != spec.geometry.c2()) {
    throw GeometryError("transform window does not match the lattice geometry");
  }
  if (spec.m1 < 2) throw GeometryError("m1 must be >= 2");
  if (spec.m2 < 2 && !independent_rows(spec)) throw GeometryError("m2 must be >= 2 unless m2 = c2 = 1");
  check_window(spec.geometry.derived_cols(), spec.geometry.derived_rows(), spec.m1, spec.m2);
  if (!(spec.z > 0.0)) throw ParameterError("confidence multiplier z must be > 0");
  if (spec.iterations < 1) throw ParameterError("iterations must be >= 1");
  const auto [a1, a2] = slab_widths(spec);
  if (spec.geometry.source_cols / a1 < 2) throw GeometryError("source_cols must span at least two slabs");
  if (!independent_rows(spec) && spec.geometry.source_rows / a2 < 2) {
    throw GeometryError("source_rows must span at least two slabs");
  }
}

/// Source lattice u A1 x v A2 that holds every window of the Q_uv event.
inline std::pair<std::size_t, std::size_t> quv_field_dims(int u, int v, const LatticeGeometry& geometry,
                                                          std::size_t m1, std::size_t m2) {
  if (u < 2 || u > 3 || v < 2 || v > 3) throw ParameterError("u and v must be 2 or 3");
  const std::size_t a1 = m1 + geometry.c1() - 2;
  if (m2 == 1 && geometry.c2() == 1) return {static_cast<std::size_t>(u) * a1, 1};
  const std::size_t a2 = m2 + geometry.c2() - 2;
  return {static_cast<std::size_t>(u) * a1, static_cast<std::size_t>(v) * a2};
}

struct EstimateRecord {
  double n = 0.0;
  /// q[u - 2][v - 2]; with independent rows the v index is irrelevant and
  /// both columns hold the single-row estimate.
  std::array<std::array<double, 2>, 2> q{};
  std::array<std::array<double, 2>, 2> beta{};
  std::uint64_t iterations = 0;
  bool independent_rows = false;

  double Q(int u, int v) const { return q[u - 2][v - 2]; }
  double Beta(int u, int v) const { return beta[u - 2][v - 2]; }
};

inline double binomial_half_width(double p, std::uint64_t n, double z) {
  return z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

struct ApproxRow {
  double n = 0.0;
  double q2 = 0.0;  // assembled Q2 (R2)
  double q3 = 0.0;  // assembled Q3 (R3)
  double approx = 0.0;
  double e_app = 0.0;
  double e_sf = 0.0;
  double e_sapp = 0.0;
  double e_interp = 0.0;  // bracket width, non-zero only on the interpolation path
  double e_total = 0.0;
  /// Interpolation brackets: approximations at the larger (M) and smaller (T)
  /// sizes. Equal to approx on the exact path.
  double bracket_lower = 0.0;
  double bracket_upper = 0.0;
  bool valid = false;
  bool clamped = false;
  bool alpha1_conservative = false;
  double alpha1 = std::numeric_limits<double>::quiet_NaN();
  double alpha2 = std::numeric_limits<double>::quiet_NaN();
  std::optional<Theorem1Constants> constants1;  // at alpha1 (outer step)
  std::optional<Theorem1Constants> constants2;  // at alpha2 (inner step)
};

namespace detail {

/// Workspace for generating one replica and scanning it.
class ScanEvaluator {
 public:
  ScanEvaluator(const ExperimentSpec& spec, std::size_t source_cols, std::size_t source_rows)
      : spec_(&spec),
        geometry_(spec.geometry.resized(source_cols, source_rows)),
        integer_(integer_scan(spec)),
        source_(source_cols, source_rows) {}

  void run(SeedSpec seed) {
    Generator gen(seed);
    fill_iid(spec_->distribution, gen, source_);
    apply_block_factor_into(source_, spec_->transform, geometry_, derived_);
    if (integer_) {
      to_integer_field(derived_, derived_int_);
      moving_sums_into(derived_int_, spec_->m1, spec_->m2, prefix_int_, sums_int_);
    } else {
      moving_sums_into(derived_, spec_->m1, spec_->m2, prefix_real_, sums_real_);
    }
  }

  double max_over(std::size_t i1_max, std::size_t i2_max) const {
    if (integer_) return static_cast<double>(max_over_anchors(sums_int_, i1_max, i2_max));
    return max_over_anchors(sums_real_, i1_max, i2_max);
  }

  std::size_t anchor_cols() const { return integer_ ? sums_int_.cols() : sums_real_.cols(); }
  std::size_t anchor_rows() const { return integer_ ? sums_int_.rows() : sums_real_.rows(); }

 private:
  const ExperimentSpec* spec_;
  LatticeGeometry geometry_;
  bool integer_;
  RandomField source_;
  RandomField derived_;
  Field<std::int64_t> derived_int_;
  PrefixTable<std::int64_t> prefix_int_;
  MovingSums<std::int64_t> sums_int_;
  PrefixTable<double> prefix_real_;
  MovingSums<double> sums_real_;
};

struct CountTally {
  std::vector<std::uint64_t> counts;
  void merge(const CountTally& other) {
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
  }
};

inline void tally_le(const std::vector<double>& thresholds, double value, std::uint64_t* counts) {
  for (std::size_t t = 0; t < thresholds.size(); ++t)
    if (value <= thresholds[t]) ++counts[t];
}

}  // namespace detail

/// Monte Carlo estimates of Q22, Q23, Q32, Q33 for every threshold. One
/// (3 A1) x (3 A2) source field per replica serves all four nested events
/// and all thresholds.
inline std::vector<EstimateRecord> estimate_quv(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.iterations < 1000) throw ParameterError("iterations must be >= 1000 for Q_uv estimation");
  const auto [a1, a2] = slab_widths(spec);
  const bool rows = independent_rows(spec);
  const auto [cols, nrows] = quv_field_dims(3, 3, spec.geometry, spec.m1, spec.m2);
  const std::size_t nt = spec.thresholds.size();

  detail::CountTally init{std::vector<std::uint64_t>(4 * nt, 0)};
  const auto tally = parallel_tally(
      spec.iterations, spec.threads, init, [&, c = cols, r = nrows] { return detail::ScanEvaluator(spec, c, r); },
      [&](std::uint64_t replica, detail::CountTally& t, detail::ScanEvaluator& eval) {
        eval.run({spec.seed, replica_stream(static_cast<std::uint64_t>(Task::estimate_quv), replica)});
        for (int u = 2; u <= 3; ++u) {
          for (int v = 2; v <= 3; ++v) {
            if (rows && v == 3) continue;
            const std::size_t i1 = static_cast<std::size_t>(u - 1) * a1;
            const std::size_t i2 = rows ? 1 : static_cast<std::size_t>(v - 1) * a2;
            const double m = eval.max_over(i1, i2);
            detail::tally_le(spec.thresholds, m, t.counts.data() + ((u - 2) * 2 + (v - 2)) * nt);
          }
        }
      });

  std::vector<EstimateRecord> out(nt);
  const double iters = static_cast<double>(spec.iterations);
  for (std::size_t k = 0; k < nt; ++k) {
    EstimateRecord& rec = out[k];
    rec.n = spec.thresholds[k];
    rec.iterations = spec.iterations;
    rec.independent_rows = rows;
    for (int u = 0; u < 2; ++u) {
      for (int v = 0; v < 2; ++v) {
        const int vv = rows ? 0 : v;
        const double q = static_cast<double>(tally.counts[(u * 2 + vv) * nt + k]) / iters;
        rec.q[u][v] = q;
        rec.beta[u][v] = binomial_half_width(q, spec.iterations, spec.z);
      }
    }
  }
  return out;
}

struct ApproxOptions {
  LSelection l_mode = LSelection::boundary;
  /// Number of independent identical rows on the row-scan path.
  std::size_t independent_rows = 1;
};

namespace detail {

inline Theorem1Constants constants_for(double alpha, double m, LSelection mode) {
  const double a = std::max(alpha, kAlphaFloor);
  if (mode == LSelection::optimize) return theorem1_constants_optimized(a, m, 1.0 - a);
  return theorem1_constants(a);
}

/// Orders q_small <= q_large, tolerating MC noise up to `slack`.
inline void enforce_order(double q_large, double& q_small, double slack, bool& clamped, const char* what) {
  if (q_small <= q_large) return;
  if (q_small - q_large > slack) {
    throw OrderingError(std::string(what) + " exceeds its containing event beyond Monte Carlo slack");
  }
  q_small = q_large;
  clamped = true;
}

inline ApproxRow row_scan_approximation(const EstimateRecord& rec, double l1, const ApproxOptions& opts) {
  ApproxRow row;
  row.n = rec.n;
  const double q2 = rec.Q(2, 2);
  double q3 = rec.Q(3, 2);
  const double b2 = rec.Beta(2, 2);
  const double b3 = rec.Beta(3, 2);
  enforce_order(q2, q3, 2.0 * (b2 + b3), row.clamped, "Q3");

  const HValue h = approximant_H(q2, q3, l1);
  row.clamped = row.clamped || h.clamped;
  row.q2 = q2;
  row.q3 = q3;
  const double rows = static_cast<double>(opts.independent_rows);
  row.approx = std::pow(h.value, rows);
  row.alpha1 = 1.0 - q3;
  row.e_sf = rows * l1 * (b2 + b3);
  row.valid = row.alpha1 <= kMaxAlpha;
  if (row.valid) {
    row.constants1 = constants_for(row.alpha1, l1, opts.l_mode);
    const double f = error_factor_F(*row.constants1, l1, 1.0 - row.constants1->alpha);
    row.e_app = rows * l1 * f * (1.0 - q2) * (1.0 - q2);
    const double c = 1.0 - q2 + b2;
    row.e_sapp = rows * l1 * f * c * c;
    row.e_total = row.e_app + row.e_sf + row.e_sapp;
  } else {
    row.e_app = row.e_sapp = row.e_total = std::numeric_limits<double>::quiet_NaN();
  }
  row.bracket_lower = row.bracket_upper = row.approx;
  return row;
}

}  // namespace detail

/// Assembles P(S <= n) from one EstimateRecord for L1 x L2 slabs.
inline ApproxRow two_step_approximation(const EstimateRecord& rec, std::size_t L1, std::size_t L2,
                                        const ApproxOptions& opts = {}) {
  if (L1 < 1 || (!rec.independent_rows && L2 < 1)) throw GeometryError("L1 and L2 must be >= 1");
  const double l1 = static_cast<double>(L1);
  if (rec.independent_rows) return detail::row_scan_approximation(rec, l1, opts);
  const double l2 = static_cast<double>(L2);

  ApproxRow row;
  row.n = rec.n;
  double q22 = rec.Q(2, 2), q23 = rec.Q(2, 3), q32 = rec.Q(3, 2), q33 = rec.Q(3, 3);
  const double b22 = rec.Beta(2, 2), b23 = rec.Beta(2, 3), b32 = rec.Beta(3, 2), b33 = rec.Beta(3, 3);
  // Nested events: Q33 <= Q23 <= Q22 and Q33 <= Q32 <= Q22.
  detail::enforce_order(q22, q23, 2.0 * (b22 + b23), row.clamped, "Q23");
  detail::enforce_order(q22, q32, 2.0 * (b22 + b32), row.clamped, "Q32");
  detail::enforce_order(std::min(q23, q32), q33, 2.0 * (std::max(b23, b32) + b33), row.clamped, "Q33");

  const HValue r2 = approximant_H(q22, q32, l1);
  const HValue r3h = approximant_H(q23, q33, l1);
  double r3 = r3h.value;
  row.clamped = row.clamped || r2.clamped || r3h.clamped;
  const double sum_beta = b22 + b23 + b32 + b33;
  detail::enforce_order(r2.value, r3, l1 * sum_beta, row.clamped, "assembled Q3");
  const HValue outer = approximant_H(r2.value, r3, l2);
  row.clamped = row.clamped || outer.clamped;

  row.q2 = r2.value;
  row.q3 = r3;
  row.approx = outer.value;
  row.alpha1 = 1.0 - r3;
  row.alpha2 = 1.0 - q23;
  row.alpha1_conservative = r3 < q33;
  row.e_sf = l1 * l2 * sum_beta;
  row.valid = row.alpha1 <= kMaxAlpha && row.alpha2 <= kMaxAlpha;
  if (row.valid) {
    row.constants1 = detail::constants_for(row.alpha1, l2, opts.l_mode);
    row.constants2 = detail::constants_for(row.alpha2, l1, opts.l_mode);
    const double f2 = error_factor_F(*row.constants1, l2, 1.0 - row.constants1->alpha);
    const double f1 = error_factor_F(*row.constants2, l1, 1.0 - row.constants2->alpha);
    const double d22 = 1.0 - q22, d23 = 1.0 - q23;
    const double b2 = 1.0 - row.q2 + l1 * f1 * d22 * d22;
    row.e_app = l2 * f2 * b2 * b2 + l1 * l2 * f1 * (d22 * d22 + d23 * d23);
    const double c22 = 1.0 - q22 + b22;
    const double c23 = 1.0 - q23 + b23;
    const double c2 = 1.0 - row.q2 + l1 * (b22 + b32) + l1 * f1 * c22 * c22;
    row.e_sapp = l2 * f2 * c2 * c2 + l1 * l2 * f1 * (c22 * c22 + c23 * c23);
    row.e_total = row.e_app + row.e_sf + row.e_sapp;
  } else {
    row.e_app = row.e_sapp = row.e_total = std::numeric_limits<double>::quiet_NaN();
  }
  row.bracket_lower = row.bracket_upper = row.approx;
  return row;
}

/// Position of the source lattice relative to whole multiples of the slab width.
struct SizeBracket {
  std::size_t L = 0;     // lower bracket uses L, upper uses L + 1
  double weight = 0.0;   // fractional position of N between T (weight 0) and M (weight 1)
  bool exact = true;
};

inline SizeBracket size_bracket(std::size_t source, std::size_t slab) {
  const std::size_t units = source / slab;
  if (units < 2) throw GeometryError("lattice must span at least two slabs");
  SizeBracket b;
  b.L = units - 1;
  b.exact = source % slab == 0;
  b.weight = static_cast<double>(source % slab) / static_cast<double>(slab);
  return b;
}

/// Approximation rows for every threshold. Sizes that are whole multiples of
/// the slab width use two_step_approximation directly; other sizes interpolate
/// linearly (dimension 1, then dimension 2) between the bracketing sizes
/// T = (L+1)A - (c-1) and M = (L+2)A - (c-1), and add the bracket width to
/// the error.
inline std::vector<ApproxRow> interpolated_approximation(const ExperimentSpec& spec,
                                                         const std::vector<EstimateRecord>& records) {
  validate(spec);
  const auto [a1, a2] = slab_widths(spec);
  const bool rows = independent_rows(spec);
  const SizeBracket b1 = size_bracket(spec.geometry.source_cols, a1);
  const SizeBracket b2 = rows ? SizeBracket{1, 0.0, true} : size_bracket(spec.geometry.source_rows, a2);
  ApproxOptions opts{spec.l_mode, rows ? spec.geometry.source_rows : 1};

  std::vector<ApproxRow> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    if (b1.exact && b2.exact) {
      out.push_back(two_step_approximation(rec, b1.L, b2.L, opts));
      continue;
    }
    // corner[d1][d2]: d = 0 at size T (L), d = 1 at size M (L + 1).
    std::array<std::array<ApproxRow, 2>, 2> corner;
    for (int d1 = 0; d1 < 2; ++d1)
      for (int d2 = 0; d2 < 2; ++d2) {
        const bool need = (d1 == 0 || !b1.exact) && (d2 == 0 || !b2.exact);
        if (need) corner[d1][d2] = two_step_approximation(rec, b1.L + d1, b2.L + d2, opts);
      }
    for (int d1 = 0; d1 < 2; ++d1)
      if (b2.exact) corner[d1][1] = corner[d1][0];
    for (int d2 = 0; d2 < 2; ++d2)
      if (b1.exact) corner[1][d2] = corner[0][d2];

    const auto lerp = [](double a, double b, double w) { return a + w * (b - a); };
    ApproxRow row = corner[0][0];
    const double along1_lo = lerp(corner[0][0].approx, corner[1][0].approx, b1.weight);
    const double along1_hi = lerp(corner[0][1].approx, corner[1][1].approx, b1.weight);
    row.approx = lerp(along1_lo, along1_hi, b2.weight);
    row.bracket_upper = corner[0][0].approx;  // smallest lattice, largest CDF
    row.bracket_lower = corner[1][1].approx;
    row.valid = true;
    row.clamped = false;
    row.e_app = row.e_sf = row.e_sapp = 0.0;
    double hi = 0.0, lo = 1.0;
    for (const auto& side : corner)
      for (const auto& c : side) {
        row.valid = row.valid && c.valid;
        row.clamped = row.clamped || c.clamped;
        row.e_app = std::max(row.e_app, c.e_app);
        row.e_sf = std::max(row.e_sf, c.e_sf);
        row.e_sapp = std::max(row.e_sapp, c.e_sapp);
        hi = std::max(hi, c.approx);
        lo = std::min(lo, c.approx);
      }
    row.e_interp = hi - lo;
    if (row.valid) {
      row.e_total = row.e_app + row.e_sf + row.e_sapp + row.e_interp;
    } else {
      row.e_app = row.e_sapp = row.e_total = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(row);
  }
  return out;
}

/// Full approximation: estimate Q_uv once and assemble every threshold.
inline std::vector<ApproxRow> approximate(const ExperimentSpec& spec) {
  return interpolated_approximation(spec, estimate_quv(spec));
}

struct SimulationTable {
  std::vector<double> thresholds;
  std::vector<double> cdf;
  std::vector<double> half_width;
  std::uint64_t replicas = 0;
};

/// Direct Monte Carlo of the full-size scan statistic.
inline SimulationTable simulate_distribution(const ExperimentSpec& spec, std::uint64_t replicas) {
  validate(spec.distribution);
  spec.geometry.validate();
  check_window(spec.geometry.derived_cols(), spec.geometry.derived_rows(), spec.m1, spec.m2);
  if (replicas < 1000) throw ParameterError("replicas must be >= 1000 for direct simulation");
  const std::size_t nt = spec.thresholds.size();
  detail::CountTally init{std::vector<std::uint64_t>(nt, 0)};
  const auto tally = parallel_tally(
      replicas, spec.threads, init,
      [&] { return detail::ScanEvaluator(spec, spec.geometry.source_cols, spec.geometry.source_rows); },
      [&](std::uint64_t replica, detail::CountTally& t, detail::ScanEvaluator& eval) {
        eval.run({spec.seed, replica_stream(static_cast<std::uint64_t>(Task::simulate), replica)});
        detail::tally_le(spec.thresholds, eval.max_over(eval.anchor_cols(), eval.anchor_rows()), t.counts.data());
      });
  SimulationTable table;
  table.thresholds = spec.thresholds;
  table.replicas = replicas;
  for (std::size_t k = 0; k < nt; ++k) {
    const double p = static_cast<double>(tally.counts[k]) / static_cast<double>(replicas);
    table.cdf.push_back(p);
    table.half_width.push_back(binomial_half_width(p, replicas, spec.z));
  }
  return table;
}

/// Moments of the moving sums Y_t of an MA(q) sequence over windows of m1.
struct MaTheory {
  std::vector<double> b;  // Y_t = sum_k b_k X~_{t+k-1}, k = 1..m1+q
  double mean = 0.0;
  double variance = 0.0;
  double sigma2 = 1.0;

  /// Cov[Y_t, Y_s] as a function of |t - s|; zero from lag m1 + q on.
  double covariance(std::size_t lag) const {
    if (lag >= b.size()) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j + lag < b.size(); ++j) s += b[j] * b[j + lag];
    return s * sigma2;
  }
};

inline MaTheory ma_theory(const std::vector<double>& coeffs, std::size_t m1, double mu, double sigma2) {
  if (coeffs.empty()) throw ParameterError("moving-average coefficients must not be empty");
  const std::size_t q = coeffs.size() - 1;
  if (m1 < q) throw DomainError("moving-sum coefficients are only derived for m1 >= q");
  MaTheory t;
  t.sigma2 = sigma2;
  t.b.assign(m1 + q, 0.0);
  for (std::size_t k = 1; k <= m1 + q; ++k) {
    const std::size_t lo = k > m1 ? k - m1 + 1 : 1;
    const std::size_t hi = std::min(k, q + 1);
    for (std::size_t j = lo; j <= hi; ++j) t.b[k - 1] += coeffs[j - 1];
  }
  double sb = 0.0, sb2 = 0.0;
  for (double v : t.b) {
    sb += v;
    sb2 += v * v;
  }
  t.mean = sb * mu;
  t.variance = sb2 * sigma2;
  return t;
}

}  // namespace scanstat
