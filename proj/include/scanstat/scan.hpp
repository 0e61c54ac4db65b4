#pragma once

// Moving-window sums and scan maxima through a 2D prefix-sum table.
// Integer lattices accumulate exactly in int64; floating-point lattices keep
// the prefix table in double-double so window sums do not lose digits to
// cancellation.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "scanstat/errors.hpp"
#include "scanstat/field.hpp"

namespace scanstat {

template <typename T>
using sum_type_t = std::conditional_t<std::is_integral_v<T>, std::int64_t, double>;

template <typename T>
using MovingSums = Field<sum_type_t<T>>;

namespace detail {

struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

inline DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DoubleDouble add(DoubleDouble a, DoubleDouble b) {
  DoubleDouble s = two_sum(a.hi, b.hi);
  const DoubleDouble t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return two_sum(s.hi, s.lo);
}

inline DoubleDouble negate(DoubleDouble a) { return {-a.hi, -a.lo}; }

template <typename T>
using prefix_cell_t = std::conditional_t<std::is_integral_v<T>, std::int64_t, DoubleDouble>;

}  // namespace detail

/// Reusable prefix table. P(i, j) holds the sum of X over [1, i] x [1, j];
/// row and column 0 are zero.
template <typename T>
class PrefixTable {
 public:
  using cell = detail::prefix_cell_t<T>;

  void build(const Field<T>& field) {
    cols_ = field.cols();
    rows_ = field.rows();
    const std::size_t stride = cols_ + 1;
    table_.assign(stride * (rows_ + 1), cell{});
    for (std::size_t j = 1; j <= rows_; ++j) {
      cell running{};
      const auto row = field.row(j);
      for (std::size_t i = 1; i <= cols_; ++i) {
        if constexpr (std::is_integral_v<T>) {
          running += static_cast<std::int64_t>(row[i - 1]);
          table_[j * stride + i] = table_[(j - 1) * stride + i] + running;
        } else {
          running = detail::add(running, detail::DoubleDouble{static_cast<double>(row[i - 1]), 0.0});
          table_[j * stride + i] = detail::add(table_[(j - 1) * stride + i], running);
        }
      }
    }
  }

  /// Sum of the m1 x m2 block anchored at (i1, i2).
  sum_type_t<T> window(std::size_t i1, std::size_t i2, std::size_t m1, std::size_t m2) const noexcept {
    const std::size_t stride = cols_ + 1;
    const cell& a = table_[(i2 + m2 - 1) * stride + (i1 + m1 - 1)];
    const cell& b = table_[(i2 - 1) * stride + (i1 + m1 - 1)];
    const cell& c = table_[(i2 + m2 - 1) * stride + (i1 - 1)];
    const cell& d = table_[(i2 - 1) * stride + (i1 - 1)];
    if constexpr (std::is_integral_v<T>) {
      return a - b - c + d;
    } else {
      using detail::add;
      using detail::negate;
      const auto s = add(add(a, negate(b)), add(d, negate(c)));
      return s.hi + s.lo;
    }
  }

 private:
  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
  std::vector<cell> table_;
};

inline void check_window(std::size_t cols, std::size_t rows, std::size_t m1, std::size_t m2) {
  if (m1 < 1 || m2 < 1) throw GeometryError("window sides must be >= 1");
  if (m1 > cols || m2 > rows) {
    throw GeometryError("window " + std::to_string(m1) + "x" + std::to_string(m2) + " does not fit in a " +
                        std::to_string(cols) + "x" + std::to_string(rows) + " field");
  }
}

/// Y(i1, i2) for 1 <= i1 <= N1 - m1 + 1, 1 <= i2 <= N2 - m2 + 1.
template <typename T>
void moving_sums_into(const Field<T>& field, std::size_t m1, std::size_t m2, PrefixTable<T>& prefix,
                      MovingSums<T>& out) {
  check_window(field.cols(), field.rows(), m1, m2);
  prefix.build(field);
  const std::size_t a1 = field.cols() - m1 + 1;
  const std::size_t a2 = field.rows() - m2 + 1;
  out.resize(a1, a2);
  for (std::size_t i2 = 1; i2 <= a2; ++i2)
    for (std::size_t i1 = 1; i1 <= a1; ++i1) out(i1, i2) = prefix.window(i1, i2, m1, m2);
}

template <typename T>
MovingSums<T> moving_sums(const Field<T>& field, std::size_t m1, std::size_t m2) {
  PrefixTable<T> prefix;
  MovingSums<T> out;
  moving_sums_into(field, m1, m2, prefix, out);
  return out;
}

/// Maximum of Y over anchors [1, i1_max] x [1, i2_max].
template <typename S>
S max_over_anchors(const Field<S>& sums, std::size_t i1_max, std::size_t i2_max) {
  if (i1_max < 1 || i2_max < 1 || i1_max > sums.cols() || i2_max > sums.rows()) {
    throw GeometryError("anchor range " + std::to_string(i1_max) + "x" + std::to_string(i2_max) +
                        " exceeds the available " + std::to_string(sums.cols()) + "x" +
                        std::to_string(sums.rows()) + " anchors");
  }
  S best = std::numeric_limits<S>::lowest();
  for (std::size_t i2 = 1; i2 <= i2_max; ++i2) {
    const auto row = sums.row(i2);
    best = std::max(best, *std::max_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(i1_max)));
  }
  return best;
}

/// S = max Y over every anchor.
template <typename T>
sum_type_t<T> scan_statistic(const Field<T>& field, std::size_t m1, std::size_t m2) {
  const auto sums = moving_sums(field, m1, m2);
  return max_over_anchors(sums, sums.cols(), sums.rows());
}

template <typename T>
sum_type_t<T> sub_rectangle_scan_max(const Field<T>& field, std::size_t m1, std::size_t m2, std::size_t i1_max,
                                     std::size_t i2_max) {
  const auto sums = moving_sums(field, m1, m2);
  return max_over_anchors(sums, i1_max, i2_max);
}

/// max over i1 of the length-m1 moving sums along row k (the m2 = 1 scan).
template <typename T>
sum_type_t<T> row_scan_max(const Field<T>& field, std::size_t m1, std::size_t k) {
  if (k < 1 || k > field.rows()) {
    throw IndexError("row " + std::to_string(k) + " outside 1.." + std::to_string(field.rows()));
  }
  check_window(field.cols(), 1, m1, 1);
  Field<T> single(field.cols(), 1);
  std::copy(field.row(k).begin(), field.row(k).end(), single.row(1).begin());
  return scan_statistic(single, m1, 1);
}

}  // namespace scanstat
