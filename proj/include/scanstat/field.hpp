#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scanstat/errors.hpp"
#include "scanstat/random.hpp"

namespace scanstat {

struct Provenance {
  std::string distribution;  // human-readable, e.g. "bernoulli(p=0.1)"
  SeedSpec seed;
  std::uint64_t replica = 0;
};

/// Dense lattice indexed (i, j) with 1 <= i <= cols (column) and
/// 1 <= j <= rows (row). Storage is row-major over (j, i), so one row of the
/// lattice is contiguous.
template <typename T>
class Field {
 public:
  using value_type = T;

  Field() = default;

  Field(std::size_t cols, std::size_t rows, T fill = T{}) : cols_(cols), rows_(rows), values_(cols * rows, fill) {
    if (cols == 0 || rows == 0) throw GeometryError("field dimensions must be >= 1");
  }

  std::size_t cols() const noexcept { return cols_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Unchecked 1-based access.
  T& operator()(std::size_t i, std::size_t j) noexcept { return values_[(j - 1) * cols_ + (i - 1)]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return values_[(j - 1) * cols_ + (i - 1)]; }

  const T& at(std::size_t i, std::size_t j) const {
    check(i, j);
    return (*this)(i, j);
  }
  T& at(std::size_t i, std::size_t j) {
    check(i, j);
    return (*this)(i, j);
  }

  /// Row j (1-based) as a contiguous span over i = 1..cols.
  std::span<const T> row(std::size_t j) const { return {values_.data() + (j - 1) * cols_, cols_}; }
  std::span<T> row(std::size_t j) { return {values_.data() + (j - 1) * cols_, cols_}; }

  std::span<const T> values() const noexcept { return values_; }
  std::span<T> values() noexcept { return values_; }

  /// Reshape without preserving contents; reuses the allocation when possible.
  void resize(std::size_t cols, std::size_t rows) {
    if (cols == 0 || rows == 0) throw GeometryError("field dimensions must be >= 1");
    cols_ = cols;
    rows_ = rows;
    values_.resize(cols * rows);
  }

  Provenance provenance;

  friend bool operator==(const Field& a, const Field& b) {
    return a.cols_ == b.cols_ && a.rows_ == b.rows_ && a.values_ == b.values_;
  }

 private:
  void check(std::size_t i, std::size_t j) const {
    if (i < 1 || i > cols_ || j < 1 || j > rows_) {
      throw IndexError("field index (" + std::to_string(i) + ", " + std::to_string(j) + ") outside " +
                       std::to_string(cols_) + "x" + std::to_string(rows_));
    }
  }

  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
  std::vector<T> values_;
};

using RandomField = Field<double>;

/// True when every entry is an exact integer; such fields are scanned with
/// integer accumulation.
inline bool is_integral(const RandomField& field) {
  for (double v : field.values()) {
    if (v != std::floor(v) || std::fabs(v) > 9.0e15) return false;
  }
  return true;
}

inline void to_integer_field(const RandomField& field, Field<std::int64_t>& out) {
  out.resize(field.cols(), field.rows());
  auto src = field.values();
  auto dst = out.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = static_cast<std::int64_t>(src[k]);
}

}  // namespace scanstat
