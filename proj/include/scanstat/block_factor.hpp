#pragma once

// Block-factor transform of an i.i.d. source lattice. Each derived value is a
// fixed function of the c2 x c1 window of source values around it.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "scanstat/errors.hpp"
#include "scanstat/field.hpp"

namespace scanstat {

struct LatticeGeometry {
  std::size_t source_cols = 1;  // N~1
  std::size_t source_rows = 1;  // N~2
  std::size_t x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  std::size_t c1() const noexcept { return x1 + x2 + 1; }
  std::size_t c2() const noexcept { return y1 + y2 + 1; }
  /// N1 = N~1 - c1 + 1
  std::size_t derived_cols() const noexcept { return source_cols - c1() + 1; }
  /// N2 = N~2 - c2 + 1
  std::size_t derived_rows() const noexcept { return source_rows - c2() + 1; }

  void validate() const {
    if (source_cols < 1 || source_rows < 1) throw GeometryError("source lattice dimensions must be >= 1");
    if (x1 + x2 > source_cols - 1) throw GeometryError("x1 + x2 must not exceed source_cols - 1");
    if (y1 + y2 > source_rows - 1) throw GeometryError("y1 + y2 must not exceed source_rows - 1");
  }

  /// Same window offsets over a different source size.
  LatticeGeometry resized(std::size_t cols, std::size_t rows) const {
    LatticeGeometry g = *this;
    g.source_cols = cols;
    g.source_rows = rows;
    return g;
  }

  friend bool operator==(const LatticeGeometry&, const LatticeGeometry&) = default;
};

/// Non-owning view of the configuration matrix C_(i,j):
/// entry (k, l) = X~(i - x1 - 1 + l, j + y2 + 1 - k), 1 <= k <= c2, 1 <= l <= c1.
class ConfigurationView {
 public:
  ConfigurationView(const RandomField& source, std::size_t i, std::size_t j, std::size_t x1, std::size_t y2,
                    std::size_t c1, std::size_t c2) noexcept
      : source_(&source), col_base_(i - x1 - 1), row_base_(j + y2 + 1), c1_(c1), c2_(c2) {}

  std::size_t rows() const noexcept { return c2_; }
  std::size_t cols() const noexcept { return c1_; }

  double operator()(std::size_t k, std::size_t l) const noexcept { return (*source_)(col_base_ + l, row_base_ - k); }

 private:
  const RandomField* source_;
  std::size_t col_base_;
  std::size_t row_base_;
  std::size_t c1_;
  std::size_t c2_;
};

/// Owned c2 x c1 configuration matrix, entry (k, l) 1-based.
class ConfigurationMatrix {
 public:
  ConfigurationMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}

  explicit ConfigurationMatrix(const ConfigurationView& view) : ConfigurationMatrix(view.rows(), view.cols()) {
    for (std::size_t k = 1; k <= rows_; ++k)
      for (std::size_t l = 1; l <= cols_; ++l) (*this)(k, l) = view(k, l);
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t k, std::size_t l) noexcept { return values_[(k - 1) * cols_ + (l - 1)]; }
  double operator()(std::size_t k, std::size_t l) const noexcept { return values_[(k - 1) * cols_ + (l - 1)]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

inline ConfigurationView configuration_view(const RandomField& field, std::size_t i, std::size_t j,
                                            const LatticeGeometry& geom) {
  if (field.cols() != geom.source_cols || field.rows() != geom.source_rows) {
    throw GeometryError("field dimensions do not match the lattice geometry");
  }
  if (i < geom.x1 + 1 || i > geom.source_cols - geom.x2 || j < geom.y1 + 1 || j > geom.source_rows - geom.y2) {
    throw IndexError("configuration matrix index (" + std::to_string(i) + ", " + std::to_string(j) +
                     ") outside the admissible range");
  }
  return ConfigurationView(field, i, j, geom.x1, geom.y2, geom.c1(), geom.c2());
}

inline ConfigurationMatrix configuration_matrix(const RandomField& field, std::size_t i, std::size_t j,
                                                const LatticeGeometry& geom) {
  return ConfigurationMatrix(configuration_view(field, i, j, geom));
}

/// A deterministic function T from c2 x c1 matrices to reals.
struct BlockFactorTransform {
  std::string name;
  std::size_t c1 = 1;
  std::size_t c2 = 1;
  /// Integer-valued inputs map to integer-valued outputs.
  bool preserves_integers = false;
  std::function<double(const ConfigurationView&)> apply;

  double operator()(const ConfigurationView& c) const { return apply(c); }

  double operator()(const ConfigurationMatrix& m) const {
    // Route an owned matrix through a scratch single-window field.
    RandomField scratch(m.cols(), m.rows());
    for (std::size_t k = 1; k <= m.rows(); ++k)
      for (std::size_t l = 1; l <= m.cols(); ++l) scratch(l, m.rows() + 1 - k) = m(k, l);
    return apply(ConfigurationView(scratch, 1, 1, 0, m.rows() - 1, m.cols(), m.rows()));
  }
};

/// X(i, j) = T(C_(i + x1, j + y1)) written into `out`, resized to N1 x N2.
inline void apply_block_factor_into(const RandomField& field, const BlockFactorTransform& transform,
                                    const LatticeGeometry& geom, RandomField& out) {
  if (field.cols() != geom.source_cols || field.rows() != geom.source_rows) {
    throw GeometryError("field is " + std::to_string(field.cols()) + "x" + std::to_string(field.rows()) +
                        ", geometry expects " + std::to_string(geom.source_cols) + "x" +
                        std::to_string(geom.source_rows));
  }
  if (transform.c1 != geom.c1() || transform.c2 != geom.c2()) {
    throw GeometryError("transform '" + transform.name + "' expects a " + std::to_string(transform.c2) + "x" +
                        std::to_string(transform.c1) + " configuration window");
  }
  geom.validate();
  const std::size_t n1 = geom.derived_cols();
  const std::size_t n2 = geom.derived_rows();
  out.resize(n1, n2);
  const std::size_t c1 = geom.c1();
  const std::size_t c2 = geom.c2();
  for (std::size_t j = 1; j <= n2; ++j) {
    for (std::size_t i = 1; i <= n1; ++i) {
      out(i, j) = transform.apply(ConfigurationView(field, i + geom.x1, j + geom.y1, geom.x1, geom.y2, c1, c2));
    }
  }
}

inline RandomField apply_block_factor(const RandomField& field, const BlockFactorTransform& transform,
                                      const LatticeGeometry& geom) {
  RandomField out;
  apply_block_factor_into(field, transform, geom, out);
  out.provenance = field.provenance;
  return out;
}

inline BlockFactorTransform identity_transform() {
  return {"identity", 1, 1, true, [](const ConfigurationView& c) { return c(1, 1); }};
}

/// Number of neighbouring mines: sum of the 3x3 window minus its centre.
inline BlockFactorTransform minesweeper_transform() {
  return {"minesweeper", 3, 3, true, [](const ConfigurationView& c) {
            double s = 0.0;
            for (std::size_t k = 1; k <= 3; ++k)
              for (std::size_t l = 1; l <= 3; ++l) s += c(k, l);
            return s - c(2, 2);
          }};
}

/// MA(q) transform a1*x1 + ... + a_{q+1}*x_{q+1} over a 1 x (q+1) window.
inline BlockFactorTransform ma_transform(std::vector<double> coeffs) {
  if (coeffs.empty()) throw ParameterError("moving-average coefficients must not be empty");
  if (std::all_of(coeffs.begin(), coeffs.end(), [](double a) { return a == 0.0; })) {
    throw ParameterError("moving-average coefficient vector must not be zero");
  }
  const std::size_t c1 = coeffs.size();
  return {"ma", c1, 1, false, [a = std::move(coeffs)](const ConfigurationView& c) {
            double s = 0.0;
            for (std::size_t l = 1; l <= a.size(); ++l) s += a[l - 1] * c(1, l);
            return s;
          }};
}

/// Window offsets for the catalog transforms over a given source lattice.
inline LatticeGeometry minesweeper_geometry(std::size_t source_cols, std::size_t source_rows) {
  return {source_cols, source_rows, 1, 1, 1, 1};
}

inline LatticeGeometry identity_geometry(std::size_t source_cols, std::size_t source_rows) {
  return {source_cols, source_rows, 0, 0, 0, 0};
}

inline LatticeGeometry ma_geometry(std::size_t order, std::size_t source_cols, std::size_t source_rows = 1) {
  return {source_cols, source_rows, 0, order, 0, 0};
}

}  // namespace scanstat
