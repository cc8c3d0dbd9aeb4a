#pragma once

#include <Eigen/Dense>

#include "qd/errors.hpp"

namespace qd::ocsolve {

// Uniform midpoint grid on [0, upper]: n cells of width h = upper/n with
// nodes at cell centers.  Cell j covers [j h, (j+1) h].
struct Grid {
  double upper = 1.0;
  int n = 1;

  static Grid make(double upper, int n) {
    if (!(upper > 0.0)) throw DomainError("grid: upper bound must be positive");
    if (n < 2 || n > 200000) throw DomainError("grid: cell count out of range");
    return Grid{upper, n};
  }

  double h() const { return upper / n; }
  double node(int j) const { return (j + 0.5) * h(); }
  double edge(int j) const { return j * h(); }

  // Cell containing x, clamped to the grid.
  int cell(double x) const {
    int j = static_cast<int>(x / h());
    if (j < 0) return 0;
    if (j >= n) return n - 1;
    return j;
  }

  bool operator==(const Grid& o) const { return upper == o.upper && n == o.n; }
};

// Piecewise-constant function on a midpoint grid.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Grid g, Eigen::VectorXd values)
      : grid_(g), values_(std::move(values)) {
    if (values_.size() != g.n)
      throw DomainError("grid function: value count does not match the grid");
  }

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }

  double operator()(double x) const { return values_[grid_.cell(x)]; }

  double integral() const { return values_.sum() * grid_.h(); }

 private:
  Grid grid_{};
  Eigen::VectorXd values_;
};

}  // namespace qd::ocsolve
