#pragma once

#include <Eigen/Dense>

#include "qd/grid.hpp"
#include "qd/models.hpp"

namespace qd::ocsolve {

// Discretization order for the transition kernel.
enum class Scheme {
  // Exact cell masses against piecewise-constant functions.
  Midpoint,
  // Cell masses plus first-moment correction against a piecewise-linear
  // reconstruction (central-difference slopes).  Sharpens accuracy when
  // the kernel is much narrower than the grid spacing.
  Linear,
};

// Transition kernel of a detection statistic on [0, upper]:
//
//   (K u)(x) = E[ u( xi(x) lr(X) ) ; xi(x) lr(X) <= upper ]
//            = int_0^upper u(y) lr_pdf( y/xi(x) ) / xi(x) dy
//
// with xi(x) = (1+x)/(1-p) and X drawn from the chosen regime.  The
// discrete form uses exact per-cell transition masses
//
//   m_ij = P( xi(x_i) lr(X) in cell j ),
//
// computed from the lr cdf, so each row is sub-stochastic by construction
// no matter how sharply the kernel concentrates.  Under Scheme::Linear a
// first-moment matrix turns the row into a quadrature rule that is exact
// for functions that are linear on each cell.
class Kernel {
 public:
  Kernel(const models::Model& model, models::Regime regime, Grid grid,
         double one_minus_p = 1.0, Scheme scheme = Scheme::Linear);

  const Grid& grid() const { return grid_; }
  Scheme scheme() const { return scheme_; }
  models::Regime regime() const { return regime_; }
  double one_minus_p() const { return omp_; }

  double xi(double x) const { return (1.0 + x) / omp_; }

  // Pointwise kernel density lr_pdf(y/xi(x)) / xi(x) (diagnostics only;
  // the discretization never integrates this numerically).
  double density(double x, double y) const;

  // Effective matrix applied to node values (mass + moment correction).
  const Eigen::MatrixXd& matrix() const { return effective_; }

  // Quadrature row for an arbitrary start point, reusable across many
  // right-hand vectors (delay profiles apply it once per change point).
  struct CollocationRow {
    Eigen::VectorXd mass;
    Eigen::VectorXd moment;  // empty under Scheme::Midpoint
    Grid grid;

    double dot(const Eigen::VectorXd& u) const {
      double out = mass.dot(u);
      if (moment.size() > 0) out += moment.dot(Kernel::slopes(grid, u));
      return out;
    }
  };
  CollocationRow collocation_row(double x) const;

  // (K u)(x) for an arbitrary in-domain point x, consistent with the
  // scheme used on the grid.
  double apply_at(double x, const Eigen::VectorXd& u) const;

  // Largest row sum of the mass matrix (must be <= 1; diagnostics).
  double max_row_sum() const { return max_row_sum_; }

  // Central-difference slopes of node values (the reconstruction used by
  // Scheme::Linear); exposed for tests.
  static Eigen::VectorXd slopes(const Grid& g, const Eigen::VectorXd& u);

 private:
  void fill_row(double x, Eigen::VectorXd& mass, Eigen::VectorXd* moment) const;

  const models::Model* model_;
  models::Regime regime_;
  Grid grid_;
  double omp_;
  Scheme scheme_;
  Eigen::MatrixXd effective_;
  double max_row_sum_ = 0.0;
};

}  // namespace qd::ocsolve
