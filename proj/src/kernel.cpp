#include "qd/kernel.hpp"

#include <cmath>

#include "qd/errors.hpp"

namespace qd::ocsolve {

using models::Regime;

Kernel::Kernel(const models::Model& model, Regime regime, Grid grid,
               double one_minus_p, Scheme scheme)
    : model_(&model),
      regime_(regime),
      grid_(grid),
      omp_(one_minus_p),
      scheme_(scheme) {
  if (!(omp_ > 0.0 && omp_ <= 1.0))
    throw DomainError("kernel: 1-p must lie in (0,1]");

  const int n = grid_.n;
  const double h = grid_.h();
  effective_.resize(n, n);
  Eigen::VectorXd mass(n), moment(n);
  Eigen::VectorXd* mom = scheme_ == Scheme::Linear ? &moment : nullptr;

  for (int i = 0; i < n; ++i) {
    fill_row(grid_.node(i), mass, mom);
    double rs = mass.sum();
    if (rs > max_row_sum_) max_row_sum_ = rs;
    effective_.row(i) = mass.transpose();
    if (mom) {
      // Distribute the first-moment weights through the slope stencil:
      // slopes are (u_{k+1} - u_{k-1}) / 2h inside, one-sided at the ends.
      auto& eff = effective_;
      for (int k = 0; k < n; ++k) {
        double f = moment[k];
        if (f == 0.0) continue;
        if (k == 0) {
          eff(i, 0) -= f / h;
          eff(i, 1) += f / h;
        } else if (k == n - 1) {
          eff(i, n - 1) += f / h;
          eff(i, n - 2) -= f / h;
        } else {
          eff(i, k + 1) += f / (2.0 * h);
          eff(i, k - 1) -= f / (2.0 * h);
        }
      }
    }
  }
  if (max_row_sum_ > 1.0 + 1e-9)
    throw NumericalError("kernel: transition mass exceeds one");
}

void Kernel::fill_row(double x, Eigen::VectorXd& mass,
                      Eigen::VectorXd* moment) const {
  const int n = grid_.n;
  const double scale = xi(x);
  const double sup = model_->lr_sup();
  // Running cdf / partial-mean values at the moving lower edge; both are
  // exactly zero at t = 0, and each upper-edge evaluation is reused as the
  // next cell's lower edge.
  double cdf_lo = 0.0;
  double pm_lo = 0.0;
  for (int j = 0; j < n; ++j) {
    double t_lo = grid_.edge(j) / scale;
    double t_hi = grid_.edge(j + 1) / scale;
    if (t_lo >= sup) {
      // Everything further right is outside the lr support.
      mass.segment(j, n - j).setZero();
      if (moment) moment->segment(j, n - j).setZero();
      break;
    }
    double cdf_hi = model_->lr_cdf(t_hi, regime_);
    mass[j] = cdf_hi - cdf_lo;
    cdf_lo = cdf_hi;
    if (moment) {
      double pm_hi = model_->lr_partial_mean(t_hi, regime_);
      (*moment)[j] = scale * (pm_hi - pm_lo) - grid_.node(j) * mass[j];
      pm_lo = pm_hi;
    }
  }
}

double Kernel::density(double x, double y) const {
  const double scale = xi(x);
  return model_->lr_pdf(y / scale, regime_) / scale;
}

Eigen::VectorXd Kernel::slopes(const Grid& g, const Eigen::VectorXd& u) {
  const int n = g.n;
  const double h = g.h();
  Eigen::VectorXd s(n);
  if (n == 1) {
    s[0] = 0.0;
    return s;
  }
  s[0] = (u[1] - u[0]) / h;
  for (int k = 1; k < n - 1; ++k) s[k] = (u[k + 1] - u[k - 1]) / (2.0 * h);
  s[n - 1] = (u[n - 1] - u[n - 2]) / h;
  return s;
}

Kernel::CollocationRow Kernel::collocation_row(double x) const {
  CollocationRow row;
  row.grid = grid_;
  row.mass.resize(grid_.n);
  if (scheme_ == Scheme::Linear) {
    row.moment.resize(grid_.n);
    fill_row(x, row.mass, &row.moment);
  } else {
    fill_row(x, row.mass, nullptr);
  }
  return row;
}

double Kernel::apply_at(double x, const Eigen::VectorXd& u) const {
  if (u.size() != grid_.n)
    throw DomainError("kernel: value vector does not match the grid");
  return collocation_row(x).dot(u);
}

}  // namespace qd::ocsolve
