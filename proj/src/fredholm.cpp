#include "qd/fredholm.hpp"

#include <cmath>

#include "qd/errors.hpp"

namespace qd::ocsolve {

FredholmOperator::FredholmOperator(const Kernel& kernel, double discount)
    : kernel_(&kernel), discount_(discount) {
  if (!(discount > 0.0 && discount <= 1.0))
    throw DomainError("fredholm: discount must lie in (0,1]");
  const auto& m = kernel.matrix();
  Eigen::MatrixXd sys =
      Eigen::MatrixXd::Identity(m.rows(), m.cols()) - discount * m;
  lu_.compute(sys);
}

Eigen::VectorXd FredholmOperator::solve(const Eigen::VectorXd& v,
                                        SolveInfo* info, double tol) const {
  Eigen::VectorXd u = lu_.solve(v);
  // Verify against the original operator rather than trusting the LU.
  Eigen::VectorXd res = u - v - discount_ * (kernel_->matrix() * u);
  double r = res.lpNorm<Eigen::Infinity>();
  double scale = std::max(1.0, u.lpNorm<Eigen::Infinity>());
  if (info) info->residual = r / scale;
  if (!(r / scale <= tol))
    throw NumericalError("fredholm: solve residual above tolerance");
  return u;
}

Eigen::VectorXd FredholmOperator::solve_transposed(
    const Eigen::VectorXd& v) const {
  return lu_.transpose().solve(v);
}

double spectral_radius(const Kernel& kernel, double tol, int max_iter) {
  const auto& m = kernel.matrix();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(m.rows());
  x /= x.norm();
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = m * x;
    double next = x.dot(y);  // Rayleigh quotient (x normalized)
    double ny = y.norm();
    if (ny == 0.0) return 0.0;
    y /= ny;
    if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      return next;
    }
    lambda = next;
    x.swap(y);
  }
  throw NumericalError("spectral_radius: power iteration did not converge");
}

LeftEigen leading_left_eigen(const Kernel& kernel, double tol, int max_iter) {
  FredholmOperator op(kernel, 1.0);
  const auto& m = kernel.matrix();
  const int n = static_cast<int>(m.rows());
  const double h = kernel.grid().h();

  Eigen::VectorXd c = Eigen::VectorXd::Ones(n);
  c /= c.sum() * h;
  LeftEigen out;
  for (int it = 1; it <= max_iter; ++it) {
    // One inverse-iteration step: c <- (I - K)^-T c, renormalized.  The
    // dominant eigenvalue of (I-K)^-1 is 1/(1-lambda_max), so convergence
    // accelerates precisely when lambda_max approaches one.  The iterate is
    // deliberately not clamped to be nonnegative: the moment-corrected
    // discretization is not elementwise positive, so its exact eigenvector
    // can dip slightly below zero, and clamping would stall the residual
    // at the size of the clamped mass instead of converging.
    Eigen::VectorXd next = op.solve_transposed(c);
    double total = next.sum() * h;
    if (!(total > 0.0))
      throw NumericalError("leading_left_eigen: iterate collapsed to zero");
    next /= total;

    Eigen::VectorXd image = m.transpose() * next;
    double lambda = image.dot(next) / next.squaredNorm();
    double resid = (image - lambda * next).lpNorm<Eigen::Infinity>() /
                   std::max(1.0, next.lpNorm<Eigen::Infinity>());
    c.swap(next);
    if (resid <= tol) {
      out.lambda = lambda;
      out.density = c;
      out.iterations = it;
      return out;
    }
  }
  throw NumericalError("leading_left_eigen: inverse iteration did not converge");
}

}  // namespace qd::ocsolve
