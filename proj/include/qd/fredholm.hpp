#pragma once

#include <Eigen/Dense>

#include "qd/kernel.hpp"

namespace qd::ocsolve {

struct SolveInfo {
  double residual = 0.0;  // max-norm of u - v - discount*K u after solving
};

// The operator (I - discount * K) together with its LU factorization, so
// several right-hand sides (and transposed systems) share one
// decomposition.
class FredholmOperator {
 public:
  explicit FredholmOperator(const Kernel& kernel, double discount = 1.0);

  const Kernel& kernel() const { return *kernel_; }
  double discount() const { return discount_; }

  // Solves u = v + discount * K u.  Throws NumericalError if the verified
  // residual exceeds tol.
  Eigen::VectorXd solve(const Eigen::VectorXd& v, SolveInfo* info = nullptr,
                        double tol = 1e-10) const;

  // Solves the transposed system (I - discount*K)^T u = v.
  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& v) const;

 private:
  const Kernel* kernel_;
  double discount_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

// Spectral radius of the discrete kernel by plain power iteration
// (diagnostic cross-check for the inverse-iteration eigensolver).
double spectral_radius(const Kernel& kernel, double tol = 1e-10,
                       int max_iter = 200000);

struct LeftEigen {
  double lambda = 0.0;
  // Left eigenvector as cell values, normalized to unit integral (so it
  // is a probability density on the grid).
  Eigen::VectorXd density;
  int iterations = 0;
};

// Dominant left eigenpair of the discrete kernel via inverse iteration on
// (I - K)^T: the closer the leading eigenvalue is to one (the regime of
// any interesting threshold), the faster this converges.
LeftEigen leading_left_eigen(const Kernel& kernel, double tol = 1e-12,
                             int max_iter = 200);

}  // namespace qd::ocsolve
