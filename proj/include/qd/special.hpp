#pragma once

namespace qd::special {

// Digamma and trigamma on the positive half-line.
double digamma(double x);
double trigamma(double x);

// log Beta(a, b) for a, b > 0.
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1].
double inc_beta(double a, double b, double x);

// Partial beta integral  B_x(a, b) = int_0^x s^(a-1) (1-s)^(b-1) ds
// for a > 0 and any real b (x strictly below 1 when b <= 0).  The b <= 0
// case is reduced to b + 1 with the contiguous recurrence
//   B_x(a+1, b) = ( a B_x(a, b+1) - x^a (1-x)^b ) / b .
double partial_beta(double a, double b, double x);

// Lerch transcendent Phi(z, 1, a) = sum_{n>=0} z^n / (n + a)
// for 0 <= z < 1 and a > 0, by direct summation with a geometric tail bound.
double lerch_phi1(double z, double a);

// Kolmogorov-Smirnov tail probability  Q(t) = 2 sum_{k>=1} (-1)^(k-1)
// exp(-2 k^2 t^2); used by the sampler goodness-of-fit tests.
double kolmogorov_tail(double t);

}  // namespace qd::special
