#include "qd/special.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>

#include "qd/errors.hpp"

namespace qd::special {

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: argument must be positive");
  return boost::math::digamma(x);
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma: argument must be positive");
  return boost::math::trigamma(x);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("log_beta: parameters must be positive");
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("inc_beta: parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("inc_beta: x must lie in [0,1]");
  return boost::math::ibeta(a, b, x);
}

double partial_beta(double a, double b, double x) {
  if (!(a > 0.0)) throw DomainError("partial_beta: a must be positive");
  if (!(x >= 0.0)) throw DomainError("partial_beta: x must be nonnegative");
  if (b > 0.0) {
    if (x > 1.0) throw DomainError("partial_beta: x must lie in [0,1]");
    return inc_beta(a, b, x) * std::exp(log_beta(a, b));
  }
  if (!(x < 1.0))
    throw DomainError("partial_beta: x must lie strictly below 1 for b <= 0");
  if (b == 0.0)
    throw NumericalError("partial_beta: b = 0 is a logarithmic case");
  // Lower a by one, raise b by one, repeat until b is positive.
  double am1 = a - 1.0;
  if (!(am1 > 0.0))
    throw DomainError("partial_beta: need a > 1 when b <= 0");
  return (am1 * partial_beta(am1, b + 1.0, x) -
          std::pow(x, am1) * std::pow(1.0 - x, b)) /
         b;
}

double lerch_phi1(double z, double a) {
  if (!(z >= 0.0 && z < 1.0))
    throw DomainError("lerch_phi1: need 0 <= z < 1");
  if (!(a > 0.0)) throw DomainError("lerch_phi1: need a > 0");
  double sum = 0.0;
  double zn = 1.0;
  for (int n = 0; n < 1000000; ++n) {
    double term = zn / (n + a);
    sum += term;
    zn *= z;
    // Remaining tail is below zn/((n+1+a)(1-z)).
    if (zn / ((n + 1 + a) * (1.0 - z)) < 1e-16 * sum) return sum;
  }
  throw NumericalError("lerch_phi1: series did not converge");
}

double kolmogorov_tail(double t) {
  if (t <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  double q = 2.0 * sum;
  if (q < 0.0) return 0.0;
  if (q > 1.0) return 1.0;
  return q;
}

}  // namespace qd::special
