#include "qd/exactsolve.hpp"

#include <cmath>
#include <cstdint>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "qd/errors.hpp"

namespace qd::exactsolve {

namespace {

double integrate(const std::function<double(double)>& f, double upper) {
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::
      integrate(f, 0.0, upper, 15, 1e-13, &error);
  if (error > 1e-10)
    throw NumericalError("separable quadrature failed to converge");
  return value;
}

void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 2.0))
    throw DomainError(
        "threshold must lie in (0, 2], the lr support of this law");
}

void check_start(double x) {
  if (!(x >= 0.0)) throw DomainError("start value must be >= 0");
}

bool separable_family(models::Family f) {
  return f == models::Family::UniformToBeta || f == models::Family::ExpDouble;
}

}  // namespace

SeparableKernel separable_kernel(const models::Model& m,
                                 models::Regime regime) {
  if (!separable_family(m.params().family))
    throw DomainError("lr law of this family has no separable kernel");
  SeparableKernel k;
  if (regime == models::Regime::Pre) {
    // P(t) = t/2 on [0,2]:  P(y/(1+x)) = [1/(1+x)] * [y/2].
    k.x_factor = [](double x) { return 1.0 / (1.0 + x); };
    k.y_factor = [](double y) { return 0.5 * y; };
    k.y_slope = [](double) { return 0.5; };
  } else {
    // P(t) = (t/2)^2 on [0,2]:  P(y/(1+x)) = [(1+x)^-2] * [y^2/4].
    k.x_factor = [](double x) { return 1.0 / ((1.0 + x) * (1.0 + x)); };
    k.y_factor = [](double y) { return 0.25 * y * y; };
    k.y_slope = [](double y) { return 0.5 * y; };
  }
  return k;
}

double factorization_residual(const models::Model& m, models::Regime regime,
                              const SeparableKernel& k, double upper, int n) {
  if (!(upper > 0.0 && upper <= 2.0))
    throw DomainError("factorization holds on (0, 2] only");
  if (n < 2) throw DomainError("lattice needs at least 2 points per side");
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = upper * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double y = upper * j / (n - 1);
      const double direct = m.lr_cdf(y / (1.0 + x), regime);
      const double split = k.x_factor(x) * k.y_factor(y);
      worst = std::max(worst, std::fabs(direct - split));
    }
  }
  return worst;
}

SeparableSolution separable_solve(const SeparableKernel& k,
                                  const std::function<double(double)>& v,
                                  double upper) {
  if (!(upper > 0.0)) throw DomainError("upper limit must be > 0");
  const double reach = integrate(
      [&](double t) { return k.x_factor(t) * k.y_slope(t); }, upper);
  const double denominator = 1.0 - reach;
  if (std::fabs(denominator) < 1e-10)
    throw NumericalError("separable kernel at resonance: unit operator norm");
  const double forcing =
      integrate([&](double t) { return v(t) * k.y_slope(t); }, upper);

  SeparableSolution s;
  s.multiplier = forcing / denominator;
  s.u = [v, m = s.multiplier, xf = k.x_factor](double x) {
    return v(x) + m * xf(x);
  };
  return s;
}

double u2b_gamma_max() { return 1.0 / (1.0 - 0.5 * std::log(3.0)); }

namespace {

const std::function<double(double)> kOne = [](double) { return 1.0; };

SeparableKernel u2b_kernel(models::Regime regime) {
  models::ModelParams p;
  p.family = models::Family::UniformToBeta;
  return separable_kernel(models::Model(p), regime);
}

SeparableSolution u2b_arl_solution(double threshold) {
  return separable_solve(u2b_kernel(models::Regime::Pre), kOne, threshold);
}

SeparableSolution u2b_add0_solution(double threshold) {
  return separable_solve(u2b_kernel(models::Regime::Post), kOne, threshold);
}

void check_gamma(double gamma) {
  if (!(gamma > 1.0 && gamma < u2b_gamma_max()))
    throw DomainError("gamma must lie in (1, 1/(1 - 0.5 log 3))");
}

}  // namespace

double u2b_arl(double threshold, double x) {
  check_threshold(threshold);
  check_start(x);
  return u2b_arl_solution(threshold).u(x);
}

double u2b_add0(double threshold, double x) {
  check_threshold(threshold);
  check_start(x);
  return u2b_add0_solution(threshold).u(x);
}

double u2b_add_limit(double threshold) {
  check_threshold(threshold);
  // The quasi-stationary law is uniform on [0, A]: the one-step
  // conditional cdf Y(y)/Y(A) = y/A already is the eigenfunction.
  const auto add0 = u2b_add0_solution(threshold);
  return integrate(add0.u, threshold) / threshold;
}

double u2b_integral_delay(double threshold, double x) {
  check_threshold(threshold);
  check_start(x);
  const auto add0 = u2b_add0_solution(threshold);
  return separable_solve(u2b_kernel(models::Regime::Pre), add0.u, threshold)
      .u(x);
}

double u2b_lower_bound(double threshold, double x) {
  check_threshold(threshold);
  check_start(x);
  return (x * u2b_add0(threshold, x) + u2b_integral_delay(threshold, x)) /
         (x + u2b_arl(threshold, x));
}

double u2b_qsd_lambda(double threshold) {
  check_threshold(threshold);
  return 0.5 * std::log1p(threshold);
}

double u2b_srp_arl(double threshold) {
  return 1.0 / (1.0 - u2b_qsd_lambda(threshold));
}

double u2b_local_pfa(double threshold, double r, long k, int m) {
  check_threshold(threshold);
  if (!(r >= 0.0)) throw DomainError("head start must be >= 0");
  if (k < 0) throw DomainError("change point index must be >= 0");
  if (m < 1) throw DomainError("window must be >= 1");
  const double lambda = u2b_qsd_lambda(threshold);
  if (k >= 1) return 1.0 - std::pow(lambda, m);
  return 1.0 - threshold / (2.0 * (1.0 + r)) * std::pow(lambda, m - 1);
}

U2bDesign u2b_calibrate(double gamma) {
  check_gamma(gamma);
  auto equation = [&](double a) {
    return a + (gamma - 1.0) * std::sqrt(1.0 + a) * (std::log1p(a) - 2.0);
  };
  const double lo = 0.0, hi = 2.0;
  const double flo = equation(lo), fhi = equation(hi);
  // f(0) = -2(gamma-1) < 0 and f(2) > 0 throughout (1, gamma_max).
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 200;
  auto bounds =
      boost::math::tools::toms748_solve(equation, lo, hi, flo, fhi, tol, iters);
  U2bDesign d;
  d.threshold = 0.5 * (bounds.first + bounds.second);
  d.head_start = std::sqrt(1.0 + d.threshold) - 1.0;
  const double achieved = u2b_arl(d.threshold, d.head_start);
  if (std::fabs(achieved - gamma) > 1e-9)
    throw NumericalError("exact design failed to reproduce the target ARL");
  return d;
}

double u2b_srp_threshold(double gamma) {
  check_gamma(gamma);
  return std::expm1(2.0 * (1.0 - 1.0 / gamma));
}

std::vector<U2bComparison> u2b_performance_curves(
    const std::vector<double>& gammas) {
  std::vector<U2bComparison> rows;
  rows.reserve(gammas.size());
  for (double gamma : gammas) {
    const U2bDesign d = u2b_calibrate(gamma);
    U2bComparison row;
    row.gamma = gamma;
    row.threshold_srr = d.threshold;
    row.head_start = d.head_start;
    row.threshold_srp = u2b_srp_threshold(gamma);
    row.jp_srr = u2b_add0(d.threshold, d.head_start);
    row.jp_srp = u2b_add_limit(row.threshold_srp);
    row.lower_bound = u2b_lower_bound(d.threshold, d.head_start);
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> u2b_gamma_grid(int n) {
  if (n < 2) throw DomainError("gamma grid needs at least 2 points");
  const double lo = 0.02, hi = 0.98 * (u2b_gamma_max() - 1.0);
  std::vector<double> grid(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    grid[static_cast<size_t>(i)] =
        1.0 + std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  return grid;
}

}  // namespace qd::exactsolve
