#pragma once

#include <functional>
#include <vector>

#include "qd/models.hpp"

// Closed-form operating characteristics for models whose likelihood-ratio
// cdf factors as P(y/(1+x)) = X(x) Y(y).  With a separable kernel
// K(x,y) = X(x) Y'(y), the renewal equation
//
//   u(x) = v(x) + int_0^A K(x,y) u(y) dy
//
// has the explicit solution u = v + M X with a scalar M, so ARLs, delays,
// and the quasi-stationary law are exact rather than discretized.  Two of
// the observation models share such an lr law (lr cdf t/2 pre-change and
// (t/2)^2 post-change, supported on [0,2]): UniformToBeta and ExpDouble.
// For that law, with head start r_A = sqrt(1+A) - 1 and the threshold
// solving the transcendental equation below, the statistic's one-step
// conditional law already equals the quasi-stationary law, the procedure
// is an exact equalizer, its worst delay attains the lower bound, and the
// quasi-stationarity-started competitor is strictly worse.  All of the
// closed forms require the threshold to stay within the lr support,
// threshold <= 2, which the admissible range gamma < u2b_gamma_max()
// guarantees.

namespace qd::exactsolve {

struct SeparableKernel {
  std::function<double(double)> x_factor;  // X(x)
  std::function<double(double)> y_factor;  // Y(y), the cdf part
  std::function<double(double)> y_slope;   // dY/dy, the kernel's y part
};

// Factorization of the model's lr cdf under the given regime; rejects
// families whose lr law does not separate this way.
SeparableKernel separable_kernel(const models::Model& m, models::Regime regime);

// max |P(y/(1+x)) - X(x) Y(y)| over an n-by-n lattice on [0, upper]^2.
double factorization_residual(const models::Model& m, models::Regime regime,
                              const SeparableKernel& k, double upper, int n);

struct SeparableSolution {
  double multiplier;                 // M, a function of the threshold only
  std::function<double(double)> u;   // v(x) + M X(x)
};

// Exact solution of u = v + K u on [0, upper]; quadratures to 1e-12.
// Signals resonance (unit integral operator norm on X) as a numerical
// error instead of dividing by ~0.
SeparableSolution separable_solve(const SeparableKernel& k,
                                  const std::function<double(double)>& v,
                                  double upper);

// ---- Exact characteristics of the shared uniform-to-beta lr law. ----
// "u2b" names the lr law, not the observation space; every function below
// applies to UniformToBeta and ExpDouble alike.  Thresholds live in (0, 2].

// Largest ARL constraint with an exact design: 1/(1 - 0.5 log 3).
double u2b_gamma_max();

double u2b_arl(double threshold, double x);             // E_pre[T], start x
double u2b_add0(double threshold, double x);            // E_post[T], start x
double u2b_add_limit(double threshold);                 // delay from quasi-stationarity
double u2b_integral_delay(double threshold, double x);  // sum_nu E[(T-nu)^+]
double u2b_lower_bound(double threshold, double x);     // best worst delay at ARL l(x)+x
double u2b_qsd_lambda(double threshold);                // quasi-stationary eigenvalue
double u2b_srp_arl(double threshold);                   // 1/(1 - lambda)

// P_pre(k < T <= k+m | T > k) for the statistic started at r: geometric
// with a modified first term,
//   1 - [log(1+A)/2]^m                     for k >= 1,
//   1 - A/(2(1+r)) * [log(1+A)/2]^(m-1)    for k = 0.
double u2b_local_pfa(double threshold, double r, long k, int m);

struct U2bDesign {
  double threshold;   // A solving A + (g-1) sqrt(1+A) (log(1+A) - 2) = 0
  double head_start;  // r_A = sqrt(1+A) - 1
};

// Exact minimax design for an ARL constraint gamma in (1, u2b_gamma_max()).
U2bDesign u2b_calibrate(double gamma);

// Threshold giving the quasi-stationarity-started procedure ARL gamma:
// B = exp(2(1 - 1/gamma)) - 1.
double u2b_srp_threshold(double gamma);

struct U2bComparison {
  double gamma;
  double threshold_srr;   // A of the equalizing design
  double head_start;      // r_A
  double threshold_srp;   // B
  double jp_srr;          // worst delay of the equalizing design
  double jp_srp;          // worst delay of the quasi-stationary start
  double lower_bound;     // best possible worst delay at this gamma
};

// The exact comparison curves over a gamma grid.
std::vector<U2bComparison> u2b_performance_curves(
    const std::vector<double>& gammas);

// n points log-spaced in gamma - 1, strictly inside (1, u2b_gamma_max()).
std::vector<double> u2b_gamma_grid(int n);

}  // namespace qd::exactsolve
