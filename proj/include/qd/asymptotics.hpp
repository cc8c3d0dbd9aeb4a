#pragma once

#include <functional>

#include "qd/models.hpp"
#include "qd/rng.hpp"

// Renewal-theoretic constants of the detection statistics and the
// first-order approximations built from them.
//
// Throughout, S_k = sum_{j<=k} log lr(X_j) is the random walk of
// log likelihood ratios and I = E_post[log lr] its post-change drift.
// The constants are
//
//   zeta      limiting overshoot factor: ARL of the statistic from
//             head start r is ~ A/zeta - r for large thresholds A,
//   varkappa  limiting mean overshoot of the log statistic over log A,
//   C_inf     delay offset of the statistic started from (quasi-)
//             stationarity, ADD_inf ~ (log A + varkappa - C_inf)/I,
//   C(r)      delay offset for a fixed head start r,
//             ADD_0 ~ (log A + varkappa - C(r))/I,
//   r*        the head start equalizing the two, C(r*) = C_inf.
//
// zeta and varkappa come from Spitzer-type series
//
//   zeta     = (1/I) exp{ -sum_k (1/k) [P_pre(S_k > 0) + P_post(S_k <= 0)] }
//   varkappa = E_post[(log lr)^2]/(2I) - sum_k (1/k) E_post[S_k^-]
//
// whose terms are estimated by Monte Carlo (overshoot_constants); a direct
// barrier-crossing simulation (direct_overshoot) of the same quantities is
// kept as an independent cross-check.  For the beta observation family the
// remaining constants have closed forms in polygamma functions and the
// Lerch transcendent (beta_constants, c_of_r_beta, head_start_beta).

namespace qd::asymptotics {

// Closed-form constants for the Beta2Beta(delta) family:
//   kl    = 1/delta
//   z1_sq = E_post[(log lr)^2] = 2 Psi_1(delta)
//   c_inf = delta Psi_1(delta) + Psi_0(delta) - Psi_0(1)
struct BetaConstants {
  double kl;
  double z1_sq;
  double c_inf;
};

BetaConstants beta_constants(double delta);

// C(r) = Phi(r/(1+r), 1, delta) + Psi_0(delta) - Psi_0(1), increasing in r.
double c_of_r_beta(double delta, double r);

// The head start r* solving C(r) = C_inf, i.e.
// Phi(r/(1+r), 1, delta) = delta Psi_1(delta), searched on [0, 1000 delta].
double head_start_beta(double delta);

// Limiting (threshold -> infinity) density of the detection statistic for
// the beta family: q(x) = delta x^(delta-1) (1+x)^(-1-delta), x > 0.
double stationary_density_beta(double delta, double x);

// Spitzer-series Monte Carlo estimate of zeta and varkappa.
//
// Each of n_paths random walks is advanced k_max steps; the series are
// truncated there and a geometric tail, fitted to the last 20 terms, is
// appended.  Standard errors come from 20 equal path batches.  For the
// beta family only post-change walks are simulated: swapping the Beta
// shape parameters across the change point mirrors log lr about zero, so
// P_pre(S_k > 0) = P_post(S_k <= 0).
struct OvershootEstimate {
  double zeta = 0.0;
  double zeta_se = 0.0;
  double varkappa = 0.0;
  double varkappa_se = 0.0;
  double zeta_tail = 0.0;      // tail appended to the exponent series
  double varkappa_tail = 0.0;  // tail appended to the S_k^- series
  bool tail_warning = false;   // some tail exceeded 1% of its series
  long n_paths = 0;
  int k_max = 0;
};

OvershootEstimate overshoot_constants(const models::Model& model, int k_max,
                                      long n_paths, rng::Stream stream);

// Direct simulation of the walk's overshoot chi over a high barrier b:
// laplace = E_post[exp(-chi)] estimates zeta, mean = E_post[chi] estimates
// varkappa (both up to O(e^-b) barrier bias).  Cross-check for the series.
struct OvershootDirect {
  double laplace = 0.0;
  double laplace_se = 0.0;
  double mean = 0.0;
  double mean_se = 0.0;
  double barrier = 0.0;
  long n_paths = 0;
};

OvershootDirect direct_overshoot(const models::Model& model, double barrier,
                                 long n_paths, rng::Stream stream);

// Everything approx_oc needs, bundled.  The Monte Carlo fields always
// carry standard errors; the closed-form fields are only populated for
// the beta family (beta_closed_forms says which).
struct AsymptoticConstants {
  double kl = 0.0;
  OvershootEstimate overshoot;
  bool beta_closed_forms = false;
  double delta = 0.0;
  double z1_sq = 0.0;
  double c_inf = 0.0;
  double r_star = 0.0;
};

AsymptoticConstants asymptotic_constants(const models::Model& model, int k_max,
                                         long n_paths, rng::Stream stream);

// First-order operating characteristics.  The delay fields need the
// closed-form offsets and are NaN when beta_closed_forms is false.
struct ApproxOc {
  double threshold = 0.0;
  double arl = 0.0;        // threshold/zeta - r
  double add_0 = 0.0;      // (log threshold + varkappa - C(r))/I
  double add_inf = 0.0;    // (log threshold + varkappa - C_inf)/I
  double worst_add = 0.0;  // max of the two delay ends
};

ApproxOc approx_oc_at_threshold(const AsymptoticConstants& c, double threshold,
                                double r);

// Same, with the threshold itself approximated as zeta * (gamma + r).
ApproxOc approx_oc_at_gamma(const AsymptoticConstants& c, double gamma,
                            double r);

// ARL of the quasi-stationarity-started procedure: threshold/zeta - mu_q,
// with mu_q the quasi-stationary mean (computed by the OC solver).
double approx_srp_arl(const AsymptoticConstants& c, double threshold,
                      double mu_q);

}  // namespace qd::asymptotics
