#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "qd/fredholm.hpp"
#include "qd/grid.hpp"
#include "qd/kernel.hpp"
#include "qd/models.hpp"

namespace qd::ocsolve {

struct SolverOptions {
  int n = 2000;                  // grid cells
  Scheme scheme = Scheme::Linear;
  double solve_tol = 1e-10;      // verified Fredholm residual bound
  double eigen_tol = 1e-12;      // left-eigenpair residual bound
};

struct Diagnostics {
  double arl_residual = 0.0;
  double delay0_residual = 0.0;
  double psi_residual = 0.0;
  double max_row_sum_pre = 0.0;
  double max_row_sum_post = 0.0;
  double lambda = 0.0;
  int eigen_iterations = 0;
};

// Expected-delay profile over change points nu = 0, 1, 2, ...
struct DelayCurve {
  std::vector<double> delay;  // conditional expected delay at each nu
  std::vector<double> reach;  // P(no alarm up to nu) from the same start
  double supremum = 0.0;
  int argmax = 0;
  bool plateau = false;       // the profile settled before the curve ended
};

// Operating characteristics of the one-sided stopping rule
//   T = inf{ n >= 1 : V_n >= threshold },  V_n = (1 + V_{n-1}) lr(X_n),
// for an iid change-point model, via Fredholm integral equations of the
// second kind on [0, threshold].  Solutions are cached; evaluation at
// off-grid start points goes through the integral equation itself, not
// through interpolation of cell values.
class OcSolver {
 public:
  OcSolver(const models::Model& model, double threshold,
           SolverOptions opts = {});

  const models::Model& model() const { return model_; }
  double threshold() const { return threshold_; }
  const SolverOptions& options() const { return opts_; }
  const Grid& grid() const { return grid_; }

  // Mean time to false alarm from start value x.
  double arl(double x);

  // Expected delay when the data are post-change from the first
  // observation on ("detection from scratch").
  double delay0(double x);

  // Cumulative delay weight psi(x) = sum_nu E[delay at nu; no alarm by nu];
  // psi / arl is the delay per unit of monitoring time in the repeated
  // (multi-cyclic) regime.
  double psi(double x);
  double stationary_delay(double x) { return psi(x) / arl(x); }

  // Performance bound no stopping rule with the same mean time to false
  // alarm can beat (evaluated for the rule started at x).
  double lower_bound(double x);

  // Conditional expected delays over change points 0..nu_max; stops early
  // once `window` consecutive increments fall below plateau_tol.
  DelayCurve delay_curve(double x, int nu_max = 5000,
                         double plateau_tol = 1e-6, int window = 10);

  // Limit of the delay profile as nu -> infinity (start-independent).
  double limiting_delay();

  // Quasi-stationary law of the statistic conditioned on no alarm.
  double qsd_lambda();
  GridFunction qsd_density();
  double qsd_mean();

  // Characteristics of the rule started from a quasi-stationary draw:
  // mean time to false alarm is 1/(1-lambda); the integral form
  // int arl dQ must agree and is kept as a consistency probe.
  double srp_arl();
  double srp_arl_integral();
  double srp_delay();

  // Multi-cyclic (stationary) delay of the rule restarted from fresh
  // quasi-stationary draws: the quasi-stationary averages of psi and of the
  // mean run length, in ratio.  For an exact equalizer this coincides with
  // srp_delay; the two are computed through different equations, so their
  // agreement is a meaningful consistency check.
  double srp_stationary_delay();

  // P( T <= k + m | T > k ) under the pre-change law, k = 0..k_max.
  std::vector<double> local_pfa(double x, int k_max, int m);

  const Diagnostics& diagnostics();

  const Kernel& pre_kernel();
  const Kernel& post_kernel();

 private:
  void ensure_pre();
  void ensure_post();
  void ensure_ell();
  void ensure_delta0();
  void ensure_psi();
  void ensure_qsd();
  double eval_pre(double x, const Eigen::VectorXd& u, double inhomog);
  void check_start(double x) const;

  models::Model model_;
  double threshold_;
  SolverOptions opts_;
  Grid grid_;

  std::unique_ptr<Kernel> pre_, post_;
  std::unique_ptr<FredholmOperator> op_pre_, op_post_;
  std::optional<Eigen::VectorXd> ell_, delta0_, psi_;
  std::optional<LeftEigen> qsd_;
  Diagnostics diag_;
};

// Operating characteristics of the discounted (geometric-prior) rule
//   R_n = (1 + R_{n-1}) lr(X_n) / (1-p),  T = inf{ n : R_n >= threshold }.
// pfa/add take the prior mass pi already past the change; the rule then
// starts from R_0 = pi / ((1-pi) p).
class BayesOcSolver {
 public:
  BayesOcSolver(const models::Model& model, double threshold, double p,
                SolverOptions opts = {});

  double p() const { return p_; }
  double threshold() const { return threshold_; }

  // Building blocks: chi(x) = E_x[ sum_{nu < T} (1-p)^nu ] and
  // psi_p(x), the geometrically discounted delay weight.
  double chi(double x);
  double psi_p(double x);
  double delay0(double x);

  double start_value(double pi) const;
  double pfa(double pi);
  double add(double pi);

 private:
  void ensure();
  double eval(const Kernel& k, const FredholmOperator& op,
              const Eigen::VectorXd& u, double x, double inhomog,
              double discount);

  models::Model model_;
  double threshold_;
  double p_;
  SolverOptions opts_;
  Grid grid_;
  std::unique_ptr<Kernel> pre_, post_;
  std::unique_ptr<FredholmOperator> op_pre_, op_post_;
  std::optional<Eigen::VectorXd> chi_, psi_, delta0_;
};

// Threshold calibration targets.
enum class CalTarget {
  ArlFromStart,  // arl(start_x) = gamma
  SrpArl,        // 1/(1 - lambda) = gamma
};

struct CalibrationResult {
  double threshold = 0.0;
  double value = 0.0;  // achieved target metric at the full grid size
  int coarse_evaluations = 0;
  int fine_evaluations = 0;
};

// Finds the threshold hitting the target metric within rel_tol * gamma.
// A coarse-grid bracketing stage localizes the root cheaply; a secant
// polish at the requested grid size finishes the job.
CalibrationResult calibrate(const models::Model& model, CalTarget target,
                            double gamma, double start_x,
                            const SolverOptions& opts,
                            double rel_tol = 2.5e-3);

// Head start r for which the delay at nu = 0 equals the limiting delay,
// making the delay profile as flat as the rule allows at this threshold.
double equalizing_head_start(OcSolver& solver);

}  // namespace qd::ocsolve
