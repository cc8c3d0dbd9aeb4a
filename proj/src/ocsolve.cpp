#include "qd/ocsolve.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>

#include "qd/errors.hpp"

namespace qd::ocsolve {

using models::Regime;

OcSolver::OcSolver(const models::Model& model, double threshold,
                   SolverOptions opts)
    : model_(model),
      threshold_(threshold),
      opts_(opts),
      grid_(Grid::make(threshold, opts.n)) {}

void OcSolver::check_start(double x) const {
  if (!(x >= 0.0) || !std::isfinite(x))
    throw DomainError("ocsolve: start value must be finite and >= 0");
}

void OcSolver::ensure_pre() {
  if (!pre_) {
    pre_ = std::make_unique<Kernel>(model_, Regime::Pre, grid_, 1.0,
                                    opts_.scheme);
    diag_.max_row_sum_pre = pre_->max_row_sum();
    op_pre_ = std::make_unique<FredholmOperator>(*pre_, 1.0);
  }
}

void OcSolver::ensure_post() {
  if (!post_) {
    post_ = std::make_unique<Kernel>(model_, Regime::Post, grid_, 1.0,
                                     opts_.scheme);
    diag_.max_row_sum_post = post_->max_row_sum();
    op_post_ = std::make_unique<FredholmOperator>(*post_, 1.0);
  }
}

void OcSolver::ensure_ell() {
  if (ell_) return;
  ensure_pre();
  SolveInfo info;
  ell_ = op_pre_->solve(Eigen::VectorXd::Ones(grid_.n), &info, opts_.solve_tol);
  diag_.arl_residual = info.residual;
}

void OcSolver::ensure_delta0() {
  if (delta0_) return;
  ensure_post();
  SolveInfo info;
  delta0_ =
      op_post_->solve(Eigen::VectorXd::Ones(grid_.n), &info, opts_.solve_tol);
  diag_.delay0_residual = info.residual;
}

void OcSolver::ensure_psi() {
  if (psi_) return;
  ensure_pre();
  ensure_delta0();
  SolveInfo info;
  psi_ = op_pre_->solve(*delta0_, &info, opts_.solve_tol);
  diag_.psi_residual = info.residual;
}

void OcSolver::ensure_qsd() {
  if (qsd_) return;
  ensure_pre();
  qsd_ = leading_left_eigen(*pre_, opts_.eigen_tol);
  diag_.lambda = qsd_->lambda;
  diag_.eigen_iterations = qsd_->iterations;
}

double OcSolver::eval_pre(double x, const Eigen::VectorXd& u, double inhomog) {
  // Evaluate a solved unknown at an arbitrary start through its own
  // integral equation u(x) = inhomog(x) + (K u)(x).
  return inhomog + pre_->apply_at(x, u);
}

double OcSolver::arl(double x) {
  check_start(x);
  ensure_ell();
  return eval_pre(x, *ell_, 1.0);
}

double OcSolver::delay0(double x) {
  check_start(x);
  ensure_delta0();
  return 1.0 + post_->apply_at(x, *delta0_);
}

double OcSolver::psi(double x) {
  check_start(x);
  ensure_psi();
  return delay0(x) + pre_->apply_at(x, *psi_);
}

double OcSolver::lower_bound(double x) {
  check_start(x);
  return (x * delay0(x) + psi(x)) / (x + arl(x));
}

DelayCurve OcSolver::delay_curve(double x, int nu_max, double plateau_tol,
                                 int window) {
  check_start(x);
  if (nu_max < 0) throw DomainError("delay_curve: nu_max must be >= 0");
  ensure_pre();
  ensure_delta0();

  DelayCurve out;
  Eigen::VectorXd d = *delta0_;
  Eigen::VectorXd r = Eigen::VectorXd::Ones(grid_.n);
  double add0 = delay0(x);
  out.delay.push_back(add0);
  out.reach.push_back(1.0);
  out.supremum = add0;
  out.argmax = 0;

  int stable = 0;
  const auto& mpre = pre_->matrix();
  const auto row = pre_->collocation_row(x);
  for (int nu = 1; nu <= nu_max; ++nu) {
    double dv = row.dot(d);  // delta_nu(x)
    double rv = row.dot(r);  // rho_nu(x) = P(T > nu)
    if (!(rv > 0.0)) break;  // alarm nearly sure by now
    double add = dv / rv;
    out.delay.push_back(add);
    out.reach.push_back(rv);
    if (add > out.supremum) {
      out.supremum = add;
      out.argmax = nu;
    }
    double prev = out.delay[out.delay.size() - 2];
    if (std::abs(add - prev) <= plateau_tol)
      ++stable;
    else
      stable = 0;
    if (stable >= window) {
      out.plateau = true;
      break;
    }
    if (nu < nu_max) {
      d = mpre * d;
      r = mpre * r;
    }
  }
  return out;
}

double OcSolver::limiting_delay() {
  ensure_qsd();
  ensure_delta0();
  return qsd_->density.dot(*delta0_) * grid_.h();
}

double OcSolver::qsd_lambda() {
  ensure_qsd();
  return qsd_->lambda;
}

GridFunction OcSolver::qsd_density() {
  ensure_qsd();
  // The discrete eigenvector can dip a hair below zero where the
  // moment-corrected kernel rows do; callers get a bona fide density, so
  // clamp and renormalize to unit mass.
  Eigen::VectorXd d = qsd_->density.cwiseMax(0.0);
  double total = d.sum() * grid_.h();
  if (!(total > 0.0))
    throw NumericalError("qsd_density: eigenvector has no positive mass");
  return GridFunction(grid_, d / total);
}

double OcSolver::qsd_mean() {
  ensure_qsd();
  double m = 0.0;
  for (int j = 0; j < grid_.n; ++j)
    m += qsd_->density[j] * grid_.node(j) * grid_.h();
  return m;
}

double OcSolver::srp_arl() {
  ensure_qsd();
  return 1.0 / (1.0 - qsd_->lambda);
}

double OcSolver::srp_arl_integral() {
  ensure_qsd();
  ensure_ell();
  return qsd_->density.dot(*ell_) * grid_.h();
}

double OcSolver::srp_delay() { return limiting_delay(); }

double OcSolver::srp_stationary_delay() {
  ensure_qsd();
  ensure_ell();
  ensure_psi();
  return qsd_->density.dot(*psi_) / qsd_->density.dot(*ell_);
}

std::vector<double> OcSolver::local_pfa(double x, int k_max, int m) {
  check_start(x);
  if (k_max < 0 || m < 1)
    throw DomainError("local_pfa: need k_max >= 0 and m >= 1");
  ensure_pre();
  // rho_k(x) for k = 0..k_max+m via repeated kernel application.
  std::vector<double> rho(static_cast<std::size_t>(k_max) + m + 1);
  rho[0] = 1.0;
  Eigen::VectorXd r = Eigen::VectorXd::Ones(grid_.n);
  const auto& mpre = pre_->matrix();
  const auto row = pre_->collocation_row(x);
  for (int k = 1; k <= k_max + m; ++k) {
    rho[k] = row.dot(r);  // rho_k evaluated at x
    if (k < k_max + m) r = mpre * r;
  }
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    double denom = rho[k];
    out[k] = denom > 0.0 ? 1.0 - rho[k + m] / denom : 1.0;
  }
  return out;
}

const Diagnostics& OcSolver::diagnostics() { return diag_; }

const Kernel& OcSolver::pre_kernel() {
  ensure_pre();
  return *pre_;
}

const Kernel& OcSolver::post_kernel() {
  ensure_post();
  return *post_;
}

BayesOcSolver::BayesOcSolver(const models::Model& model, double threshold,
                             double p, SolverOptions opts)
    : model_(model),
      threshold_(threshold),
      p_(p),
      opts_(opts),
      grid_(Grid::make(threshold, opts.n)) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("bayes solver: p must lie in (0,1)");
}

void BayesOcSolver::ensure() {
  if (chi_) return;
  const double omp = 1.0 - p_;
  pre_ = std::make_unique<Kernel>(model_, Regime::Pre, grid_, omp,
                                  opts_.scheme);
  post_ = std::make_unique<Kernel>(model_, Regime::Post, grid_, omp,
                                   opts_.scheme);
  // The pre-change pieces carry the geometric discount 1-p; the
  // post-change delay does not (time after the change is undiscounted).
  op_pre_ = std::make_unique<FredholmOperator>(*pre_, omp);
  op_post_ = std::make_unique<FredholmOperator>(*post_, 1.0);

  chi_ = op_pre_->solve(Eigen::VectorXd::Ones(grid_.n), nullptr,
                        opts_.solve_tol);
  delta0_ = op_post_->solve(Eigen::VectorXd::Ones(grid_.n), nullptr,
                            opts_.solve_tol);
  psi_ = op_pre_->solve(*delta0_, nullptr, opts_.solve_tol);
}

double BayesOcSolver::eval(const Kernel& k, const FredholmOperator&,
                           const Eigen::VectorXd& u, double x, double inhomog,
                           double discount) {
  return inhomog + discount * k.apply_at(x, u);
}

double BayesOcSolver::chi(double x) {
  ensure();
  return eval(*pre_, *op_pre_, *chi_, x, 1.0, 1.0 - p_);
}

double BayesOcSolver::delay0(double x) {
  ensure();
  return eval(*post_, *op_post_, *delta0_, x, 1.0, 1.0);
}

double BayesOcSolver::psi_p(double x) {
  ensure();
  return eval(*pre_, *op_pre_, *psi_, x, delay0(x), 1.0 - p_);
}

double BayesOcSolver::start_value(double pi) const {
  if (!(pi >= 0.0 && pi < 1.0))
    throw DomainError("bayes solver: pi must lie in [0,1)");
  return pi / ((1.0 - pi) * p_);
}

double BayesOcSolver::pfa(double pi) {
  double x0 = start_value(pi);
  return (1.0 - pi) * (1.0 - p_ * chi(x0));
}

double BayesOcSolver::add(double pi) {
  double x0 = start_value(pi);
  double num = pi * delay0(x0) + (1.0 - pi) * p_ * psi_p(x0);
  double den = pi + (1.0 - pi) * p_ * chi(x0);
  return num / den;
}

namespace {

double target_metric(const models::Model& model, CalTarget target, double A,
                     double start_x, const SolverOptions& opts) {
  OcSolver s(model, A, opts);
  switch (target) {
    case CalTarget::ArlFromStart:
      return s.arl(start_x);
    case CalTarget::SrpArl:
      return s.srp_arl();
  }
  return 0.0;
}

}  // namespace

CalibrationResult calibrate(const models::Model& model, CalTarget target,
                            double gamma, double start_x,
                            const SolverOptions& opts, double rel_tol) {
  if (!(gamma > 1.0))
    throw DomainError("calibrate: target mean run length must exceed 1");
  if (!(rel_tol > 0.0)) throw DomainError("calibrate: rel_tol must be > 0");

  CalibrationResult out;

  // Stage 1: bracket and solve on a coarse grid.
  SolverOptions coarse = opts;
  coarse.n = std::min(opts.n, 250);
  auto coarse_f = [&](double A) {
    ++out.coarse_evaluations;
    return target_metric(model, target, A, start_x, coarse) - gamma;
  };

  // The statistic gains at most its own value plus one per step, so
  // arl(A) >= A - start: gamma + start + 2 is a guaranteed upper bracket
  // for the start-value target and a sound first guess otherwise.
  double lo = std::max(1e-8, 0.02 * gamma);
  double hi = gamma + start_x + 2.0;
  double flo = coarse_f(lo);
  double fhi = coarse_f(hi);
  int expand = 0;
  while (flo > 0.0 && expand++ < 60) {
    lo *= 0.25;
    flo = coarse_f(lo);
  }
  while (fhi < 0.0 && expand++ < 60) {
    hi *= 2.0;
    fhi = coarse_f(hi);
  }
  if (flo > 0.0 || fhi < 0.0)
    throw NumericalError("calibrate: could not bracket the threshold");

  boost::math::tools::eps_tolerance<double> tol(20);  // ~1e-6 relative
  std::uintmax_t iters = 80;
  auto root = boost::math::tools::toms748_solve(coarse_f, lo, hi, flo, fhi,
                                                tol, iters);
  double A = 0.5 * (root.first + root.second);

  // Stage 2: secant polish at the requested grid size, using a slope
  // estimated from the coarse model (the fine and coarse curves are
  // parallel to first order).
  double dA = std::max(1e-6, 1e-3 * A);
  double slope = (coarse_f(A + dA) - coarse_f(A - dA)) / (2.0 * dA);
  if (!(slope > 0.0))
    throw NumericalError("calibrate: metric is not increasing near the root");

  double value = 0.0;
  for (int it = 0; it < 8; ++it) {
    ++out.fine_evaluations;
    value = target_metric(model, target, A, start_x, opts);
    if (std::abs(value - gamma) <= rel_tol * gamma) {
      out.threshold = A;
      out.value = value;
      return out;
    }
    A -= (value - gamma) / slope;
    if (!(A > 0.0))
      throw NumericalError("calibrate: secant step left the domain");
  }
  throw NumericalError("calibrate: polish stage did not converge");
}

double equalizing_head_start(OcSolver& solver) {
  const double limit = solver.limiting_delay();
  auto f = [&](double r) { return solver.delay0(r) - limit; };
  double lo = 0.0, hi = solver.threshold() * (1.0 - 1e-9);
  double flo = f(lo), fhi = f(hi);
  if (flo <= 0.0) return 0.0;  // already flat-or-better from a zero start
  if (fhi >= 0.0)
    throw NumericalError("equalizing_head_start: no crossing below threshold");
  boost::math::tools::eps_tolerance<double> tol(40);
  std::uintmax_t iters = 200;
  auto root =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (root.first + root.second);
}

}  // namespace qd::ocsolve
