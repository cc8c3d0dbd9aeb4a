#include "qd/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "qd/errors.hpp"
#include "qd/special.hpp"

namespace qd::asymptotics {

namespace {

constexpr int kBatches = 20;      // batch-means standard errors
constexpr int kTailTerms = 20;    // terms entering the geometric tail fit

// Sum of a decaying series beyond k_max, from the last two 10-term blocks:
// if block sums decay geometrically, the remaining blocks sum to
// g2 * rho / (1 - rho) with rho = g2/g1, and every remaining term carries
// a factor 1/k < 1/k_max.  Degenerate fits (no decay visible) return a
// one-block allowance and set the flag.
double block_tail(const std::vector<double>& f, int k_max, bool& degenerate) {
  if (k_max < kTailTerms) return 0.0;
  double g1 = 0.0, g2 = 0.0;
  for (int k = k_max - 19; k <= k_max - 10; ++k) g1 += f[static_cast<size_t>(k)];
  for (int k = k_max - 9; k <= k_max; ++k) g2 += f[static_cast<size_t>(k)];
  if (!(g2 > 0.0)) return 0.0;
  if (!(g1 > g2)) {
    degenerate = true;
    return 10.0 * g2 / k_max;
  }
  const double rho = g2 / g1;
  return (g2 * rho / (1.0 - rho)) / k_max;
}

// Per-batch (or pooled) tallies of the series terms.
struct SeriesSums {
  std::vector<double> prob;  // per k: walk-sign indicator counts, both measures
  std::vector<double> sneg;  // per k: accumulated S_k^-
  double z2 = 0.0;           // accumulated squared increments
  long paths = 0;

  explicit SeriesSums(int k_max)
      : prob(static_cast<size_t>(k_max) + 1, 0.0),
        sneg(static_cast<size_t>(k_max) + 1, 0.0) {}
};

struct SeriesValue {
  double zeta = 0.0;
  double varkappa = 0.0;
  double zeta_tail = 0.0;
  double varkappa_tail = 0.0;
  bool warn = false;
};

SeriesValue evaluate_series(const SeriesSums& s, double kl, int k_max) {
  const double n = static_cast<double>(s.paths);
  std::vector<double> prob_mean(s.prob.size()), sneg_mean(s.sneg.size());
  for (size_t k = 0; k < s.prob.size(); ++k) {
    prob_mean[k] = s.prob[k] / n;
    sneg_mean[k] = s.sneg[k] / n;
  }

  double exponent = 0.0, ksum = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    exponent += prob_mean[static_cast<size_t>(k)] / k;
    ksum += sneg_mean[static_cast<size_t>(k)] / k;
  }

  SeriesValue out;
  bool degenerate = false;
  out.zeta_tail = block_tail(prob_mean, k_max, degenerate);
  out.varkappa_tail = block_tail(sneg_mean, k_max, degenerate);

  const double z2_mean = s.z2 / (n * k_max);
  out.zeta = std::exp(-(exponent + out.zeta_tail)) / kl;
  out.varkappa = z2_mean / (2.0 * kl) - (ksum + out.varkappa_tail);
  out.warn = degenerate || out.zeta_tail > 0.01 * exponent ||
             (ksum > 0.0 && out.varkappa_tail > 0.01 * ksum);
  return out;
}

double batch_se(const std::vector<double>& values) {
  const auto b = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= b;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (b - 1.0) / b);
}

}  // namespace

BetaConstants beta_constants(double delta) {
  if (!(delta > 0.0)) throw DomainError("beta_constants: delta must be > 0");
  BetaConstants c;
  c.kl = 1.0 / delta;
  c.z1_sq = 2.0 * special::trigamma(delta);
  c.c_inf = delta * special::trigamma(delta) + special::digamma(delta) -
            special::digamma(1.0);
  return c;
}

double c_of_r_beta(double delta, double r) {
  if (!(delta > 0.0)) throw DomainError("c_of_r_beta: delta must be > 0");
  if (!(r >= 0.0)) throw DomainError("c_of_r_beta: head start must be >= 0");
  const double z = r / (1.0 + r);
  return special::lerch_phi1(z, delta) + special::digamma(delta) -
         special::digamma(1.0);
}

double head_start_beta(double delta) {
  if (!(delta > 0.0)) throw DomainError("head_start_beta: delta must be > 0");
  const double target = delta * special::trigamma(delta);
  auto f = [&](double r) {
    return special::lerch_phi1(r / (1.0 + r), delta) - target;
  };
  const double lo = 0.0, hi = 1000.0 * delta;
  const double flo = f(lo), fhi = f(hi);
  if (flo > 0.0 || fhi < 0.0)
    throw NumericalError(
        "head_start_beta: no sign change on [0, 1000*delta]");
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  auto bounds = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  const double root = 0.5 * (bounds.first + bounds.second);
  if (std::fabs(f(root)) > 1e-9)
    throw NumericalError("head_start_beta: residual above 1e-9");
  return root;
}

double stationary_density_beta(double delta, double x) {
  if (!(delta > 0.0))
    throw DomainError("stationary_density_beta: delta must be > 0");
  if (!(x > 0.0)) throw DomainError("stationary_density_beta: x must be > 0");
  // Log-space keeps the x^(delta-1) and (1+x)^(-1-delta) factors from
  // overflowing separately when x is huge.
  return std::exp(std::log(delta) + (delta - 1.0) * std::log(x) -
                  (1.0 + delta) * std::log1p(x));
}

OvershootEstimate overshoot_constants(const models::Model& model, int k_max,
                                      long n_paths, rng::Stream stream) {
  if (k_max < kTailTerms)
    throw DomainError("overshoot_constants: k_max must be >= 20");
  if (n_paths < 100000)
    throw DomainError("overshoot_constants: need at least 1e5 paths");
  const double kl = model.kl();
  if (!(kl > 0.0))
    throw DomainError("overshoot_constants: model has nonpositive drift");

  // Swapping the Beta shape parameters across the change point sends
  // lr to 1/lr in law, so the pre-change walk is the mirrored post-change
  // walk and only one family of paths is needed.
  const bool symmetric = model.params().family == models::Family::Beta2Beta;

  std::vector<SeriesSums> batch(kBatches, SeriesSums(k_max));
  for (long p = 0; p < n_paths; ++p) {
    auto& acc = batch[static_cast<size_t>(p * kBatches / n_paths)];
    acc.paths += 1;

    rng::Stream post = stream.substream(2 * static_cast<std::uint64_t>(p));
    double s = 0.0;
    for (int k = 1; k <= k_max; ++k) {
      const double z = std::log(model.sample_lr(post, models::Regime::Post));
      s += z;
      acc.z2 += z * z;
      if (s <= 0.0) {
        acc.prob[static_cast<size_t>(k)] += symmetric ? 2.0 : 1.0;
        acc.sneg[static_cast<size_t>(k)] -= s;
      }
    }
    if (!symmetric) {
      rng::Stream pre = stream.substream(2 * static_cast<std::uint64_t>(p) + 1);
      double t = 0.0;
      for (int k = 1; k <= k_max; ++k) {
        t += std::log(model.sample_lr(pre, models::Regime::Pre));
        if (t > 0.0) acc.prob[static_cast<size_t>(k)] += 1.0;
      }
    }
  }

  SeriesSums pooled(k_max);
  std::vector<double> zeta_b, kappa_b;
  zeta_b.reserve(kBatches);
  kappa_b.reserve(kBatches);
  bool warn = false;
  for (const auto& b : batch) {
    pooled.paths += b.paths;
    pooled.z2 += b.z2;
    for (size_t k = 0; k < pooled.prob.size(); ++k) {
      pooled.prob[k] += b.prob[k];
      pooled.sneg[k] += b.sneg[k];
    }
    const SeriesValue v = evaluate_series(b, kl, k_max);
    zeta_b.push_back(v.zeta);
    kappa_b.push_back(v.varkappa);
  }
  const SeriesValue v = evaluate_series(pooled, kl, k_max);
  warn = v.warn;

  OvershootEstimate out;
  out.zeta = v.zeta;
  out.varkappa = v.varkappa;
  out.zeta_tail = v.zeta_tail;
  out.varkappa_tail = v.varkappa_tail;
  out.tail_warning = warn;
  out.zeta_se = batch_se(zeta_b);
  out.varkappa_se = batch_se(kappa_b);
  out.n_paths = n_paths;
  out.k_max = k_max;
  if (!(out.zeta > 0.0 && out.zeta < 1.0))
    throw NumericalError(
        "overshoot_constants: zeta estimate outside (0,1); the series is "
        "likely truncated too early for this model, increase k_max");
  return out;
}

OvershootDirect direct_overshoot(const models::Model& model, double barrier,
                                 long n_paths, rng::Stream stream) {
  if (!(barrier > 0.0))
    throw DomainError("direct_overshoot: barrier must be > 0");
  if (n_paths < 1000)
    throw DomainError("direct_overshoot: need at least 1000 paths");
  const double kl = model.kl();
  if (!(kl > 0.0))
    throw DomainError("direct_overshoot: model has nonpositive drift");

  const long max_steps =
      std::max<long>(1000000, static_cast<long>(200.0 * barrier / kl));
  double w_sum = 0.0, w_sq = 0.0, c_sum = 0.0, c_sq = 0.0;
  for (long p = 0; p < n_paths; ++p) {
    rng::Stream walk = stream.substream(static_cast<std::uint64_t>(p));
    double s = 0.0;
    long steps = 0;
    while (s <= barrier) {
      s += std::log(model.sample_lr(walk, models::Regime::Post));
      if (++steps > max_steps)
        throw NumericalError("direct_overshoot: walk failed to cross");
    }
    const double chi = s - barrier;
    const double w = std::exp(-chi);
    w_sum += w;
    w_sq += w * w;
    c_sum += chi;
    c_sq += chi * chi;
  }
  const double n = static_cast<double>(n_paths);
  OvershootDirect out;
  out.laplace = w_sum / n;
  out.mean = c_sum / n;
  out.laplace_se = std::sqrt((w_sq / n - out.laplace * out.laplace) / (n - 1.0));
  out.mean_se = std::sqrt((c_sq / n - out.mean * out.mean) / (n - 1.0));
  out.barrier = barrier;
  out.n_paths = n_paths;
  return out;
}

AsymptoticConstants asymptotic_constants(const models::Model& model, int k_max,
                                         long n_paths, rng::Stream stream) {
  AsymptoticConstants out;
  out.kl = model.kl();
  out.overshoot = overshoot_constants(model, k_max, n_paths, stream);
  if (model.params().family == models::Family::Beta2Beta) {
    const double delta = model.params().delta;
    const BetaConstants bc = beta_constants(delta);
    out.beta_closed_forms = true;
    out.delta = delta;
    out.z1_sq = bc.z1_sq;
    out.c_inf = bc.c_inf;
    out.r_star = head_start_beta(delta);
  }
  return out;
}

ApproxOc approx_oc_at_threshold(const AsymptoticConstants& c, double threshold,
                                double r) {
  if (!(c.overshoot.zeta > 0.0))
    throw DomainError("approx_oc: constants are not populated");
  if (!(threshold > 0.0)) throw DomainError("approx_oc: threshold must be > 0");
  if (!(r >= 0.0)) throw DomainError("approx_oc: head start must be >= 0");

  ApproxOc out;
  out.threshold = threshold;
  out.arl = threshold / c.overshoot.zeta - r;
  if (c.beta_closed_forms) {
    const double base = std::log(threshold) + c.overshoot.varkappa;
    out.add_inf = (base - c.c_inf) / c.kl;
    out.add_0 = (base - c_of_r_beta(c.delta, r)) / c.kl;
    out.worst_add = std::max(out.add_inf, out.add_0);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.add_inf = out.add_0 = out.worst_add = nan;
  }
  return out;
}

ApproxOc approx_oc_at_gamma(const AsymptoticConstants& c, double gamma,
                            double r) {
  if (!(c.overshoot.zeta > 0.0))
    throw DomainError("approx_oc: constants are not populated");
  if (!(gamma > 1.0)) throw DomainError("approx_oc: gamma must be > 1");
  if (!(r >= 0.0)) throw DomainError("approx_oc: head start must be >= 0");
  return approx_oc_at_threshold(c, c.overshoot.zeta * (gamma + r), r);
}

double approx_srp_arl(const AsymptoticConstants& c, double threshold,
                      double mu_q) {
  if (!(c.overshoot.zeta > 0.0))
    throw DomainError("approx_srp_arl: constants are not populated");
  if (!(threshold > 0.0))
    throw DomainError("approx_srp_arl: threshold must be > 0");
  return threshold / c.overshoot.zeta - mu_q;
}

}  // namespace qd::asymptotics
