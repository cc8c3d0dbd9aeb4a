#pragma once

#include <string>

#include "qd/rng.hpp"

namespace qd::models {

// Which side of the change point an observation comes from.
enum class Regime { Pre, Post };

enum class Family {
  // Observations Beta(delta, delta+1) before the change and
  // Beta(delta+1, delta) after; the likelihood ratio is x/(1-x).
  Beta2Beta,
  // Exponential mean 1 before, mean 1+theta after.
  ExpShift,
  // Uniform(0,1) before, density 2x on (0,1) after.
  UniformToBeta,
  // Exponential rate 1 before, rate 2 after.  Shares the likelihood-ratio
  // law of UniformToBeta even though the observation space differs.
  ExpDouble,
};

struct ModelParams {
  Family family = Family::Beta2Beta;
  double delta = 1.0;  // Beta2Beta only
  double theta = 0.1;  // ExpShift only
};

// An iid change-point model: pre- and post-change observation densities
// f and g with likelihood ratio lr(x) = g(x)/f(x).  Everything downstream
// (detection statistics, integral-equation kernels, Monte Carlo) touches
// the data only through this interface.
class Model {
 public:
  explicit Model(const ModelParams& p);

  const ModelParams& params() const { return params_; }
  std::string name() const;

  // Observation density under the given regime.
  double obs_pdf(double x, Regime regime) const;

  // Likelihood ratio g(x)/f(x) at an observation value.
  double lr(double x) const;

  // Law of the random variable lr(X):
  //   lr_cdf(t, r)          P_r( lr(X) <= t )
  //   lr_pdf(t, r)          its density
  //   lr_partial_mean(t, r) int_0^t u dP_r(u)
  // The partial mean is what exact per-cell kernel masses and first
  // moments are built from.
  double lr_cdf(double t, Regime regime) const;
  double lr_pdf(double t, Regime regime) const;
  double lr_partial_mean(double t, Regime regime) const;

  // Essential supremum of lr(X) (infinity when unbounded).
  double lr_sup() const;

  // Kullback-Leibler information number E_post[ log lr(X) ].
  double kl() const;

  // Draw one observation / one likelihood-ratio value.
  double sample(rng::Stream& s, Regime regime) const;
  double sample_lr(rng::Stream& s, Regime regime) const {
    return lr(sample(s, regime));
  }

 private:
  ModelParams params_;
  // Cached ExpShift quantities: beta = (1+theta)/theta, c = (1+theta)^-beta.
  double beta_ = 0.0;
  double c_ = 0.0;
};

Model make_model(const ModelParams& p);

// Parses a family tag as used by the CLI and config files.
Family family_from_string(const std::string& tag);
std::string to_string(Family f);

}  // namespace qd::models
