#include "qd/models.hpp"

#include <cmath>
#include <limits>

#include "qd/errors.hpp"
#include "qd/special.hpp"

namespace qd::models {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Model::Model(const ModelParams& p) : params_(p) {
  switch (p.family) {
    case Family::Beta2Beta:
      if (!(p.delta > 0.0))
        throw DomainError("beta2beta: delta must be positive");
      break;
    case Family::ExpShift:
      if (!(p.theta > 0.0))
        throw DomainError("expshift: theta must be positive");
      beta_ = (1.0 + p.theta) / p.theta;
      c_ = std::pow(1.0 + p.theta, -beta_);
      break;
    case Family::UniformToBeta:
    case Family::ExpDouble:
      break;
  }
}

Model make_model(const ModelParams& p) { return Model(p); }

std::string Model::name() const {
  switch (params_.family) {
    case Family::Beta2Beta:
      return "beta2beta(delta=" + std::to_string(params_.delta) + ")";
    case Family::ExpShift:
      return "expshift(theta=" + std::to_string(params_.theta) + ")";
    case Family::UniformToBeta:
      return "uniform2beta";
    case Family::ExpDouble:
      return "expdouble";
  }
  return "?";
}

double Model::obs_pdf(double x, Regime regime) const {
  const bool post = regime == Regime::Post;
  switch (params_.family) {
    case Family::Beta2Beta: {
      if (x <= 0.0 || x >= 1.0) return 0.0;
      const double d = params_.delta;
      double la = post ? d : d - 1.0;     // exponent of x
      double lb = post ? d - 1.0 : d;     // exponent of 1-x
      return std::exp(la * std::log(x) + lb * std::log1p(-x) -
                      special::log_beta(d + (post ? 1.0 : 0.0),
                                        d + (post ? 0.0 : 1.0)));
    }
    case Family::ExpShift: {
      if (x < 0.0) return 0.0;
      double mean = post ? 1.0 + params_.theta : 1.0;
      return std::exp(-x / mean) / mean;
    }
    case Family::UniformToBeta:
      if (x < 0.0 || x > 1.0) return 0.0;
      return post ? 2.0 * x : 1.0;
    case Family::ExpDouble:
      if (x < 0.0) return 0.0;
      return post ? 2.0 * std::exp(-2.0 * x) : std::exp(-x);
  }
  return 0.0;
}

double Model::lr(double x) const {
  switch (params_.family) {
    case Family::Beta2Beta:
      if (x < 0.0 || x > 1.0)
        throw DomainError("beta2beta: observation outside [0,1]");
      if (x >= 1.0) return kInf;
      return x / (1.0 - x);
    case Family::ExpShift: {
      if (x < 0.0) throw DomainError("expshift: observation must be >= 0");
      const double th = params_.theta;
      return std::exp(x * th / (1.0 + th)) / (1.0 + th);
    }
    case Family::UniformToBeta:
      if (x < 0.0 || x > 1.0)
        throw DomainError("uniform2beta: observation outside [0,1]");
      return 2.0 * x;
    case Family::ExpDouble:
      if (x < 0.0) throw DomainError("expdouble: observation must be >= 0");
      return 2.0 * std::exp(-x);
  }
  return 0.0;
}

double Model::lr_cdf(double t, Regime regime) const {
  if (t <= 0.0) return 0.0;
  const bool post = regime == Regime::Post;
  switch (params_.family) {
    case Family::Beta2Beta: {
      const double d = params_.delta;
      const double z = t / (1.0 + t);
      return post ? special::inc_beta(d + 1.0, d, z)
                  : special::inc_beta(d, d + 1.0, z);
    }
    case Family::ExpShift: {
      // P(lr <= t) has a power tail; below the lower endpoint of the lr
      // support the cdf is zero.
      const double t0 = 1.0 / (1.0 + params_.theta);
      if (t <= t0) return 0.0;
      double expo = post ? beta_ - 1.0 : beta_;
      double coef = post ? c_ * (1.0 + params_.theta) : c_;
      return 1.0 - coef * std::pow(t, -expo);
    }
    case Family::UniformToBeta:
    case Family::ExpDouble: {
      if (t >= 2.0) return 1.0;
      return post ? t * t / 4.0 : t / 2.0;
    }
  }
  return 0.0;
}

double Model::lr_pdf(double t, Regime regime) const {
  if (t <= 0.0) return 0.0;
  const bool post = regime == Regime::Post;
  switch (params_.family) {
    case Family::Beta2Beta: {
      const double d = params_.delta;
      // Beta-prime densities t^(d-1+post) (1+t)^(-2d-1) / B(d, d+1).
      double lognum = (post ? d : d - 1.0) * std::log(t) -
                      (2.0 * d + 1.0) * std::log1p(t);
      return std::exp(lognum - special::log_beta(d, d + 1.0));
    }
    case Family::ExpShift: {
      const double t0 = 1.0 / (1.0 + params_.theta);
      if (t < t0) return 0.0;
      double expo = post ? beta_ - 1.0 : beta_;
      double coef = post ? c_ * (1.0 + params_.theta) : c_;
      return coef * expo * std::pow(t, -expo - 1.0);
    }
    case Family::UniformToBeta:
    case Family::ExpDouble:
      if (t >= 2.0) return 0.0;
      return post ? t / 2.0 : 0.5;
  }
  return 0.0;
}

double Model::lr_partial_mean(double t, Regime regime) const {
  if (t <= 0.0) return 0.0;
  if (regime == Regime::Pre) {
    // Change of measure: u dP_pre(u) = dP_post(u), so the pre-change
    // partial mean is the post-change cdf, for every model.
    return lr_cdf(t, Regime::Post);
  }
  switch (params_.family) {
    case Family::Beta2Beta: {
      const double d = params_.delta;
      const double z = t / (1.0 + t);
      if (std::abs(d - 1.0) < 1e-8) {
        // int_0^t u^2 (1+u)^-3 du / B(2,1), closed form at delta = 1.
        const double ot = 1.0 / (1.0 + t);
        return 2.0 * (std::log1p(t) + 2.0 * ot - 0.5 * ot * ot - 1.5);
      }
      return special::partial_beta(d + 2.0, d - 1.0, z) /
             std::exp(special::log_beta(d + 1.0, d));
    }
    case Family::ExpShift: {
      const double t0 = 1.0 / (1.0 + params_.theta);
      if (t <= t0) return 0.0;
      const double coef = beta_ * c_;  // post pdf is beta c t^-beta
      if (std::abs(beta_ - 2.0) < 1e-12) return coef * std::log(t / t0);
      return coef * (std::pow(t0, 2.0 - beta_) - std::pow(t, 2.0 - beta_)) /
             (beta_ - 2.0);
    }
    case Family::UniformToBeta:
    case Family::ExpDouble: {
      double tc = std::min(t, 2.0);
      return tc * tc * tc / 6.0;
    }
  }
  return 0.0;
}

double Model::lr_sup() const {
  switch (params_.family) {
    case Family::UniformToBeta:
    case Family::ExpDouble:
      return 2.0;
    default:
      return kInf;
  }
}

double Model::kl() const {
  switch (params_.family) {
    case Family::Beta2Beta:
      return 1.0 / params_.delta;
    case Family::ExpShift:
      return params_.theta - std::log1p(params_.theta);
    case Family::UniformToBeta:
    case Family::ExpDouble:
      return std::log(2.0) - 0.5;
  }
  return 0.0;
}

double Model::sample(rng::Stream& s, Regime regime) const {
  const bool post = regime == Regime::Post;
  switch (params_.family) {
    case Family::Beta2Beta: {
      const double d = params_.delta;
      return post ? rng::beta(s, d + 1.0, d) : rng::beta(s, d, d + 1.0);
    }
    case Family::ExpShift:
      return (post ? 1.0 + params_.theta : 1.0) * rng::exponential(s);
    case Family::UniformToBeta:
      return post ? std::sqrt(s.uniform01()) : s.uniform01();
    case Family::ExpDouble:
      return post ? 0.5 * rng::exponential(s) : rng::exponential(s);
  }
  return 0.0;
}

Family family_from_string(const std::string& tag) {
  if (tag == "beta2beta") return Family::Beta2Beta;
  if (tag == "expshift") return Family::ExpShift;
  if (tag == "uniform2beta") return Family::UniformToBeta;
  if (tag == "expdouble") return Family::ExpDouble;
  throw DomainError("unknown model family: " + tag);
}

std::string to_string(Family f) {
  switch (f) {
    case Family::Beta2Beta:
      return "beta2beta";
    case Family::ExpShift:
      return "expshift";
    case Family::UniformToBeta:
      return "uniform2beta";
    case Family::ExpDouble:
      return "expdouble";
  }
  return "?";
}

}  // namespace qd::models
