#include "qd/procedures.hpp"

#include <cmath>
#include <limits>

#include "qd/errors.hpp"

namespace qd::procedures {

namespace {

// Above this the detection loop switches to log-space propagation.
constexpr double kLinearCap = 1e280;
// Log-space values below this are safe to map back to linear space.
constexpr double kLogReturn = 600.0;

}  // namespace

void validate(const Procedure& proc) {
  if (!(proc.threshold > 0.0) || !std::isfinite(proc.threshold))
    throw DomainError("procedure: threshold must be positive and finite");
  if (proc.kind == Kind::SRr) {
    if (!(proc.head_start >= 0.0) || !std::isfinite(proc.head_start))
      throw DomainError("procedure: head start must be finite and >= 0");
  }
  if (proc.kind == Kind::Shiryaev) {
    if (!(proc.p > 0.0 && proc.p < 1.0))
      throw DomainError("procedure: p must lie in (0,1)");
    if (!(proc.pi >= 0.0 && proc.pi < 1.0))
      throw DomainError("procedure: pi must lie in [0,1)");
  }
}

double propagate(const Procedure& proc, double v) {
  if (proc.kind == Kind::Shiryaev) return (1.0 + v) / (1.0 - proc.p);
  return 1.0 + v;
}

double step(const Procedure& proc, double v, double lr) {
  return propagate(proc, v) * lr;
}

double start_value(const Procedure& proc) {
  switch (proc.kind) {
    case Kind::Shiryaev:
      return proc.pi / ((1.0 - proc.pi) * proc.p);
    case Kind::SR:
      return 0.0;
    case Kind::SRr:
      return proc.head_start;
    case Kind::SRP:
      throw DomainError(
          "procedure: SRP starts from a random draw; supply it explicitly");
  }
  return 0.0;
}

double posterior_probability(const Procedure& proc, double v) {
  if (proc.kind != Kind::Shiryaev)
    throw DomainError("posterior_probability: defined for Shiryaev only");
  return v / (v + 1.0 / proc.p);
}

DetectionResult run_detection(const Procedure& proc,
                              const models::Model& model,
                              const std::function<double()>& next_obs,
                              long horizon, double start) {
  validate(proc);
  if (horizon < 1) throw DomainError("run_detection: horizon must be >= 1");
  const double log_thresh = std::log(proc.threshold);
  const double log_omp =
      proc.kind == Kind::Shiryaev ? std::log1p(-proc.p) : 0.0;

  DetectionResult out;
  double v = start;
  bool logspace = false;
  for (long n = 1; n <= horizon; ++n) {
    double lr = model.lr(next_obs());
    bool hit;
    if (!logspace) {
      v = step(proc, v, lr);
      if (v > kLinearCap && v < proc.threshold) {
        logspace = true;
        v = std::log(v);
      }
      hit = !logspace && v >= proc.threshold;
      out.trajectory.push_back(logspace ? kLinearCap
                                        : std::min(v, std::numeric_limits<double>::max()));
    } else {
      // log xi(e^v) = v + log1p(e^-v); the correction underflows to zero
      // for the magnitudes that put us here.
      if (lr <= 0.0) {
        logspace = false;
        v = 0.0;
      } else {
        v = v + std::log1p(std::exp(-v)) - log_omp + std::log(lr);
        if (v < kLogReturn) {
          logspace = false;
          v = std::exp(v);
        }
      }
      hit = logspace ? v >= log_thresh : v >= proc.threshold;
      out.trajectory.push_back(
          logspace ? (v >= 709.0 ? std::numeric_limits<double>::max()
                                 : std::exp(v))
                   : v);
    }
    if (hit) {
      out.stopping_time = n;
      out.alarm = true;
      return out;
    }
  }
  return out;  // censored
}

CycleEstimate multicyclic_delay(
    const Procedure& proc, const models::Model& model, long nu, long n_reps,
    rng::Stream stream, std::function<double(rng::Stream&)> start_sampler) {
  validate(proc);
  if (nu < 0) throw DomainError("multicyclic_delay: nu must be >= 0");
  if (n_reps < 1) throw DomainError("multicyclic_delay: need n_reps >= 1");
  if (proc.kind == Kind::SRP && !start_sampler)
    throw DomainError("multicyclic_delay: SRP needs a start sampler");

  const long guard = nu + 100000000L;
  double sum = 0.0, sumsq = 0.0;
  for (long rep = 0; rep < n_reps; ++rep) {
    auto s = stream.substream(static_cast<std::uint64_t>(rep));
    auto fresh_start = [&]() {
      return start_sampler ? start_sampler(s) : start_value(proc);
    };
    double v = fresh_start();
    long n = 0;
    for (;;) {
      ++n;
      if (n > guard)
        throw NumericalError("multicyclic_delay: no detection before guard");
      double x = model.sample(
          s, n <= nu ? models::Regime::Pre : models::Regime::Post);
      v = step(proc, v, model.lr(x));
      if (v >= proc.threshold) {
        if (n > nu) break;   // genuine detection
        v = fresh_start();   // false alarm: restart the cycle
      }
    }
    double d = static_cast<double>(n - nu);
    sum += d;
    sumsq += d * d;
  }
  CycleEstimate est;
  est.cycles = n_reps;
  est.mean = sum / static_cast<double>(n_reps);
  if (n_reps > 1) {
    double var = (sumsq - sum * sum / static_cast<double>(n_reps)) /
                 static_cast<double>(n_reps - 1);
    est.se = std::sqrt(std::max(0.0, var) / static_cast<double>(n_reps));
  }
  return est;
}

}  // namespace qd::procedures
