#pragma once

#include <functional>
#include <vector>

#include "qd/models.hpp"
#include "qd/rng.hpp"

namespace qd::procedures {

// Stopping-rule families sharing the recursion V_n = xi(V_{n-1}) * lr(X_n):
//   Shiryaev   xi(v) = (1+v)/(1-p), start pi/((1-pi) p)
//   SR         xi(v) = 1+v,         start 0
//   SRr        xi(v) = 1+v,         start r (deterministic head start)
//   SRP        xi(v) = 1+v,         start drawn from the quasi-stationary law
// All of them alarm at the first n >= 1 with V_n >= threshold.
enum class Kind { Shiryaev, SR, SRr, SRP };

struct Procedure {
  Kind kind = Kind::SR;
  double threshold = 0.0;
  double head_start = 0.0;  // SRr only
  double p = 0.0;           // Shiryaev only: geometric hazard of the change
  double pi = 0.0;          // Shiryaev only: prior mass already past the change
};

void validate(const Procedure& proc);

// The propagation map xi applied between observations.
double propagate(const Procedure& proc, double v);

// One statistic update.  Exact double arithmetic, no rescaling: callers
// that might run above ~1e280 should use run_detection, which carries the
// statistic in log space once it grows that large.
double step(const Procedure& proc, double v, double lr);

// Deterministic start value; throws for SRP, whose start is random.
double start_value(const Procedure& proc);

// Shiryaev only: Pr(change already in effect | data), given the current
// statistic value.
double posterior_probability(const Procedure& proc, double v);

struct DetectionResult {
  long stopping_time = -1;  // -1 when censored at the horizon
  bool alarm = false;
  std::vector<double> trajectory;  // V_1 .. V_last (capped at DBL_MAX)
};

// Feeds observations into the stopping rule one at a time.  next_obs is
// called exactly once per consumed observation and never after the alarm,
// so it can be wired to live data.
DetectionResult run_detection(const Procedure& proc, const models::Model& model,
                              const std::function<double()>& next_obs,
                              long horizon, double start);

struct CycleEstimate {
  double mean = 0.0;
  double se = 0.0;
  long cycles = 0;
};

// Repeated-alarm (multi-cyclic) detection delay with the change at nu:
// the rule restarts from its start value after every false alarm, and the
// reported quantity is the mean of T - nu for the first alarm past nu.
// start_sampler supplies the (possibly random) restart value; when empty,
// start_value(proc) is used.
CycleEstimate multicyclic_delay(const Procedure& proc,
                                const models::Model& model, long nu,
                                long n_reps, rng::Stream stream,
                                std::function<double(rng::Stream&)> start_sampler = {});

}  // namespace qd::procedures
