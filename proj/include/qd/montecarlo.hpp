#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "qd/grid.hpp"
#include "qd/models.hpp"
#include "qd/procedures.hpp"
#include "qd/rng.hpp"

namespace qd::montecarlo {

// Simulation metrics.  Each one is a plain average over independent
// replications -- no variance reduction, no reuse of solver output -- so the
// estimates remain an independent check on the integral-equation results.
enum class Metric {
  Arl,       // E[T] with every observation pre-change
  Add,       // E[T - nu | T > nu] with the change after index nu
  PfaBayes,  // P(T <= nu) with nu drawn from the geometric change prior
  Stadd,     // multi-cyclic delay: restart after false alarms, change at nu
  LocalPfa,  // P(T <= k + m | T > k) with every observation pre-change
};

std::string metric_name(Metric metric);

// Metric-specific knobs; unused fields are ignored.
struct MetricParams {
  long nu = 0;            // Add / Stadd: change point.  LocalPfa: the index k.
  int window = 1;         // LocalPfa: the look-ahead m.
  double prior_p = 0.0;   // PfaBayes: per-step hazard of the change
  double prior_pi = 0.0;  // PfaBayes: prior mass on the change pre-dating the data
};

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(n_kept)
  long n_reps = 0;         // replications requested
  long n_kept = 0;         // replications surviving the conditioning event
  std::uint64_t seed = 0;
  Metric metric = Metric::Arl;
};

// Draws from a piecewise-constant density by inverse-CDF sampling; the usual
// use is starting SRP runs from a quasi-stationary law tabulated on a grid.
std::function<double(rng::Stream&)> make_density_sampler(
    const ocsolve::GridFunction& density);

// Estimates one metric for one stopping rule by straightforward simulation.
//
// Replication r consumes the dedicated substream r of the seed's stream, so
// the result is reproducible for a given (seed, n_reps) and independent of
// any batching or evaluation order.  Conditioned metrics (Add, LocalPfa)
// discard replications that miss the conditioning event and report the
// surviving count in n_kept; everywhere else n_kept == n_reps.
//
// start_sampler supplies the (possibly random) start value, and is required
// for SRP; when empty, the rule's deterministic start is used.  Throws
// DomainError for invalid arguments (n_reps < 1000 included) and
// NumericalError when a replication exceeds the run-length guard or the
// conditioning event never occurs.
MCEstimate mc_estimate(Metric metric, const procedures::Procedure& proc,
                       const models::Model& model, const MetricParams& params,
                       long n_reps, std::uint64_t seed,
                       std::function<double(rng::Stream&)> start_sampler = {});

}  // namespace qd::montecarlo
