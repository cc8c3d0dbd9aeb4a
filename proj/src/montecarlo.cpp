#include "qd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qd/errors.hpp"

namespace qd::montecarlo {

namespace {

// Generous ceiling on a single run length; hitting it means the rule cannot
// reach its threshold in any reasonable time, which is reported as a
// numerical failure rather than silently censored.
constexpr long kRunGuard = 1000000000L;

struct Accumulator {
  double sum = 0.0;
  double sumsq = 0.0;
  long n = 0;

  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }

  double mean() const { return sum / static_cast<double>(n); }

  double se() const {
    if (n < 2) return 0.0;
    double var = (sumsq - sum * sum / static_cast<double>(n)) /
                 static_cast<double>(n - 1);
    return std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
};

double resolve_start(const procedures::Procedure& proc,
                     const std::function<double(rng::Stream&)>& start_sampler,
                     rng::Stream& stream) {
  if (start_sampler) return start_sampler(stream);
  return procedures::start_value(proc);
}

// Runs one replication with the change taking effect after index nu
// (nu >= horizon means pure pre-change) and returns the stopping time,
// or -1 when censored at the horizon.
long run_once(const procedures::Procedure& proc, const models::Model& model,
              long nu, long horizon, double start, rng::Stream& stream) {
  long consumed = 0;
  auto next_obs = [&]() {
    ++consumed;
    return model.sample(stream, consumed <= nu ? models::Regime::Pre
                                               : models::Regime::Post);
  };
  auto res = procedures::run_detection(proc, model, next_obs, horizon, start);
  return res.stopping_time;
}

MCEstimate estimate_arl(const procedures::Procedure& proc,
                        const models::Model& model, long n_reps,
                        rng::Stream& stream,
                        const std::function<double(rng::Stream&)>& sampler) {
  Accumulator acc;
  for (long rep = 0; rep < n_reps; ++rep) {
    auto s = stream.substream(static_cast<std::uint64_t>(rep));
    double start = resolve_start(proc, sampler, s);
    long t = run_once(proc, model, kRunGuard, kRunGuard, start, s);
    if (t < 0)
      throw NumericalError("mc: replication exceeded the run-length guard");
    acc.add(static_cast<double>(t));
  }
  MCEstimate est;
  est.value = acc.mean();
  est.std_error = acc.se();
  est.n_kept = acc.n;
  return est;
}

MCEstimate estimate_add(const procedures::Procedure& proc,
                        const models::Model& model, long nu, long n_reps,
                        rng::Stream& stream,
                        const std::function<double(rng::Stream&)>& sampler) {
  Accumulator acc;
  for (long rep = 0; rep < n_reps; ++rep) {
    auto s = stream.substream(static_cast<std::uint64_t>(rep));
    double start = resolve_start(proc, sampler, s);
    long t = run_once(proc, model, nu, kRunGuard, start, s);
    if (t < 0)
      throw NumericalError("mc: replication exceeded the run-length guard");
    if (t <= nu) continue;  // false alarm: outside the conditioning event
    acc.add(static_cast<double>(t - nu));
  }
  if (acc.n == 0)
    throw NumericalError(
        "mc: no replication survived the T > nu conditioning; "
        "increase n_reps or lower nu");
  MCEstimate est;
  est.value = acc.mean();
  est.std_error = acc.se();
  est.n_kept = acc.n;
  return est;
}

MCEstimate estimate_pfa_bayes(const procedures::Procedure& proc,
                              const models::Model& model,
                              const MetricParams& params, long n_reps,
                              rng::Stream& stream,
                              const std::function<double(rng::Stream&)>& sampler) {
  if (!(params.prior_p > 0.0 && params.prior_p < 1.0))
    throw DomainError("mc: prior_p must lie in (0,1)");
  if (!(params.prior_pi >= 0.0 && params.prior_pi < 1.0))
    throw DomainError("mc: prior_pi must lie in [0,1)");
  const double log_omp = std::log1p(-params.prior_p);
  Accumulator acc;
  for (long rep = 0; rep < n_reps; ++rep) {
    auto s = stream.substream(static_cast<std::uint64_t>(rep));
    // Change-point prior: mass prior_pi sits on "already in effect" (nu = 0
    // along with the k = 0 atom of the geometric law); otherwise nu is
    // geometric with hazard prior_p.
    long nu = 0;
    if (s.uniform01() >= params.prior_pi) {
      double u = s.uniform01();
      double k = std::floor(std::log(u) / log_omp);
      nu = k >= static_cast<double>(kRunGuard)
               ? kRunGuard
               : static_cast<long>(k);
    }
    double start = resolve_start(proc, sampler, s);
    // A false alarm requires T <= nu, so only nu observations matter.
    bool false_alarm = false;
    if (nu >= 1) {
      long t = run_once(proc, model, nu, nu, start, s);
      false_alarm = t >= 1;
    }
    acc.add(false_alarm ? 1.0 : 0.0);
  }
  MCEstimate est;
  est.value = acc.mean();
  est.std_error = acc.se();
  est.n_kept = acc.n;
  return est;
}

MCEstimate estimate_local_pfa(const procedures::Procedure& proc,
                              const models::Model& model,
                              const MetricParams& params, long n_reps,
                              rng::Stream& stream,
                              const std::function<double(rng::Stream&)>& sampler) {
  const long k = params.nu;
  const long m = params.window;
  Accumulator acc;
  for (long rep = 0; rep < n_reps; ++rep) {
    auto s = stream.substream(static_cast<std::uint64_t>(rep));
    double start = resolve_start(proc, sampler, s);
    // Only whether T lands in (k, k+m] matters, so k+m observations suffice;
    // a censored run means T > k + m.
    long t = run_once(proc, model, kRunGuard, k + m, start, s);
    if (t >= 1 && t <= k) continue;  // stopped too early: outside T > k
    acc.add(t >= 1 ? 1.0 : 0.0);
  }
  if (acc.n == 0)
    throw NumericalError(
        "mc: no replication survived the T > k conditioning; "
        "increase n_reps or lower k");
  MCEstimate est;
  est.value = acc.mean();
  est.std_error = acc.se();
  est.n_kept = acc.n;
  return est;
}

}  // namespace

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::Arl:
      return "arl";
    case Metric::Add:
      return "add";
    case Metric::PfaBayes:
      return "pfa_bayes";
    case Metric::Stadd:
      return "stadd";
    case Metric::LocalPfa:
      return "local_pfa";
  }
  throw DomainError("metric_name: unknown metric");
}

std::function<double(rng::Stream&)> make_density_sampler(
    const ocsolve::GridFunction& density) {
  const auto& grid = density.grid();
  const auto& vals = density.values();
  std::vector<double> cum(static_cast<std::size_t>(grid.n));
  double total = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    if (!(vals[j] >= 0.0))
      throw DomainError("density sampler: density must be non-negative");
    total += vals[j] * grid.h();
    cum[static_cast<std::size_t>(j)] = total;
  }
  if (!(total > 0.0))
    throw DomainError("density sampler: density must have positive mass");
  return [grid, cum, total](rng::Stream& stream) {
    double target = stream.uniform01() * total;
    auto it = std::lower_bound(cum.begin(), cum.end(), target);
    if (it == cum.end()) --it;
    auto j = static_cast<int>(it - cum.begin());
    double lo = j == 0 ? 0.0 : cum[static_cast<std::size_t>(j) - 1];
    double mass = cum[static_cast<std::size_t>(j)] - lo;
    double frac = mass > 0.0 ? (target - lo) / mass : 0.5;
    return grid.edge(j) + frac * grid.h();
  };
}

MCEstimate mc_estimate(Metric metric, const procedures::Procedure& proc,
                       const models::Model& model, const MetricParams& params,
                       long n_reps, std::uint64_t seed,
                       std::function<double(rng::Stream&)> start_sampler) {
  procedures::validate(proc);
  if (n_reps < 1000) throw DomainError("mc: need n_reps >= 1000");
  if (params.nu < 0) throw DomainError("mc: nu must be >= 0");
  if (proc.kind == procedures::Kind::SRP && !start_sampler)
    throw DomainError("mc: SRP runs need a start sampler");

  rng::Stream stream(seed);
  MCEstimate est;
  switch (metric) {
    case Metric::Arl:
      est = estimate_arl(proc, model, n_reps, stream, start_sampler);
      break;
    case Metric::Add:
      est = estimate_add(proc, model, params.nu, n_reps, stream, start_sampler);
      break;
    case Metric::PfaBayes:
      est = estimate_pfa_bayes(proc, model, params, n_reps, stream,
                               start_sampler);
      break;
    case Metric::Stadd: {
      auto cyc = procedures::multicyclic_delay(proc, model, params.nu, n_reps,
                                               stream, start_sampler);
      est.value = cyc.mean;
      est.std_error = cyc.se;
      est.n_kept = cyc.cycles;
      break;
    }
    case Metric::LocalPfa:
      if (params.window < 1) throw DomainError("mc: window must be >= 1");
      est = estimate_local_pfa(proc, model, params, n_reps, stream,
                               start_sampler);
      break;
  }
  est.n_reps = n_reps;
  est.seed = seed;
  est.metric = metric;
  return est;
}

}  // namespace qd::montecarlo
