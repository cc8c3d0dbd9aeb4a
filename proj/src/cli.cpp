#include "qd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qd/asymptotics.hpp"
#include "qd/config.hpp"
#include "qd/errors.hpp"
#include "qd/exactsolve.hpp"
#include "qd/models.hpp"
#include "qd/montecarlo.hpp"
#include "qd/ocsolve.hpp"
#include "qd/procedures.hpp"
#include "qd/report.hpp"
#include "qd/rng.hpp"

namespace qd::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240817;
constexpr long kDefaultGrid = 2000;

std::string single_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// ---- option plumbing -------------------------------------------------

// Flag values parsed by CLI11.  Presence is tracked through the parsed
// subcommand (cmd) so configuration-file values only fill in what the
// command line left unset: flag > QD_SEED (seed only) > config > default.
struct Opts {
  std::string config_path;
  std::string family;
  std::string proc = "sr-r";
  double delta = 1.0;
  double theta = 0.1;
  double r = 0.0;
  double p = 0.0;
  double pi = 0.0;
  double gamma = 0.0;
  double threshold = 0.0;
  double prior_p = 0.0;
  double prior_pi = 0.0;
  long grid = kDefaultGrid;
  std::uint64_t seed = kDefaultSeed;
  long reps = 40000;
  long nu_max = 20;
  long pfa_kmax = 10;
  long pfa_window = 1;
  long horizon = 0;
  long points = 50;
  long kmax = 200;
  long paths = 200000;
  bool exact = false;
  bool equalize = false;
  bool no_richardson = false;
  std::string out_path;
  std::string curve_path;
  std::string local_pfa_path;
  std::string trajectory_path;
  std::string in_path = "-";
  std::string suite = "beta-d1";
  std::string study;

  const CLI::App* cmd = nullptr;  // the parsed subcommand
  config::TomlTable file;         // loaded from --config, empty otherwise
};

bool flag_set(const Opts& o, const std::string& flag) {
  const CLI::Option* opt = o.cmd->get_option_no_throw(flag);
  return opt != nullptr && opt->count() > 0;
}

double num_setting(const Opts& o, const std::string& flag, double flag_value,
                   const std::string& key, double fallback) {
  if (flag_set(o, flag)) return flag_value;
  return config::get_number(o.file, key, fallback);
}

std::string str_setting(const Opts& o, const std::string& flag,
                        const std::string& flag_value, const std::string& key,
                        const std::string& fallback) {
  if (flag_set(o, flag)) return flag_value;
  return config::get_string(o.file, key, fallback);
}

long int_setting(const Opts& o, const std::string& flag, long flag_value,
                 const std::string& key, long fallback) {
  if (flag_set(o, flag)) return flag_value;
  double x = config::get_number(o.file, key, static_cast<double>(fallback));
  if (x != std::floor(x))
    throw DomainError("config key '" + key + "' must be an integer");
  return static_cast<long>(x);
}

std::uint64_t resolve_seed(const Opts& o) {
  if (flag_set(o, "--seed")) return o.seed;
  if (const char* env = std::getenv("QD_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw DomainError("QD_SEED must be a non-negative integer");
    return v;
  }
  if (config::has(o.file, "run.seed")) {
    double x = config::get_number(o.file, "run.seed", 0.0);
    if (x < 0 || x != std::floor(x))
      throw DomainError("config key 'run.seed' must be a non-negative integer");
    return static_cast<std::uint64_t>(x);
  }
  return kDefaultSeed;
}

long resolve_grid(const Opts& o, long fallback = kDefaultGrid) {
  long n = int_setting(o, "--grid", o.grid, "run.grid", fallback);
  if (n < 2 || n > 200000) throw DomainError("--grid must lie in [2, 200000]");
  return n;
}

std::string canonical_family(const std::string& tag) {
  if (tag == "beta" || tag == "beta2beta") return "beta2beta";
  if (tag == "exp-shift" || tag == "expshift") return "expshift";
  if (tag == "u2b" || tag == "uniform2beta") return "uniform2beta";
  if (tag == "exp-double" || tag == "expdouble") return "expdouble";
  throw DomainError("unknown model family: " + tag);
}

models::Model resolve_model(const Opts& o) {
  std::string tag = str_setting(o, "--model", o.family, "model.family", "");
  if (tag.empty())
    throw DomainError("model family is required (--model or model.family)");
  models::ModelParams mp;
  mp.family = models::family_from_string(canonical_family(tag));
  mp.delta = num_setting(o, "--delta", o.delta, "model.delta", 1.0);
  mp.theta = num_setting(o, "--theta", o.theta, "model.theta", 0.1);
  return models::Model(mp);
}

procedures::Kind resolve_kind(const Opts& o) {
  std::string tag = str_setting(o, "--proc", o.proc, "procedure.kind", "sr-r");
  if (tag == "shiryaev") return procedures::Kind::Shiryaev;
  if (tag == "sr") return procedures::Kind::SR;
  if (tag == "sr-r") return procedures::Kind::SRr;
  if (tag == "srp") return procedures::Kind::SRP;
  throw DomainError("unknown procedure kind: " + tag +
                    " (expected shiryaev, sr, sr-r, or srp)");
}

std::string kind_name(procedures::Kind k) {
  switch (k) {
    case procedures::Kind::Shiryaev: return "shiryaev";
    case procedures::Kind::SR: return "sr";
    case procedures::Kind::SRr: return "sr-r";
    case procedures::Kind::SRP: return "srp";
  }
  return "?";
}

struct Target {
  bool from_gamma = false;
  double gamma = 0.0;
  double threshold = 0.0;
};

// Exactly one of {gamma, threshold}.  Flags resolve as a pair before the
// configuration file is consulted, so a flag never silently combines with
// a configured value of the other kind.
Target resolve_target(const Opts& o) {
  Target t;
  bool fg = flag_set(o, "--gamma"), ft = flag_set(o, "--A");
  if (fg && ft) throw DomainError("give exactly one of --gamma or --A");
  if (fg || ft) {
    t.from_gamma = fg;
    t.gamma = o.gamma;
    t.threshold = o.threshold;
  } else {
    bool cg = config::has(o.file, "run.gamma");
    bool ct = config::has(o.file, "run.threshold");
    if (cg == ct)
      throw DomainError(
          "give exactly one of --gamma or --A (or run.gamma / run.threshold)");
    t.from_gamma = cg;
    t.gamma = config::get_number(o.file, "run.gamma", 0.0);
    t.threshold = config::get_number(o.file, "run.threshold", 0.0);
  }
  if (t.from_gamma && !(t.gamma > 1.0))
    throw DomainError("--gamma must exceed 1");
  if (!t.from_gamma && !(t.threshold > 0.0))
    throw DomainError("--A must be positive");
  return t;
}

json model_meta(const models::Model& m) {
  json j;
  j["family"] = models::to_string(m.params().family);
  if (m.params().family == models::Family::Beta2Beta)
    j["delta"] = m.params().delta;
  if (m.params().family == models::Family::ExpShift)
    j["theta"] = m.params().theta;
  return j;
}

json proc_meta(const procedures::Procedure& proc) {
  json j;
  j["kind"] = kind_name(proc.kind);
  j["threshold"] = proc.threshold;
  if (proc.kind == procedures::Kind::SRr) j["r"] = proc.head_start;
  if (proc.kind == procedures::Kind::Shiryaev) {
    j["p"] = proc.p;
    j["pi"] = proc.pi;
  }
  return j;
}

// Emits the {meta, report} envelope to stdout and, when a path was given,
// to a file.  The report is checked against its schema first so a
// malformed report is a loud internal failure, not a broken file.
void emit_json(const json& meta, const json& rep, const json& schema,
               const std::string& out_path, std::ostream& out) {
  auto errors = report::schema_check(rep, schema);
  if (!errors.empty())
    throw NumericalError("internal: report failed its schema: " + errors[0]);
  json envelope;
  envelope["meta"] = meta;
  envelope["report"] = rep;
  std::string text = report::stable_json(envelope);
  out << text;
  if (!out_path.empty()) report::write_file(out_path, text);
}

void emit_csv(const std::vector<std::string>& columns,
              const std::vector<std::vector<double>>& rows, const json& meta,
              const std::string& path) {
  report::write_file(path, report::csv_text(columns, rows, meta));
}

ocsolve::SolverOptions solver_opts(long grid) {
  ocsolve::SolverOptions opts;
  opts.n = static_cast<int>(grid);
  return opts;
}

// ---- calibrate -------------------------------------------------------

int cmd_calibrate(const Opts& o, std::ostream& out) {
  auto model = resolve_model(o);
  auto kind = resolve_kind(o);
  if (kind == procedures::Kind::Shiryaev)
    throw DomainError(
        "calibrate targets the mean time to false alarm, which applies to "
        "the sr, sr-r, and srp rules");
  double gamma = num_setting(o, "--gamma", o.gamma, "run.gamma", 0.0);
  if (!(gamma > 1.0))
    throw DomainError("calibrate needs --gamma greater than 1");
  auto opts = solver_opts(resolve_grid(o));

  procedures::Procedure proc;
  proc.kind = kind;
  double r = num_setting(o, "--r", o.r, "procedure.r", 0.0);
  if (r < 0.0) throw DomainError("--r must be >= 0");

  json rep;
  ocsolve::CalibrationResult cal;
  if (kind == procedures::Kind::SRP) {
    if (o.equalize) throw DomainError("--equalize applies to sr-r only");
    cal =
        ocsolve::calibrate(model, ocsolve::CalTarget::SrpArl, gamma, 0.0, opts);
    rep["start"] = "qsd";
  } else {
    double start = kind == procedures::Kind::SRr ? r : 0.0;
    if (o.equalize) {
      if (kind != procedures::Kind::SRr)
        throw DomainError("--equalize applies to sr-r only");
      // Alternate threshold calibration with the delay-equalizing head
      // start until the head start settles.
      for (int round = 0; round < 6; ++round) {
        cal = ocsolve::calibrate(model, ocsolve::CalTarget::ArlFromStart,
                                 gamma, start, opts);
        ocsolve::OcSolver solver(model, cal.threshold, opts);
        double next = ocsolve::equalizing_head_start(solver);
        bool settled =
            std::abs(next - start) <= 1e-3 * std::max(1.0, std::abs(start));
        start = next;
        if (settled) break;
      }
    } else {
      cal = ocsolve::calibrate(model, ocsolve::CalTarget::ArlFromStart, gamma,
                               start, opts);
    }
    if (kind == procedures::Kind::SRr) rep["head_start"] = start;
    rep["start"] = start;
    proc.head_start = start;
  }
  rep["threshold"] = cal.threshold;
  rep["target"] = gamma;
  rep["achieved"] = cal.value;
  rep["coarse_evaluations"] = cal.coarse_evaluations;
  rep["fine_evaluations"] = cal.fine_evaluations;

  proc.threshold = cal.threshold;
  json meta;
  meta["command"] = "calibrate";
  meta["version"] = report::kToolVersion;
  meta["grid"] = opts.n;
  meta["seed"] = resolve_seed(o);
  meta["model"] = model_meta(model);
  meta["procedure"] = proc_meta(proc);
  emit_json(meta, rep, report::calibration_schema(), o.out_path, out);
  return 0;
}

// ---- oc ----------------------------------------------------------------

struct NumericExtras {
  std::vector<double> local_pfas;  // k = 0 .. pfa_kmax
};

report::OCReport numeric_oc(const models::Model& model, procedures::Kind kind,
                            double threshold, double r,
                            const ocsolve::SolverOptions& opts, long nu_max,
                            long pfa_kmax, int pfa_window, bool richardson,
                            NumericExtras* extras = nullptr) {
  report::OCReport rep;
  rep.threshold = threshold;
  rep.grid_n = opts.n;
  ocsolve::OcSolver solver(model, threshold, opts);
  if (kind == procedures::Kind::SRP) {
    rep.start = solver.qsd_mean();
    rep.arl = solver.srp_arl();
    double d = solver.srp_delay();
    rep.add_curve.assign(static_cast<std::size_t>(nu_max) + 1, d);
    rep.add_inf = d;
    rep.j_p = d;
    rep.j_st = solver.srp_stationary_delay();
    rep.j_b = solver.lower_bound(rep.start);
    double flat = 1.0 - std::pow(solver.qsd_lambda(), pfa_window);
    rep.local_pfa_sup = flat;
    if (extras)
      extras->local_pfas.assign(static_cast<std::size_t>(pfa_kmax) + 1, flat);
  } else {
    rep.start = r;
    rep.arl = solver.arl(r);
    auto curve = solver.delay_curve(r);
    rep.add_inf = solver.limiting_delay();
    rep.j_p = std::max(curve.supremum, rep.add_inf);
    rep.j_st = solver.stationary_delay(r);
    rep.j_b = solver.lower_bound(r);
    rep.add_curve = curve.delay;
    rep.add_curve.resize(static_cast<std::size_t>(nu_max) + 1, rep.add_inf);
    auto pfas = solver.local_pfa(r, static_cast<int>(pfa_kmax), pfa_window);
    rep.local_pfa_sup = *std::max_element(pfas.begin(), pfas.end());
    if (extras) extras->local_pfas = std::move(pfas);
  }
  if (richardson) {
    ocsolve::SolverOptions half = opts;
    half.n = std::max(2, opts.n / 2);
    ocsolve::OcSolver coarse(model, threshold, half);
    double coarse_arl =
        kind == procedures::Kind::SRP ? coarse.srp_arl() : coarse.arl(r);
    rep.richardson_err = std::abs(rep.arl - coarse_arl) / rep.arl;
  }
  return rep;
}

report::OCReport exact_oc(procedures::Kind kind, double threshold, double r,
                          long nu_max, long pfa_kmax, int pfa_window,
                          NumericExtras* extras = nullptr) {
  report::OCReport rep;
  rep.threshold = threshold;
  if (kind == procedures::Kind::SRP) {
    rep.start = threshold / 2.0;  // the quasi-stationary law is uniform
    rep.arl = exactsolve::u2b_srp_arl(threshold);
    double d = exactsolve::u2b_add_limit(threshold);
    rep.add_curve.assign(static_cast<std::size_t>(nu_max) + 1, d);
    rep.add_inf = d;
    rep.j_p = d;
    rep.j_st = d;  // exact equalizer: stationary delay equals the flat delay
    rep.j_b = exactsolve::u2b_lower_bound(threshold, rep.start);
    double flat =
        1.0 - std::pow(exactsolve::u2b_qsd_lambda(threshold), pfa_window);
    rep.local_pfa_sup = flat;
    if (extras)
      extras->local_pfas.assign(static_cast<std::size_t>(pfa_kmax) + 1, flat);
  } else {
    rep.start = r;
    rep.arl = exactsolve::u2b_arl(threshold, r);
    double add0 = exactsolve::u2b_add0(threshold, r);
    double lim = exactsolve::u2b_add_limit(threshold);
    rep.add_curve.assign(static_cast<std::size_t>(nu_max) + 1, lim);
    rep.add_curve[0] = add0;
    rep.add_inf = lim;
    rep.j_p = std::max(add0, lim);
    rep.j_st = exactsolve::u2b_integral_delay(threshold, r) / rep.arl;
    rep.j_b = exactsolve::u2b_lower_bound(threshold, r);
    if (extras) {
      extras->local_pfas.clear();
      for (long k = 0; k <= pfa_kmax; ++k)
        extras->local_pfas.push_back(
            exactsolve::u2b_local_pfa(threshold, r, k, pfa_window));
    }
    rep.local_pfa_sup =
        std::max(exactsolve::u2b_local_pfa(threshold, r, 0, pfa_window),
                 exactsolve::u2b_local_pfa(threshold, r, 1, pfa_window));
  }
  return rep;
}

int cmd_oc(const Opts& o, std::ostream& out) {
  auto model = resolve_model(o);
  auto kind = resolve_kind(o);
  if (kind == procedures::Kind::Shiryaev)
    throw DomainError(
        "oc covers the sr, sr-r, and srp rules; bayesian characteristics "
        "come from --prior-p/--prior-pi on one of those reports");
  auto target = resolve_target(o);
  auto opts = solver_opts(resolve_grid(o));
  double r = kind == procedures::Kind::SRr
                 ? num_setting(o, "--r", o.r, "procedure.r", 0.0)
                 : 0.0;
  if (r < 0.0) throw DomainError("--r must be >= 0");
  if (o.nu_max < 1) throw DomainError("--nu-max must be >= 1");
  if (o.pfa_window < 1) throw DomainError("--pfa-window must be >= 1");
  if (o.pfa_kmax < 0) throw DomainError("--pfa-kmax must be >= 0");

  report::OCReport rep;
  NumericExtras extras;
  if (o.exact) {
    auto fam = model.params().family;
    if (fam != models::Family::UniformToBeta &&
        fam != models::Family::ExpDouble)
      throw DomainError(
          "--exact applies to the u2b / exp-double likelihood-ratio law");
    double threshold;
    if (target.from_gamma) {
      if (kind == procedures::Kind::SRP) {
        threshold = exactsolve::u2b_srp_threshold(target.gamma);
      } else if (kind == procedures::Kind::SRr) {
        if (flag_set(o, "--r"))
          throw DomainError(
              "the exact design couples the threshold and head start; give "
              "--A with --r, or --gamma alone");
        auto design = exactsolve::u2b_calibrate(target.gamma);
        threshold = design.threshold;
        r = design.head_start;
      } else {
        throw DomainError(
            "the exact route calibrates the sr-r design or the srp rule; "
            "give --A for plain sr");
      }
    } else {
      threshold = target.threshold;
    }
    rep = exact_oc(kind, threshold, r, o.nu_max, o.pfa_kmax,
                   static_cast<int>(o.pfa_window), &extras);
  } else {
    double threshold;
    if (target.from_gamma) {
      auto cal_target = kind == procedures::Kind::SRP
                            ? ocsolve::CalTarget::SrpArl
                            : ocsolve::CalTarget::ArlFromStart;
      threshold = ocsolve::calibrate(model, cal_target, target.gamma, r, opts)
                      .threshold;
    } else {
      threshold = target.threshold;
    }
    rep = numeric_oc(model, kind, threshold, r, opts, o.nu_max, o.pfa_kmax,
                     static_cast<int>(o.pfa_window), !o.no_richardson,
                     &extras);
  }

  json jrep = report::to_json(rep);
  bool want_prior = flag_set(o, "--prior-p") || flag_set(o, "--prior-pi") ||
                    config::has(o.file, "run.prior_p");
  if (want_prior) {
    if (o.exact)
      throw DomainError("--prior-p applies to the numeric route only");
    double pp = num_setting(o, "--prior-p", o.prior_p, "run.prior_p", 0.0);
    double ppi = num_setting(o, "--prior-pi", o.prior_pi, "run.prior_pi", 0.0);
    ocsolve::BayesOcSolver bayes(model, rep.threshold, pp, opts);
    jrep["pfa_bayes"] = bayes.pfa(ppi);
    jrep["add_bayes"] = bayes.add(ppi);
  }

  procedures::Procedure proc;
  proc.kind = kind;
  proc.threshold = rep.threshold;
  proc.head_start = kind == procedures::Kind::SRr ? r : 0.0;
  json meta;
  meta["command"] = "oc";
  meta["version"] = report::kToolVersion;
  meta["grid"] = opts.n;
  meta["seed"] = resolve_seed(o);
  meta["exact"] = o.exact;
  meta["model"] = model_meta(model);
  meta["procedure"] = proc_meta(proc);
  emit_json(meta, jrep, report::oc_report_schema(), o.out_path, out);

  if (!o.curve_path.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t nu = 0; nu < rep.add_curve.size(); ++nu)
      rows.push_back({static_cast<double>(nu), rep.add_curve[nu]});
    emit_csv({"nu", "add"}, rows, meta, o.curve_path);
  }
  if (!o.local_pfa_path.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < extras.local_pfas.size(); ++k)
      rows.push_back({static_cast<double>(k), extras.local_pfas[k]});
    emit_csv({"k", "pfa"}, rows, meta, o.local_pfa_path);
  }
  return 0;
}

// ---- detect ------------------------------------------------------------

int cmd_detect(const Opts& o, std::ostream& out, std::istream& in) {
  auto model = resolve_model(o);
  auto kind = resolve_kind(o);
  auto target = resolve_target(o);
  auto opts = solver_opts(resolve_grid(o));
  std::uint64_t seed = resolve_seed(o);

  procedures::Procedure proc;
  proc.kind = kind;
  proc.head_start = num_setting(o, "--r", o.r, "procedure.r", 0.0);
  proc.p = num_setting(o, "--p", o.p, "procedure.p", 0.0);
  proc.pi = num_setting(o, "--pi", o.pi, "procedure.pi", 0.0);

  if (target.from_gamma) {
    if (kind == procedures::Kind::Shiryaev)
      throw DomainError(
          "detect with --gamma calibrates an sr-family rule; give --A for "
          "the discounted rule");
    auto cal_target = kind == procedures::Kind::SRP
                          ? ocsolve::CalTarget::SrpArl
                          : ocsolve::CalTarget::ArlFromStart;
    double start = kind == procedures::Kind::SRr ? proc.head_start : 0.0;
    proc.threshold =
        ocsolve::calibrate(model, cal_target, target.gamma, start, opts)
            .threshold;
  } else {
    proc.threshold = target.threshold;
  }
  if (!(proc.threshold < 1e250))
    throw DomainError("detect: threshold too large to track in linear space");
  procedures::validate(proc);

  double start;
  if (kind == procedures::Kind::SRP) {
    // A quasi-stationary start needs the tabulated law; one reproducible
    // draw, controlled by the seed.
    ocsolve::OcSolver solver(model, proc.threshold, opts);
    auto sampler = montecarlo::make_density_sampler(solver.qsd_density());
    rng::Stream stream(seed);
    start = sampler(stream);
  } else {
    start = procedures::start_value(proc);
  }

  if (o.horizon < 0) throw DomainError("--horizon must be >= 0");
  bool keep_traj = !o.trajectory_path.empty();
  StreamDetection det;
  if (o.in_path == "-") {
    det = detect_stream(proc, model, in, o.horizon, start, keep_traj);
  } else {
    std::ifstream file(o.in_path);
    if (!file) throw DomainError("cannot open observation file: " + o.in_path);
    det = detect_stream(proc, model, file, o.horizon, start, keep_traj);
  }

  json rep;
  rep["alarm"] = det.alarm;
  rep["stopping_time"] = det.alarm ? json(det.stopping_time) : json(nullptr);
  rep["n_consumed"] = det.n_consumed;
  rep["threshold"] = proc.threshold;
  rep["start"] = start;
  rep["statistic"] = det.statistic ? json(*det.statistic) : json(nullptr);

  json meta;
  meta["command"] = "detect";
  meta["version"] = report::kToolVersion;
  meta["grid"] = opts.n;
  meta["seed"] = seed;
  meta["model"] = model_meta(model);
  meta["procedure"] = proc_meta(proc);
  emit_json(meta, rep, report::detection_schema(), o.out_path, out);

  if (keep_traj) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < det.trajectory.size(); ++i)
      rows.push_back({static_cast<double>(i + 1), det.trajectory[i]});
    emit_csv({"n", "v"}, rows, meta, o.trajectory_path);
  }
  return 0;
}

// ---- constants -----------------------------------------------------------

int cmd_constants(const Opts& o, std::ostream& out) {
  auto model = resolve_model(o);
  std::uint64_t seed = resolve_seed(o);
  if (o.kmax < 20) throw DomainError("--kmax must be >= 20");
  if (o.paths < 100000) throw DomainError("--paths must be >= 100000");

  auto c = asymptotics::asymptotic_constants(model, static_cast<int>(o.kmax),
                                             o.paths, rng::Stream(seed));
  json rep;
  rep["kl"] = {{"value", c.kl}, {"source", "closed-form"}};
  rep["overshoot"] = {{"zeta", c.overshoot.zeta},
                      {"zeta_se", c.overshoot.zeta_se},
                      {"varkappa", c.overshoot.varkappa},
                      {"varkappa_se", c.overshoot.varkappa_se},
                      {"zeta_tail", c.overshoot.zeta_tail},
                      {"varkappa_tail", c.overshoot.varkappa_tail},
                      {"tail_warning", c.overshoot.tail_warning},
                      {"n_paths", c.overshoot.n_paths},
                      {"k_max", c.overshoot.k_max},
                      {"source", "series-monte-carlo"}};
  if (c.beta_closed_forms)
    rep["closed_form"] = {{"c_inf", c.c_inf},
                          {"z1_sq", c.z1_sq},
                          {"r_star", c.r_star},
                          {"source", "closed-form"}};
  bool want_approx = flag_set(o, "--gamma") || config::has(o.file, "run.gamma");
  if (want_approx) {
    double gamma = num_setting(o, "--gamma", o.gamma, "run.gamma", 0.0);
    if (!(gamma > 1.0)) throw DomainError("--gamma must exceed 1");
    double r;
    if (flag_set(o, "--r")) {
      r = o.r;
      if (r < 0.0) throw DomainError("--r must be >= 0");
    } else if (c.beta_closed_forms) {
      r = static_cast<double>(std::lround(c.r_star));
    } else {
      throw DomainError(
          "first-order estimates need --r for this model family");
    }
    auto approx = asymptotics::approx_oc_at_gamma(c, gamma, r);
    json a;
    a["threshold"] = approx.threshold;
    a["arl"] = approx.arl;
    a["head_start"] = r;
    if (std::isfinite(approx.add_0)) {
      a["add_0"] = approx.add_0;
      a["add_inf"] = approx.add_inf;
      a["worst_add"] = approx.worst_add;
    } else {
      a["add_0"] = nullptr;
      a["add_inf"] = nullptr;
    }
    rep["approx"] = a;
  }

  json meta;
  meta["command"] = "constants";
  meta["version"] = report::kToolVersion;
  meta["seed"] = seed;
  meta["paths"] = o.paths;
  meta["k_max"] = o.kmax;
  meta["model"] = model_meta(model);
  emit_json(meta, rep, report::constants_schema(), o.out_path, out);
  return 0;
}

// ---- case-study ----------------------------------------------------------

// Reported thresholds are rounded to whole numbers when they are large
// enough that a fractional alarm level is spurious precision (the rounding
// moves the mean run length by well under the calibration tolerance).
double presentation_threshold(double threshold) {
  return threshold >= 10.0 ? static_cast<double>(std::lround(threshold))
                           : threshold;
}

int case_study_beta(const Opts& o, std::ostream& out) {
  double delta = num_setting(o, "--delta", o.delta, "model.delta", 1.0);
  models::ModelParams mp;
  mp.family = models::Family::Beta2Beta;
  mp.delta = delta;
  models::Model model(mp);
  double gamma = num_setting(o, "--gamma", o.gamma, "run.gamma", 0.0);
  if (!(gamma > 1.0))
    throw DomainError("case-study beta needs --gamma greater than 1");
  auto opts = solver_opts(resolve_grid(o));
  if (o.nu_max < 1) throw DomainError("--nu-max must be >= 1");

  // Closed-form equalizing head start, rounded to a whole unit.
  double r_star = asymptotics::head_start_beta(delta);
  double r = static_cast<double>(std::lround(r_star));

  // Head-started rule: calibrate, round the threshold for presentation,
  // and report the operating characteristics at the rounded threshold.
  auto cal_srr = ocsolve::calibrate(model, ocsolve::CalTarget::ArlFromStart,
                                    gamma, r, opts);
  double a_srr = presentation_threshold(cal_srr.threshold);
  report::OCReport srr =
      numeric_oc(model, procedures::Kind::SRr, a_srr, r, opts, o.nu_max,
                 o.pfa_kmax, static_cast<int>(o.pfa_window), !o.no_richardson);

  // Quasi-stationarity-started competitor at the same false-alarm target.
  auto cal_srp =
      ocsolve::calibrate(model, ocsolve::CalTarget::SrpArl, gamma, 0.0, opts);
  double a_srp = presentation_threshold(cal_srp.threshold);
  report::OCReport srp =
      numeric_oc(model, procedures::Kind::SRP, a_srp, 0.0, opts, o.nu_max,
                 o.pfa_kmax, static_cast<int>(o.pfa_window), !o.no_richardson);

  json rep;
  rep["delta"] = delta;
  rep["gamma"] = gamma;
  rep["head_start_exact"] = r_star;
  rep["head_start"] = r;
  rep["sr_r"] = report::to_json(srr);
  json jsrp = report::to_json(srp);
  jsrp["mu_q"] = srp.start;  // the quasi-stationary mean
  rep["srp"] = jsrp;

  json meta;
  meta["command"] = "case-study";
  meta["study"] = "beta";
  meta["version"] = report::kToolVersion;
  meta["grid"] = opts.n;
  meta["seed"] = resolve_seed(o);
  meta["model"] = model_meta(model);

  // Self-check: both nested reports must satisfy the OC schema.
  for (const char* key : {"sr_r", "srp"}) {
    auto errors = report::schema_check(rep[key], report::oc_report_schema());
    if (!errors.empty())
      throw NumericalError("internal: report failed its schema: " + errors[0]);
  }
  json envelope;
  envelope["meta"] = meta;
  envelope["report"] = rep;
  std::string text = report::stable_json(envelope);
  out << text;
  if (!o.out_path.empty()) report::write_file(o.out_path, text);

  if (!o.curve_path.empty()) {
    json cmeta = meta;
    cmeta["srp_add"] = srp.add_inf;
    cmeta["srp_threshold"] = a_srp;
    std::vector<std::vector<double>> rows;
    for (std::size_t nu = 0; nu < srr.add_curve.size(); ++nu)
      rows.push_back({static_cast<double>(nu), srr.add_curve[nu]});
    emit_csv({"nu", "add"}, rows, cmeta, o.curve_path);
  }
  return 0;
}

int case_study_u2b(const Opts& o, std::ostream& out) {
  if (o.points < 2 || o.points > 2000)
    throw DomainError("--points must lie in [2, 2000]");
  auto gammas = exactsolve::u2b_gamma_grid(static_cast<int>(o.points));
  auto rows = exactsolve::u2b_performance_curves(gammas);

  json rep;
  rep["gamma_max"] = exactsolve::u2b_gamma_max();
  rep["points"] = static_cast<long>(rows.size());
  json jrows = json::array();
  for (const auto& row : rows) {
    json j;
    j["gamma"] = row.gamma;
    j["threshold_srr"] = row.threshold_srr;
    j["head_start"] = row.head_start;
    j["threshold_srp"] = row.threshold_srp;
    j["jp_srr"] = row.jp_srr;
    j["jp_srp"] = row.jp_srp;
    j["jb"] = row.lower_bound;
    jrows.push_back(j);
  }
  rep["rows"] = jrows;

  json meta;
  meta["command"] = "case-study";
  meta["study"] = "u2b";
  meta["version"] = report::kToolVersion;
  meta["seed"] = resolve_seed(o);

  json envelope;
  envelope["meta"] = meta;
  envelope["report"] = rep;
  std::string text = report::stable_json(envelope);
  out << text;
  if (!o.out_path.empty()) report::write_file(o.out_path, text);

  if (!o.curve_path.empty()) {
    std::vector<std::vector<double>> crows;
    for (const auto& row : rows)
      crows.push_back({row.gamma, row.jp_srr, row.jp_srp, row.lower_bound});
    emit_csv({"gamma", "jp_srr", "jp_srp", "jb"}, crows, meta, o.curve_path);
  }
  return 0;
}

int cmd_case_study(const Opts& o, std::ostream& out) {
  if (o.study == "beta") return case_study_beta(o, out);
  if (o.study == "u2b") return case_study_u2b(o, out);
  throw DomainError("unknown case study: " + o.study +
                    " (expected beta or u2b)");
}

// ---- validate --------------------------------------------------------

struct CheckRow {
  std::string name;
  montecarlo::MCEstimate est;
  double solver = 0.0;
  double margin = 0.0;  // allowance for solver discretization bias
};

json run_checks(const std::vector<CheckRow>& rows, bool& all_pass) {
  json checks = json::array();
  all_pass = true;
  for (const auto& row : rows) {
    double gap = std::abs(row.est.value - row.solver);
    bool pass = gap <= 3.0 * row.est.std_error + row.margin;
    all_pass = all_pass && pass;
    json j;
    j["name"] = row.name;
    j["estimate"] = row.est.value;
    j["std_error"] = row.est.std_error;
    j["n_reps"] = row.est.n_reps;
    j["n_kept"] = row.est.n_kept;
    j["solver"] = row.solver;
    j["gap"] = gap;
    j["margin"] = row.margin;
    j["pass"] = pass;
    checks.push_back(j);
  }
  return checks;
}

std::vector<CheckRow> suite_beta_d1(long reps, std::uint64_t seed, long grid) {
  models::ModelParams mp;
  mp.family = models::Family::Beta2Beta;
  models::Model model(mp);
  const double a = 43.0, r = 2.0;
  ocsolve::OcSolver solver(model, a, solver_opts(grid));
  long half = std::max(1000L, reps / 2);

  procedures::Procedure proc;
  proc.kind = procedures::Kind::SRr;
  proc.threshold = a;
  proc.head_start = r;

  using montecarlo::Metric;
  using montecarlo::MetricParams;
  std::vector<CheckRow> rows;
  rows.push_back({"arl", mc_estimate(Metric::Arl, proc, model, {}, reps, seed),
                  solver.arl(r), 0.15});
  MetricParams nu0;
  nu0.nu = 0;
  rows.push_back(
      {"add_nu0", mc_estimate(Metric::Add, proc, model, nu0, half, seed + 1),
       solver.delay0(r), 0.02});
  MetricParams nu8;
  nu8.nu = 8;
  auto curve = solver.delay_curve(r, 40);
  rows.push_back(
      {"add_nu8", mc_estimate(Metric::Add, proc, model, nu8, half, seed + 2),
       curve.delay[8], 0.02});
  MetricParams far;
  far.nu = 2000;
  rows.push_back({"stadd",
                  mc_estimate(Metric::Stadd, proc, model, far,
                              std::max(1000L, reps / 20), seed + 3),
                  solver.stationary_delay(r), 0.02});
  MetricParams lp;
  lp.nu = 3;
  lp.window = 3;
  rows.push_back(
      {"local_pfa_k3_m3",
       mc_estimate(Metric::LocalPfa, proc, model, lp, reps, seed + 4),
       solver.local_pfa(r, 3, 3)[3], 2e-3});

  procedures::Procedure srp;
  srp.kind = procedures::Kind::SRP;
  srp.threshold = a;
  auto sampler = montecarlo::make_density_sampler(solver.qsd_density());
  rows.push_back(
      {"srp_arl",
       mc_estimate(Metric::Arl, srp, model, {}, half, seed + 5, sampler),
       solver.srp_arl(), 0.3});
  return rows;
}

std::vector<CheckRow> suite_bayes(long reps, std::uint64_t seed, long grid) {
  models::ModelParams mp;
  mp.family = models::Family::Beta2Beta;
  models::Model model(mp);
  const double a = 25.0, p = 0.05, pi = 0.1;
  ocsolve::BayesOcSolver solver(model, a, p, solver_opts(grid));

  procedures::Procedure proc;
  proc.kind = procedures::Kind::Shiryaev;
  proc.threshold = a;
  proc.p = p;
  proc.pi = pi;

  montecarlo::MetricParams params;
  params.prior_p = p;
  params.prior_pi = pi;
  std::vector<CheckRow> rows;
  rows.push_back({"pfa_bayes",
                  mc_estimate(montecarlo::Metric::PfaBayes, proc, model,
                              params, reps, seed),
                  solver.pfa(pi), 4e-3});
  return rows;
}

std::vector<CheckRow> suite_u2b(long reps, std::uint64_t seed, long grid) {
  models::ModelParams mp;
  mp.family = models::Family::UniformToBeta;
  models::Model model(mp);
  const double a = 1.5;

  procedures::Procedure proc;
  proc.kind = procedures::Kind::SRr;
  proc.threshold = a;
  proc.head_start = 0.0;

  using montecarlo::Metric;
  using montecarlo::MetricParams;
  std::vector<CheckRow> rows;
  rows.push_back({"arl", mc_estimate(Metric::Arl, proc, model, {}, reps, seed),
                  exactsolve::u2b_arl(a, 0.0), 1e-3});
  MetricParams nu0;
  nu0.nu = 0;
  rows.push_back(
      {"add_nu0", mc_estimate(Metric::Add, proc, model, nu0, reps, seed + 1),
       exactsolve::u2b_add0(a, 0.0), 1e-3});
  MetricParams lp;
  lp.nu = 1;
  lp.window = 1;
  rows.push_back(
      {"local_pfa_k1_m1",
       mc_estimate(Metric::LocalPfa, proc, model, lp, reps, seed + 2),
       exactsolve::u2b_local_pfa(a, 0.0, 1, 1), 1e-3});

  // Quasi-stationary start: for this law it is exactly uniform on [0, A].
  ocsolve::Grid qgrid = ocsolve::Grid::make(a, static_cast<int>(grid));
  auto sampler = montecarlo::make_density_sampler(
      ocsolve::GridFunction(qgrid, Eigen::VectorXd::Ones(qgrid.n)));
  procedures::Procedure srp;
  srp.kind = procedures::Kind::SRP;
  srp.threshold = a;
  rows.push_back(
      {"srp_arl",
       mc_estimate(Metric::Arl, srp, model, {}, reps, seed + 3, sampler),
       exactsolve::u2b_srp_arl(a), 1e-3});
  return rows;
}

int cmd_validate(const Opts& o, std::ostream& out) {
  std::uint64_t seed = resolve_seed(o);
  long reps = int_setting(o, "--reps", o.reps, "run.reps", 40000);
  if (reps < 1000) throw DomainError("--reps must be >= 1000");
  long grid = resolve_grid(o, 600);

  std::vector<CheckRow> rows;
  if (o.suite == "beta-d1")
    rows = suite_beta_d1(reps, seed, grid);
  else if (o.suite == "bayes")
    rows = suite_bayes(reps, seed, grid);
  else if (o.suite == "u2b")
    rows = suite_u2b(reps, seed, grid);
  else
    throw DomainError("unknown validation suite: " + o.suite +
                      " (expected beta-d1, bayes, or u2b)");

  bool all_pass = false;
  json checks = run_checks(rows, all_pass);
  json rep;
  rep["suite"] = o.suite;
  rep["pass"] = all_pass;
  rep["checks"] = checks;

  json meta;
  meta["command"] = "validate";
  meta["version"] = report::kToolVersion;
  meta["grid"] = grid;
  meta["seed"] = seed;
  meta["reps"] = reps;
  emit_json(meta, rep, report::validation_schema(), o.out_path, out);
  return all_pass ? 0 : 3;
}

// ---- wiring ------------------------------------------------------------

void add_model_options(CLI::App* cmd, Opts& o) {
  cmd->add_option("--model", o.family,
                  "model family: beta, exp-shift, u2b, exp-double");
  cmd->add_option("--delta", o.delta, "beta family parameter");
  cmd->add_option("--theta", o.theta, "exp-shift post-change shift");
}

void add_proc_options(CLI::App* cmd, Opts& o) {
  cmd->add_option("--proc", o.proc, "stopping rule: shiryaev, sr, sr-r, srp");
  cmd->add_option("--r", o.r, "head start of the sr-r rule");
  cmd->add_option("--p", o.p, "shiryaev change hazard");
  cmd->add_option("--pi", o.pi, "shiryaev prior mass on an early change");
}

void add_run_options(CLI::App* cmd, Opts& o, bool with_target) {
  cmd->add_option("--config", o.config_path, "TOML configuration file");
  if (with_target) {
    cmd->add_option("--gamma", o.gamma, "target mean time to false alarm");
    cmd->add_option("--A", o.threshold, "alarm threshold");
  }
  cmd->add_option("--grid", o.grid, "integral-equation grid cells");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out", o.out_path, "write the JSON report here");
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, std::istream& in) {
  CLI::App app{
      "operating characteristics of sequential change detection rules"};
  app.require_subcommand(1);
  Opts o;

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "find the threshold meeting a false-alarm target");
  add_model_options(calibrate, o);
  add_proc_options(calibrate, o);
  add_run_options(calibrate, o, false);
  calibrate->add_option("--gamma", o.gamma, "target mean time to false alarm");
  calibrate->add_flag("--equalize", o.equalize,
                      "iterate the head start to flatten the delay profile");

  CLI::App* oc = app.add_subcommand(
      "oc", "operating characteristics at a threshold or false-alarm target");
  add_model_options(oc, o);
  add_proc_options(oc, o);
  add_run_options(oc, o, true);
  oc->add_flag("--exact", o.exact,
               "closed-form route for the separable lr law");
  oc->add_option("--nu-max", o.nu_max, "last change point in the delay curve");
  oc->add_option("--pfa-kmax", o.pfa_kmax,
                 "largest k in the local false-alarm profile");
  oc->add_option("--pfa-window", o.pfa_window, "local false-alarm window m");
  oc->add_option("--prior-p", o.prior_p,
                 "geometric prior hazard for bayesian fields");
  oc->add_option("--prior-pi", o.prior_pi, "prior mass on an early change");
  oc->add_flag("--no-richardson", o.no_richardson,
               "skip the grid-doubling error estimate");
  oc->add_option("--curve", o.curve_path, "write the delay curve CSV here");
  oc->add_option("--local-pfa", o.local_pfa_path,
                 "write the local false-alarm profile CSV here");

  CLI::App* detect = app.add_subcommand(
      "detect", "run a rule over a newline-delimited observation stream");
  add_model_options(detect, o);
  add_proc_options(detect, o);
  add_run_options(detect, o, true);
  detect->add_option("--in", o.in_path, "observation file ('-' for stdin)");
  detect->add_option("--horizon", o.horizon,
                     "stop after this many observations (0: stream end)");
  detect->add_option("--emit-trajectory", o.trajectory_path,
                     "write the statistic trajectory CSV here");

  CLI::App* constants = app.add_subcommand(
      "constants", "renewal-theoretic constants and first-order estimates");
  add_model_options(constants, o);
  add_run_options(constants, o, false);
  constants->add_option("--gamma", o.gamma,
                        "also report first-order estimates at this target");
  constants->add_option("--r", o.r, "head start for the estimates");
  constants->add_option("--paths", o.paths, "random-walk paths per series");
  constants->add_option("--kmax", o.kmax, "series truncation depth");

  CLI::App* study =
      app.add_subcommand("case-study", "reproduce a packaged comparison");
  study->add_option("study", o.study, "beta or u2b")->required();
  study->add_option("--delta", o.delta, "beta family parameter");
  add_run_options(study, o, false);
  study->add_option("--gamma", o.gamma, "target mean time to false alarm");
  study->add_option("--points", o.points, "gamma grid size (u2b study)");
  study->add_option("--nu-max", o.nu_max,
                    "last change point in the delay curve");
  study->add_flag("--no-richardson", o.no_richardson,
                  "skip the grid-doubling error estimate");
  study->add_option("--curve", o.curve_path, "write the study CSV here");

  CLI::App* validate = app.add_subcommand(
      "validate", "simulation cross-checks of the solver outputs");
  add_run_options(validate, o, false);
  validate->add_option("--suite", o.suite, "beta-d1, bayes, or u2b");
  validate->add_option("--reps", o.reps, "replications per check");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("qd");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << single_line(e.what()) << "\n";
    return 2;
  }

  auto parsed = app.get_subcommands();
  o.cmd = parsed.at(0);
  if (!o.config_path.empty()) o.file = config::load_toml_file(o.config_path);

  if (o.cmd == calibrate) return cmd_calibrate(o, out);
  if (o.cmd == oc) return cmd_oc(o, out);
  if (o.cmd == detect) return cmd_detect(o, out, in);
  if (o.cmd == constants) return cmd_constants(o, out);
  if (o.cmd == study) return cmd_case_study(o, out);
  return cmd_validate(o, out);
}

}  // namespace

StreamDetection detect_stream(const procedures::Procedure& proc,
                              const models::Model& model, std::istream& in,
                              long horizon, double start,
                              bool keep_trajectory) {
  procedures::validate(proc);
  StreamDetection out;
  double v = start;
  std::string line;
  long lineno = 0;
  while (horizon == 0 || out.n_consumed < horizon) {
    if (!std::getline(in, line)) break;
    ++lineno;
    // Blank lines carry no observation and are skipped (a trailing newline
    // is near-universal in line-oriented data).
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    std::string tok = line.substr(b, e - b + 1);
    char* end = nullptr;
    double x = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(x))
      throw DomainError("observation stream line " + std::to_string(lineno) +
                        ": not a decimal value: '" + tok + "'");
    ++out.n_consumed;
    v = procedures::step(proc, v, model.lr(x));
    out.statistic = v;
    if (keep_trajectory) out.trajectory.push_back(v);
    if (v >= proc.threshold) {
      out.alarm = true;
      out.stopping_time = out.n_consumed;
      break;
    }
  }
  return out;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err, std::istream& in) {
  try {
    return run(args, out, err, in);
  } catch (const DomainError& e) {
    err << "error: " << single_line(e.what()) << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << single_line(e.what()) << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << single_line(e.what()) << "\n";
    return 3;
  }
}

}  // namespace qd::cli
