#include "radkin/runner.hpp"

#include <filesystem>
#include <sstream>

#include "radkin/experiments.hpp"
#include "radkin/full_solver.hpp"
#include "radkin/limit_solver.hpp"
#include "radkin/manifold.hpp"
#include "radkin/presets.hpp"
#include "radkin/report.hpp"

namespace radkin {

namespace fs = std::filesystem;

namespace {

struct Writer {
  fs::path dir;
  std::string prefix;
  std::string hash;
  RunOutcome* outcome;

  std::string write(const std::string& suffix, const std::string& text) const {
    const fs::path p = dir / (prefix + suffix);
    write_text(p, text);
    outcome->files.push_back(p.string());
    return p.filename().string();
  }

  std::string chart(const std::string& suffix, ChartSpec spec, const std::vector<Series>& series) const {
    spec.note = "config " + hash;
    return write(suffix, render_svg(spec, series));
  }
};

Json config_json(const RunConfig& c) {
  Json j = Json::object();
  std::istringstream in(serialize_config(c, false));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

std::string label_eps(double eps) { return "eps=" + format_number(eps); }

std::string label_cut(const CutOff& n) { return n ? "n=" + format_number(*n) : "uncut"; }

void run_relaxation(const RunConfig& c, const Writer& w, Json& result, Json& files) {
  RelaxationOptions o;
  o.grid_n = c.grid_n;
  o.half_width = c.half_width;
  o.sphere_nodes = c.sphere_nodes;
  o.dtau = c.relaxation.dtau;
  o.full_state = c.relaxation.full_state;
  const RelaxationReport r = study_relaxation(c.relaxation.a, c.relaxation.c0, c.relaxation.tau_end, c.params, o);
  result = to_json(r);
  files.push_back(w.write("-series.csv", csv_table({"tau", "rho2", "intensity"}, {r.tau, r.rho2, r.intensity})));
  ChartSpec spec{"Fast subsystem relaxation", "tau", "value", false, false, ""};
  files.push_back(w.chart("-series.svg", spec, {{"rho2", r.tau, r.rho2}, {"I", r.tau, r.intensity}}));
}

int run_convergence(const RunConfig& c, const Writer& w, Json& result, Json& files) {
  const DiscPtr disc = make_discretization(c.grid_n, c.half_width, c.sphere_nodes);
  ManifoldState m = initial_manifold(c.initial, disc);
  const double scale = convergence_energy_scale(m, c.params, c.convergence.energy_cap);
  for (double& x : m.f) x *= scale;
  const double delta0 = default_guard_radius(mass_limit(m), energy_limit(m, c.params), c.params.eps0);
  const Remainder w0 = initial_remainder(c.initial, m, delta0);
  ConvergenceOptions o;
  o.dt_macro = c.convergence.dt_macro;
  o.zero_remainder_runs = c.convergence.zero_runs;
  o.energy_cap = c.convergence.energy_cap;
  ConvergenceReport r = study_convergence(m, w0, c.params, c.convergence.eps, c.convergence.s,
                                          c.convergence.t_end, o);
  r.energy_scale = scale;
  result = to_json(r);

  std::vector<double> rates, plateaus, floors, r2s, failed;
  for (const auto& e : r.runs) {
    rates.push_back(e.transient.rate);
    r2s.push_back(e.transient.r2);
    plateaus.push_back(e.plateau);
    floors.push_back(e.plateau_zero);
    failed.push_back(e.failed ? 1.0 : 0.0);
  }
  files.push_back(w.write("-errors.csv", csv_table({"eps", "sup_error", "plateau", "transient_rate", "transient_r2",
                                                    "plateau_zero", "failed"},
                                                   {r.eps_values, r.sup_errors, plateaus, rates, r2s, floors, failed})));
  std::vector<double> lam_t = r.limit_times;
  files.push_back(w.write("-limit.csv", csv_table({"t", "lambda"}, {lam_t, r.limit_lambda})));
  std::vector<Series> w_series;
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& e = r.runs[i];
    const std::string tag = "-eps" + std::to_string(i);
    std::vector<double> wz = e.w_norm_zero;
    if (wz.size() != e.times.size()) wz.assign(e.times.size(), std::nan(""));
    files.push_back(w.write(tag + ".csv", csv_table({"t", "error", "w_norm", "w_norm_zero"},
                                                     {e.times, e.error, e.w_norm, wz})));
    std::vector<double> dz = e.dense_w_zero, dd = e.dense_diff;
    if (dz.size() != e.dense_t.size()) dz.assign(e.dense_t.size(), std::nan(""));
    if (dd.size() != e.dense_t.size()) dd.assign(e.dense_t.size(), std::nan(""));
    files.push_back(w.write(tag + "-dense.csv", csv_table({"t", "w_norm", "w_norm_zero", "w_difference"},
                                                           {e.dense_t, e.dense_w, dz, dd})));
    w_series.push_back({label_eps(e.eps), e.dense_t, e.dense_w});
  }
  files.push_back(w.chart("-errors.svg", {"Sup error against eps", "eps", "sup error", true, true, ""},
                          {{"sup error", r.eps_values, r.sup_errors}}));
  files.push_back(w.chart("-remainder.svg", {"Remainder norm", "t", "||W||", false, true, ""}, w_series));

  int code = kExitOk;
  for (const auto& e : r.runs)
    if (e.failed) code = std::max(code, exit_code_for(e.failure_kind));
  return code;
}

int run_equilibrium(const RunConfig& c, const Writer& w, Json& result, Json& files) {
  const DiscPtr disc = make_discretization(c.grid_n, c.half_width, c.sphere_nodes);
  const ManifoldState m = initial_manifold(c.initial, disc);
  EquilibriumOptions o;
  o.dt = c.equilibrium.dt;
  o.stall_rate = c.equilibrium.stall_rate;
  const EquilibriumReport r = study_equilibrium(m, c.params, c.equilibrium.cutoff, c.equilibrium.t_end, o);
  result = to_json(r);
  files.push_back(w.write("-series.csv", csv_table({"t", "entropy", "lambda", "l1_distance"},
                                                   {r.times, r.entropy, r.lambda, r.l1_series})));
  files.push_back(w.chart("-entropy.svg", {"Entropy", "t", "H", false, false, ""}, {{"H", r.times, r.entropy}}));
  files.push_back(w.chart("-distance.svg", {"Relative L1 distance to the Maxwellian", "t", "distance", false, true, ""},
                          {{"distance", r.times, r.l1_series}}));
  if (r.aborted) return kExitNumerical;
  return kExitOk;
}

int run_moments(const RunConfig& c, const Writer& w, Json& result, Json& files) {
  const DiscPtr disc = make_discretization(c.grid_n, c.half_width, c.sphere_nodes);
  const ManifoldState m = initial_manifold(c.initial, disc);
  MomentOptions o;
  o.dt = c.moments.dt;
  o.bound_factor = c.moments.bound_factor;
  const MomentReport r = study_moment_bounds(m, c.params, c.moments.cutoffs, c.moments.t_end, o);
  result = to_json(r);
  std::vector<Series> series;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    files.push_back(w.write("-n" + std::to_string(i) + ".csv", csv_table({"t", "l13", "l14"}, {p.times, p.l13, p.l14})));
    series.push_back({label_cut(p.n), p.times, p.l14});
  }
  files.push_back(w.chart("-l14.svg", {"L1_4 norm", "t", "norm", false, false, ""}, series));
  for (const auto& p : r.points)
    if (p.aborted) return kExitNumerical;
  return kExitOk;
}

int run_single(const RunConfig& c, const Writer& w, Json& result, Json& files) {
  const DiscPtr disc = make_discretization(c.grid_n, c.half_width, c.sphere_nodes);
  const ManifoldState m = initial_manifold(c.initial, disc);
  const SingleRunConfig& s = c.single;
  std::ostringstream csv;
  if (s.system == "limit") {
    const LimitTrajectory t = run_limit(m, c.params, s.t_end, s.dt, s.cutoff, s.store_every);
    result = summary_json(t);
    write_limit_csv(csv, t);
    files.push_back(w.write("-trajectory.csv", csv.str()));
    std::vector<double> h;
    for (const auto& d : t.diagnostics) h.push_back(d.entropy);
    files.push_back(w.chart("-entropy.svg", {"Entropy", "t", "H", false, false, ""}, {{"H", t.times, h}}));
    return t.aborted ? exit_code_for(t.abort_kind) : kExitOk;
  }
  const double delta0 = default_guard_radius(mass_limit(m), energy_limit(m, c.params), c.params.eps0);
  const FullState y0 = compose(m, initial_remainder(c.initial, m, delta0));
  FullTrajectory t;
  if (s.system == "full") {
    FullStepOptions o;
    o.cutoff_n = s.cutoff;
    t = run_full(y0, c.params, s.t_end, s.dt, o);
  } else {
    t = run_multirate(y0, c.params, s.t_end, s.dt, s.cutoff);
  }
  result = summary_json(t);
  write_full_csv(csv, t);
  files.push_back(w.write("-trajectory.csv", csv.str()));
  std::vector<double> h;
  for (const auto& d : t.diagnostics) h.push_back(d.entropy);
  files.push_back(w.chart("-entropy.svg", {"Entropy", "t", "H", false, false, ""}, {{"H", t.times, h}}));
  return t.aborted ? exit_code_for(t.abort_kind) : kExitOk;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Guard: return kExitGuard;
    case ErrorKind::Domain:
    case ErrorKind::Numerical:
    case ErrorKind::Infeasible: return kExitNumerical;
  }
  return kExitNumerical;
}

RunOutcome run_experiment(const RunConfig& config) {
  RunOutcome out;
  out.config_hash = config_hash(config);
  const std::string kind = to_string(config.kind);
  Writer w{config.output_dir, kind + "-" + out.config_hash, out.config_hash, &out};

  std::error_code ec;
  fs::create_directories(w.dir, ec);
  if (ec || !fs::is_directory(w.dir)) {
    out.exit_code = kExitConfig;
    out.message = "cannot create output directory '" + config.output_dir + "'";
    return out;
  }
  const int saved_threads = default_threads();
  set_default_threads(config.threads);

  Json report;
  report["config_hash"] = out.config_hash;
  report["experiment"] = kind;
  report["config"] = config_json(config);
  Json result = Json::object();
  Json files = Json::array();
  try {
    w.write(".config", "# config " + out.config_hash + "\n" + serialize_config(config, false));
    switch (config.kind) {
      case ExperimentKind::Relaxation: run_relaxation(config, w, result, files); break;
      case ExperimentKind::Convergence: out.exit_code = run_convergence(config, w, result, files); break;
      case ExperimentKind::Equilibrium: out.exit_code = run_equilibrium(config, w, result, files); break;
      case ExperimentKind::Moments: out.exit_code = run_moments(config, w, result, files); break;
      case ExperimentKind::SingleRun: out.exit_code = run_single(config, w, result, files); break;
    }
    if (out.exit_code != kExitOk) out.message = kind + " finished with failures; see the report";
  } catch (const Error& e) {
    out.exit_code = exit_code_for(e.kind());
    out.message = e.what();
  }
  set_default_threads(saved_threads);

  report["status"] = out.exit_code == kExitOk ? "ok" : "failed";
  report["exit_code"] = out.exit_code;
  report["result"] = result;
  report["files"] = files;
  try {
    w.write(".json", report.dump(2) + "\n");
    if (out.exit_code != kExitOk) {
      Json f;
      f["config_hash"] = out.config_hash;
      f["experiment"] = kind;
      f["exit_code"] = out.exit_code;
      f["kind"] = out.exit_code == kExitGuard     ? "guard_violation"
                  : out.exit_code == kExitConfig ? "config_error"
                                                 : "numerical_failure";
      f["message"] = out.message;
      w.write("-failure.json", f.dump(2) + "\n");
    }
  } catch (const Error& e) {
    out.exit_code = kExitConfig;
    out.message = e.what();
  }
  return out;
}

}  // namespace radkin
