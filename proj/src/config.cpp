#include "radkin/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace radkin {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::string fmt_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::optional<double> parse_double(const std::string& s) {
  double x = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, x);
  if (r.ec != std::errc() || r.ptr != e || !std::isfinite(x)) return std::nullopt;
  return x;
}

std::optional<long long> parse_int(const std::string& s) {
  long long x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

std::optional<bool> parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  return std::nullopt;
}

std::optional<CutOff> parse_cutoff(const std::string& s) {
  if (s == "none") return CutOff{};
  const auto x = parse_double(s);
  if (!x) return std::nullopt;
  return CutOff{*x};
}

std::string fmt_cutoff(const CutOff& c) { return c ? fmt_double(*c) : "none"; }

template <class T, class P, class F>
std::optional<std::vector<T>> parse_list(const std::string& s, P parse, F convert) {
  std::vector<T> out;
  for (const auto& item : split(s, ',')) {
    const auto v = parse(item);
    if (!v) return std::nullopt;
    out.push_back(convert(*v));
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

using Getter = std::function<std::string(const RunConfig&)>;
/// Returns an error message (without the key) or nothing.
using Setter = std::function<std::optional<std::string>(RunConfig&, const std::string&)>;

struct Entry {
  std::string key;
  Getter get;
  Setter set;
};

Entry real(const std::string& key, double RunConfig::*member) {
  return {key, [member](const RunConfig& c) { return fmt_double(c.*member); },
          [member](RunConfig& c, const std::string& v) -> std::optional<std::string> {
            const auto x = parse_double(v);
            if (!x) return "expected a finite number, got '" + v + "'";
            c.*member = *x;
            return std::nullopt;
          }};
}

template <class Sub>
Entry real(const std::string& key, Sub RunConfig::*sub, double Sub::*member) {
  return {key, [sub, member](const RunConfig& c) { return fmt_double(c.*sub.*member); },
          [sub, member](RunConfig& c, const std::string& v) -> std::optional<std::string> {
            const auto x = parse_double(v);
            if (!x) return "expected a finite number, got '" + v + "'";
            c.*sub.*member = *x;
            return std::nullopt;
          }};
}

template <class Sub>
Entry boolean(const std::string& key, Sub RunConfig::*sub, bool Sub::*member) {
  return {key, [sub, member](const RunConfig& c) { return std::string(c.*sub.*member ? "true" : "false"); },
          [sub, member](RunConfig& c, const std::string& v) -> std::optional<std::string> {
            const auto x = parse_bool(v);
            if (!x) return "expected true or false, got '" + v + "'";
            c.*sub.*member = *x;
            return std::nullopt;
          }};
}

template <class Sub>
Entry text(const std::string& key, Sub RunConfig::*sub, std::string Sub::*member) {
  return {key, [sub, member](const RunConfig& c) { return c.*sub.*member; },
          [sub, member](RunConfig& c, const std::string& v) -> std::optional<std::string> {
            c.*sub.*member = v;
            return std::nullopt;
          }};
}

template <class Sub>
Entry cutoff(const std::string& key, Sub RunConfig::*sub, CutOff Sub::*member) {
  return {key, [sub, member](const RunConfig& c) { return fmt_cutoff(c.*sub.*member); },
          [sub, member](RunConfig& c, const std::string& v) -> std::optional<std::string> {
            const auto x = parse_cutoff(v);
            if (!x) return "expected a number or none, got '" + v + "'";
            c.*sub.*member = *x;
            return std::nullopt;
          }};
}

Entry integer(const std::string& key, int RunConfig::*member) {
  return {key, [member](const RunConfig& c) { return std::to_string(c.*member); },
          [member](RunConfig& c, const std::string& v) -> std::optional<std::string> {
            const auto x = parse_int(v);
            if (!x || *x < -1000000000LL || *x > 1000000000LL) return "expected an integer, got '" + v + "'";
            c.*member = static_cast<int>(*x);
            return std::nullopt;
          }};
}

Entry vec3(const std::string& key, Vec3 InitialSpec::*member) {
  return {key,
          [member](const RunConfig& c) {
            const Vec3& v = c.initial.*member;
            return fmt_double(v.x) + "," + fmt_double(v.y) + "," + fmt_double(v.z);
          },
          [member](RunConfig& c, const std::string& v) -> std::optional<std::string> {
            const auto xs = parse_list<double>(v, parse_double, [](double x) { return x; });
            if (!xs || xs->size() != 3) return "expected three comma-separated numbers, got '" + v + "'";
            c.initial.*member = Vec3((*xs)[0], (*xs)[1], (*xs)[2]);
            return std::nullopt;
          }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back({"experiment", [](const RunConfig& c) { return to_string(c.kind); },
                 [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
                   const auto k = parse_kind(v);
                   if (!k) return "unknown experiment '" + v + "'";
                   c.kind = *k;
                   return std::nullopt;
                 }});
    t.push_back(real("params.eps0", &RunConfig::params, &Params::eps0));
    t.push_back(real("params.c0_kernel", &RunConfig::params, &Params::c0_kernel));
    t.push_back(real("params.a0", &RunConfig::params, &Params::a0));
    t.push_back(real("params.b0", &RunConfig::params, &Params::b0));
    t.push_back(real("params.eps_scale", &RunConfig::params, &Params::eps_scale));
    t.push_back(real("params.tol_newton", &RunConfig::params, &Params::tol_newton));
    t.push_back(real("params.tol_conservation", &RunConfig::params, &Params::tol_conservation));
    t.push_back(integer("grid.n", &RunConfig::grid_n));
    t.push_back(real("grid.half_width", &RunConfig::half_width));
    t.push_back(integer("grid.sphere_nodes", &RunConfig::sphere_nodes));
    t.push_back(text("initial.preset", &RunConfig::initial, &InitialSpec::preset));
    t.push_back(real("initial.amplitude", &RunConfig::initial, &InitialSpec::amplitude));
    t.push_back(real("initial.k", &RunConfig::initial, &InitialSpec::k));
    t.push_back(vec3("initial.u", &InitialSpec::u));
    t.push_back(real("initial.shift", &RunConfig::initial, &InitialSpec::shift));
    t.push_back(vec3("initial.axes", &InitialSpec::axes));
    t.push_back(real("initial.mass", &RunConfig::initial, &InitialSpec::mass));
    t.push_back(real("initial.lambda", &RunConfig::initial, &InitialSpec::lambda));
    t.push_back(text("initial.remainder", &RunConfig::initial, &InitialSpec::remainder));
    t.push_back(real("initial.remainder_fraction", &RunConfig::initial, &InitialSpec::remainder_fraction));
    t.push_back(real("relaxation.a", &RunConfig::relaxation, &RelaxationConfig::a));
    t.push_back(real("relaxation.c0", &RunConfig::relaxation, &RelaxationConfig::c0));
    t.push_back(real("relaxation.tau_end", &RunConfig::relaxation, &RelaxationConfig::tau_end));
    t.push_back(real("relaxation.dtau", &RunConfig::relaxation, &RelaxationConfig::dtau));
    t.push_back(boolean("relaxation.full_state", &RunConfig::relaxation, &RelaxationConfig::full_state));
    t.push_back({"convergence.eps", [](const RunConfig& c) { return join(c.convergence.eps, fmt_double); },
                 [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
                   const auto xs = parse_list<double>(v, parse_double, [](double x) { return x; });
                   if (!xs) return "expected comma-separated numbers, got '" + v + "'";
                   c.convergence.eps = *xs;
                   return std::nullopt;
                 }});
    t.push_back(real("convergence.s", &RunConfig::convergence, &ConvergenceConfig::s));
    t.push_back(real("convergence.t_end", &RunConfig::convergence, &ConvergenceConfig::t_end));
    t.push_back(real("convergence.dt_macro", &RunConfig::convergence, &ConvergenceConfig::dt_macro));
    t.push_back(boolean("convergence.zero_runs", &RunConfig::convergence, &ConvergenceConfig::zero_runs));
    t.push_back(real("convergence.energy_cap", &RunConfig::convergence, &ConvergenceConfig::energy_cap));
    t.push_back(cutoff("equilibrium.cutoff", &RunConfig::equilibrium, &EquilibriumConfig::cutoff));
    t.push_back(real("equilibrium.t_end", &RunConfig::equilibrium, &EquilibriumConfig::t_end));
    t.push_back(real("equilibrium.dt", &RunConfig::equilibrium, &EquilibriumConfig::dt));
    t.push_back(real("equilibrium.stall_rate", &RunConfig::equilibrium, &EquilibriumConfig::stall_rate));
    t.push_back({"moments.cutoffs", [](const RunConfig& c) { return join(c.moments.cutoffs, fmt_cutoff); },
                 [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
                   const auto xs = parse_list<CutOff>(v, parse_cutoff, [](CutOff x) { return x; });
                   if (!xs) return "expected comma-separated numbers or none, got '" + v + "'";
                   c.moments.cutoffs = *xs;
                   return std::nullopt;
                 }});
    t.push_back(real("moments.t_end", &RunConfig::moments, &MomentsConfig::t_end));
    t.push_back(real("moments.dt", &RunConfig::moments, &MomentsConfig::dt));
    t.push_back(real("moments.bound_factor", &RunConfig::moments, &MomentsConfig::bound_factor));
    t.push_back(text("run.system", &RunConfig::single, &SingleRunConfig::system));
    t.push_back(real("run.t_end", &RunConfig::single, &SingleRunConfig::t_end));
    t.push_back(real("run.dt", &RunConfig::single, &SingleRunConfig::dt));
    t.push_back(cutoff("run.cutoff", &RunConfig::single, &SingleRunConfig::cutoff));
    t.push_back({"run.store_every", [](const RunConfig& c) { return std::to_string(c.single.store_every); },
                 [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
                   const auto x = parse_int(v);
                   if (!x || *x < -1000000000LL || *x > 1000000000LL) return "expected an integer, got '" + v + "'";
                   c.single.store_every = static_cast<int>(*x);
                   return std::nullopt;
                 }});
    t.push_back({"output.dir", [](const RunConfig& c) { return c.output_dir; },
                 [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
                   c.output_dir = v;
                   return std::nullopt;
                 }});
    t.push_back({"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
                   std::uint64_t x = 0;
                   const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
                   if (r.ec != std::errc() || r.ptr != v.data() + v.size())
                     return "expected a nonnegative integer, got '" + v + "'";
                   c.seed = x;
                   return std::nullopt;
                 }});
    t.push_back(integer("threads", &RunConfig::threads));
    return t;
  }();
  return table;
}

const Entry* find_entry(const std::string& key) {
  for (const auto& e : entries())
    if (e.key == key) return &e;
  return nullptr;
}

void validate(const RunConfig& c, std::vector<std::string>& errors) {
  auto need = [&](bool ok, const std::string& key, const std::string& rule, const std::string& got) {
    if (!ok) errors.push_back(key + ": must be " + rule + " (got " + got + ")");
  };
  auto num = [&](const std::string& key, double x, bool ok, const std::string& rule) {
    need(ok, key, rule, fmt_double(x));
  };
  const Params& p = c.params;
  num("params.eps0", p.eps0, p.eps0 > 0.0, "positive");
  num("params.c0_kernel", p.c0_kernel, p.c0_kernel > 0.0, "positive");
  num("params.a0", p.a0, p.a0 > 0.0, "positive");
  num("params.b0", p.b0, p.b0 > 0.0, "positive");
  num("params.eps_scale", p.eps_scale, p.eps_scale > 0.0, "positive");
  num("params.tol_newton", p.tol_newton, p.tol_newton > 0.0 && p.tol_newton <= 1e-6, "in (0, 1e-6]");
  num("params.tol_conservation", p.tol_conservation, p.tol_conservation > 0.0, "positive");

  need(c.grid_n >= 2 && c.grid_n <= 64, "grid.n", "an integer in [2, 64]", std::to_string(c.grid_n));
  num("grid.half_width", c.half_width, c.half_width > 0.0, "positive");
  need(c.sphere_nodes == 6 || c.sphere_nodes == 12 || c.sphere_nodes == 20 || c.sphere_nodes == 32,
       "grid.sphere_nodes", "one of 6, 12, 20, 32", std::to_string(c.sphere_nodes));

  const InitialSpec& in = c.initial;
  need(in.preset == "maxwellian" || in.preset == "bimodal" || in.preset == "anisotropic", "initial.preset",
       "one of maxwellian, bimodal, anisotropic", "'" + in.preset + "'");
  num("initial.amplitude", in.amplitude, in.amplitude > 0.0, "positive");
  num("initial.k", in.k, in.k > 0.0, "positive");
  need(in.axes.x > 0.0 && in.axes.y > 0.0 && in.axes.z > 0.0, "initial.axes", "componentwise positive",
       fmt_double(in.axes.x) + "," + fmt_double(in.axes.y) + "," + fmt_double(in.axes.z));
  num("initial.mass", in.mass, in.mass >= 0.0, "nonnegative");
  num("initial.lambda", in.lambda, in.lambda >= 0.0 && in.lambda < 1.0, "in [0, 1)");
  need(in.remainder == "none" || in.remainder == "scaled", "initial.remainder", "one of none, scaled",
       "'" + in.remainder + "'");
  num("initial.remainder_fraction", in.remainder_fraction, in.remainder_fraction >= 0.0 && in.remainder_fraction < 1.0,
      "in [0, 1)");

  const RelaxationConfig& r = c.relaxation;
  num("relaxation.a", r.a, r.a > 0.0, "positive");
  num("relaxation.c0", r.c0, r.c0 >= 0.0, "nonnegative");
  num("relaxation.tau_end", r.tau_end, r.tau_end >= 0.0, "nonnegative");
  num("relaxation.dtau", r.dtau, r.dtau > 0.0, "positive");

  const ConvergenceConfig& cv = c.convergence;
  bool eps_ok = !cv.eps.empty();
  for (std::size_t i = 0; i < cv.eps.size(); ++i)
    eps_ok = eps_ok && cv.eps[i] > 0.0 && (i == 0 || cv.eps[i] < cv.eps[i - 1]);
  need(eps_ok, "convergence.eps", "a nonempty strictly decreasing list of positive values",
       "'" + join(cv.eps, fmt_double) + "'");
  num("convergence.s", cv.s, cv.s >= 0.0 && cv.s < cv.t_end, "in [0, convergence.t_end)");
  num("convergence.t_end", cv.t_end, cv.t_end > 0.0, "positive");
  num("convergence.dt_macro", cv.dt_macro, cv.dt_macro > 0.0, "positive");
  num("convergence.energy_cap", cv.energy_cap, cv.energy_cap > 0.0, "positive");

  const EquilibriumConfig& eq = c.equilibrium;
  need(!eq.cutoff || *eq.cutoff > 0.0, "equilibrium.cutoff", "positive or none", fmt_cutoff(eq.cutoff));
  num("equilibrium.t_end", eq.t_end, eq.t_end > 0.0, "positive");
  num("equilibrium.dt", eq.dt, eq.dt > 0.0, "positive");
  num("equilibrium.stall_rate", eq.stall_rate, eq.stall_rate >= 0.0, "nonnegative");

  const MomentsConfig& mo = c.moments;
  bool cut_ok = !mo.cutoffs.empty();
  for (const auto& n : mo.cutoffs) cut_ok = cut_ok && (!n || *n > 0.0);
  need(cut_ok, "moments.cutoffs", "a nonempty list of positive values or none", "'" + join(mo.cutoffs, fmt_cutoff) + "'");
  num("moments.t_end", mo.t_end, mo.t_end > 0.0, "positive");
  num("moments.dt", mo.dt, mo.dt > 0.0, "positive");
  num("moments.bound_factor", mo.bound_factor, mo.bound_factor >= 1.0, "at least 1");

  const SingleRunConfig& sr = c.single;
  need(sr.system == "limit" || sr.system == "full" || sr.system == "multirate", "run.system",
       "one of limit, full, multirate", "'" + sr.system + "'");
  num("run.t_end", sr.t_end, sr.t_end > 0.0, "positive");
  num("run.dt", sr.dt, sr.dt > 0.0, "positive");
  need(!sr.cutoff || *sr.cutoff > 0.0, "run.cutoff", "positive or none", fmt_cutoff(sr.cutoff));
  need(sr.store_every >= 1, "run.store_every", "at least 1", std::to_string(sr.store_every));

  need(!c.output_dir.empty(), "output.dir", "nonempty", "''");
  need(c.threads >= 1 && c.threads <= 256, "threads", "an integer in [1, 256]", std::to_string(c.threads));
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Relaxation: return "relaxation";
    case ExperimentKind::Convergence: return "convergence";
    case ExperimentKind::Equilibrium: return "equilibrium";
    case ExperimentKind::Moments: return "moments";
    case ExperimentKind::SingleRun: return "single-run";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::Relaxation, ExperimentKind::Convergence, ExperimentKind::Equilibrium,
                 ExperimentKind::Moments, ExperimentKind::SingleRun})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.push_back(e.key);
  return keys;
}

ConfigResult parse_config(const std::string& text, const std::vector<std::string>& overrides,
                          std::optional<ExperimentKind> expected) {
  ConfigResult result;
  auto& errors = result.errors;
  std::map<std::string, std::string> values;
  std::map<std::string, int> first_line;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!find_entry(key)) {
      errors.push_back(key + ": unknown key (line " + std::to_string(lineno) + ")");
      continue;
    }
    if (first_line.count(key)) {
      errors.push_back(key + ": duplicate key (lines " + std::to_string(first_line[key]) + " and " +
                       std::to_string(lineno) + ")");
      continue;
    }
    first_line[key] = lineno;
    values[key] = value;
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      errors.push_back("override '" + ov + "': expected key=value");
      continue;
    }
    const std::string key = trim(ov.substr(0, eq));
    if (!find_entry(key)) {
      errors.push_back(key + ": unknown key (override)");
      continue;
    }
    values[key] = trim(ov.substr(eq + 1));
  }

  if (!values.count("experiment")) {
    if (expected) values["experiment"] = to_string(*expected);
    else errors.push_back("experiment: missing required field");
  } else if (expected) {
    const auto k = parse_kind(values["experiment"]);
    if (k && *k != *expected)
      errors.push_back("experiment: config names '" + values["experiment"] + "' but '" + to_string(*expected) +
                       "' was requested");
  }

  RunConfig cfg;
  for (const auto& e : entries()) {
    const auto it = values.find(e.key);
    if (it == values.end()) continue;
    if (auto err = e.set(cfg, it->second)) errors.push_back(e.key + ": " + *err);
  }
  validate(cfg, errors);
  if (errors.empty()) result.config = cfg;
  return result;
}

std::string serialize_config(const RunConfig& config, bool include_output) {
  std::string s;
  for (const auto& e : entries()) {
    if (!include_output && e.key == "output.dir") continue;
    s += e.key + " = " + e.get(config) + "\n";
  }
  return s;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : serialize_config(config, false)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace radkin
