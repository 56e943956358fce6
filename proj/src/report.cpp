#include "radkin/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace radkin {

namespace {

Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Json vec(const Vec3& v) { return Json::array({number(v.x), number(v.y), number(v.z)}); }

Json cutoff_json(const CutOff& c) { return c ? number(*c) : Json(nullptr); }

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double x, int digits = 2) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
  return std::string(buf, r.ptr);
}

std::string tick_label(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 3);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

Json to_json(const ExpFit& fit) {
  Json j;
  j["ok"] = fit.ok;
  j["rate"] = number(fit.rate);
  j["amplitude"] = number(fit.amplitude);
  j["r2"] = number(fit.r2);
  j["points"] = fit.points;
  j["t_first"] = number(fit.t_first);
  j["t_last"] = number(fit.t_last);
  return j;
}

Json to_json(const RelaxationReport& r) {
  Json j;
  j["a"] = number(r.a);
  j["c0"] = number(r.c0);
  j["tau_end"] = number(r.tau_end);
  j["rho2_end"] = number(r.rho2_end);
  j["intensity_end"] = number(r.intensity_end);
  j["rho2_inf"] = number(r.rho2_inf);
  j["intensity_inf"] = number(r.intensity_inf);
  j["err_rho2"] = number(r.err_rho2);
  j["err_intensity"] = number(r.err_intensity);
  j["identity_residual"] = number(r.identity_residual);
  j["full_state"] = r.full_state;
  j["full_relation_residual"] = number(r.full_relation_residual);
  j["full_photon_spread"] = number(r.full_photon_spread);
  return j;
}

Json to_json(const ConvergenceReport& r) {
  Json j;
  j["eps_values"] = numbers(r.eps_values);
  j["sup_errors"] = numbers(r.sup_errors);
  j["slope_loglog"] = number(r.slope_loglog);
  j["slope_r2"] = number(r.slope_r2);
  j["s"] = number(r.s);
  j["t_end"] = number(r.t_end);
  j["kappa0"] = number(r.kappa0);
  j["energy0"] = number(r.energy0);
  j["energy_scale"] = number(r.energy_scale);
  j["delta0"] = number(r.delta0);
  j["w0_norm"] = number(r.w0_norm);
  j["limit_times"] = numbers(r.limit_times);
  j["limit_lambda"] = numbers(r.limit_lambda);
  Json runs = Json::array();
  for (const auto& e : r.runs) {
    Json x;
    x["eps"] = number(e.eps);
    x["sup_error"] = number(e.sup_error);
    x["sup_time"] = number(e.sup_time);
    x["plateau"] = number(e.plateau);
    x["transient"] = to_json(e.transient);
    x["transient_floor"] = number(e.transient_floor);
    x["plateau_zero"] = number(e.plateau_zero);
    x["max_zero"] = number(e.max_zero);
    x["max_roundtrip"] = number(e.max_roundtrip);
    x["failed"] = e.failed;
    x["failure"] = e.failure;
    x["failure_time"] = number(e.failure_time);
    runs.push_back(x);
  }
  j["runs"] = runs;
  return j;
}

Json to_json(const EquilibriumReport& r) {
  Json fit;
  fit["converged"] = r.fit.converged;
  fit["iterations"] = r.fit.iterations;
  fit["amplitude"] = number(r.fit.amplitude);
  fit["k"] = number(r.fit.k);
  fit["u"] = vec(r.fit.u);
  fit["lambda"] = number(r.fit.lambda);
  fit["residual"] = number(r.fit.residual);
  Json j;
  j["fit"] = fit;
  j["fit_failed"] = r.fit_failed;
  j["mass"] = number(r.mass);
  j["momentum"] = vec(r.momentum);
  j["energy"] = number(r.energy);
  j["t_end"] = number(r.t_end);
  j["stalled"] = r.stalled;
  j["l1_distance"] = number(r.l1_distance);
  j["lambda_end"] = number(r.lambda_end);
  j["lambda_error"] = number(r.lambda_error);
  j["aborted"] = r.aborted;
  j["abort_reason"] = r.abort_reason;
  return j;
}

Json to_json(const MomentReport& r) {
  Json pts = Json::array();
  for (const auto& p : r.points) {
    Json x;
    x["n"] = cutoff_json(p.n);
    x["l13_initial"] = number(p.l13_initial);
    x["l14_initial"] = number(p.l14_initial);
    x["sup_l13"] = number(p.sup_l13);
    x["sup_l14"] = number(p.sup_l14);
    x["max_l14_increase"] = number(p.max_l14_increase);
    x["aborted"] = p.aborted;
    pts.push_back(x);
  }
  Json j;
  j["points"] = pts;
  j["max_ratio"] = number(r.max_ratio);
  j["uniformly_bounded"] = r.uniformly_bounded;
  return j;
}

Json summary_json(const LimitTrajectory& t) {
  Json j;
  j["samples"] = t.times.size();
  j["t_end"] = t.times.empty() ? Json(nullptr) : number(t.times.back());
  j["aborted"] = t.aborted;
  j["abort_reason"] = t.abort_reason;
  j["lambda_clamps"] = t.clamp_events.size();
  if (!t.diagnostics.empty()) {
    const auto& a = t.diagnostics.front();
    const auto& b = t.diagnostics.back();
    j["mass_drift"] = number(std::abs(b.mass - a.mass) / std::abs(a.mass));
    j["energy_drift"] = number(std::abs(b.energy - a.energy) / std::abs(a.energy));
    j["entropy_initial"] = number(a.entropy);
    j["entropy_final"] = number(b.entropy);
    j["lambda_final"] = number(b.lambda);
  }
  return j;
}

Json summary_json(const FullTrajectory& t) {
  Json j;
  j["samples"] = t.times.size();
  j["t_end"] = t.times.empty() ? Json(nullptr) : number(t.times.back());
  j["aborted"] = t.aborted;
  j["abort_reason"] = t.abort_reason;
  if (!t.diagnostics.empty()) {
    const auto& a = t.diagnostics.front();
    const auto& b = t.diagnostics.back();
    j["mass_drift"] = number(std::abs(b.kappa - a.kappa) / std::abs(a.kappa));
    j["energy_drift"] = number(std::abs(b.energy - a.energy) / std::abs(a.energy));
    j["entropy_initial"] = number(a.entropy);
    j["entropy_final"] = number(b.entropy);
    double trunc = 0.0;
    for (const auto& d : t.diagnostics) trunc = std::max(trunc, d.truncation);
    j["max_truncation"] = number(trunc);
  }
  return j;
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw Error(ErrorKind::Domain, "csv_table: header and column counts differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw Error(ErrorKind::Domain, "csv_table: columns have different lengths");
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) s += (c ? "," : "") + format_number(columns[c][r]);
    s += '\n';
  }
  return s;
}

std::string render_svg(const ChartSpec& spec, const std::vector<Series>& series) {
  constexpr double W = 640, H = 420, left = 80, right = 150, top = 50, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0.0) && (!spec.log_y || y > 0.0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0;
  if (!(y0 <= y1)) y0 = 0.0, y1 = 1.0;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) {
    const double pad = std::max(std::abs(y0) * 0.05, 1e-12);
    y0 -= pad;
    y1 += pad;
  }
  auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - ty(y)) / (y1 - y0) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" style=\"fill:#ffffff\"/>\n";
  s += "<text x=\"" + fixed(left) + "\" y=\"24\" style=\"font:bold 15px sans-serif;fill:#000000\">" +
       xml_escape(spec.title) + "</text>\n";
  if (!spec.note.empty())
    s += "<text x=\"" + fixed(left) + "\" y=\"40\" style=\"font:10px monospace;fill:#555555\">" +
         xml_escape(spec.note) + "</text>\n";
  s += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(pw) + "\" height=\"" + fixed(ph) +
       "\" style=\"fill:none;stroke:#000000;stroke-width:1\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double gx = left + pw * k / 4.0, gy = top + ph - ph * k / 4.0;
    const double vx = spec.log_x ? std::pow(10.0, fx) : fx, vy = spec.log_y ? std::pow(10.0, fy) : fy;
    s += "<line x1=\"" + fixed(gx) + "\" y1=\"" + fixed(top + ph) + "\" x2=\"" + fixed(gx) + "\" y2=\"" +
         fixed(top + ph + 5) + "\" style=\"stroke:#000000\"/>\n";
    s += "<text x=\"" + fixed(gx) + "\" y=\"" + fixed(top + ph + 18) +
         "\" style=\"font:10px sans-serif;text-anchor:middle\">" + tick_label(vx) + "</text>\n";
    s += "<line x1=\"" + fixed(left - 5) + "\" y1=\"" + fixed(gy) + "\" x2=\"" + fixed(left) + "\" y2=\"" +
         fixed(gy) + "\" style=\"stroke:#000000\"/>\n";
    s += "<text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(gy + 3) +
         "\" style=\"font:10px sans-serif;text-anchor:end\">" + tick_label(vy) + "</text>\n";
  }
  s += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(H - 18) +
       "\" style=\"font:12px sans-serif;text-anchor:middle\">" + xml_escape(spec.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + fixed(top + ph / 2) + "\" transform=\"rotate(-90 18 " + fixed(top + ph / 2) +
       ")\" style=\"font:12px sans-serif;text-anchor:middle\">" + xml_escape(spec.y_label) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& ser = series[k];
    const std::string color = colors[k % 7];
    std::string pts;
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!usable(ser.x[i], ser.y[i])) continue;
      pts += fixed(px(ser.x[i])) + "," + fixed(py(ser.y[i])) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    s += "<polyline points=\"" + pts + "\" style=\"fill:none;stroke:" + color + ";stroke-width:1.5\"/>\n";
    const double ly = top + 14 + 18.0 * k;
    s += "<line x1=\"" + fixed(left + pw + 10) + "\" y1=\"" + fixed(ly) + "\" x2=\"" + fixed(left + pw + 30) +
         "\" y2=\"" + fixed(ly) + "\" style=\"stroke:" + color + ";stroke-width:2\"/>\n";
    s += "<text x=\"" + fixed(left + pw + 35) + "\" y=\"" + fixed(ly + 4) + "\" style=\"font:11px sans-serif\">" +
         xml_escape(ser.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Config, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Config, "failed writing '" + path.string() + "'");
}

}  // namespace radkin
