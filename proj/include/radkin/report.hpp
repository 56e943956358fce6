#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "radkin/experiments.hpp"
#include "radkin/full_solver.hpp"
#include "radkin/limit_solver.hpp"

namespace radkin {

using Json = nlohmann::ordered_json;

Json to_json(const ExpFit& fit);
Json to_json(const RelaxationReport& r);
Json to_json(const ConvergenceReport& r);
Json to_json(const EquilibriumReport& r);
Json to_json(const MomentReport& r);
Json summary_json(const LimitTrajectory& t);
Json summary_json(const FullTrajectory& t);

/// Shortest round-trip decimal form ("nan", "inf" for non-finite values).
std::string format_number(double x);

/// Header row plus one row per index; all columns must have equal length.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct ChartSpec {
  std::string title;
  std::string x_label, y_label;
  bool log_x = false, log_y = false;
  /// Small print under the title (the config hash).
  std::string note;
};

/// Self-contained SVG line chart. Non-positive values are dropped on log axes.
std::string render_svg(const ChartSpec& spec, const std::vector<Series>& series);

/// Write text verbatim (LF line endings); throws a Config error on I/O failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace radkin
