#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radkin/collision.hpp"
#include "radkin/core.hpp"

namespace radkin {

enum class ExperimentKind { Relaxation, Convergence, Equilibrium, Moments, SingleRun };

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(const std::string& name);

/// Initial data. Presets: maxwellian (A exp(-k|v-u|^2)), bimodal (two such
/// Gaussians centred at u +- shift e_x), anisotropic (A exp(-sum k_i (v_i-u_i)^2)).
struct InitialSpec {
  std::string preset = "maxwellian";
  double amplitude = 1.0;
  double k = 1.0;
  Vec3 u{};
  double shift = 1.2;
  Vec3 axes{1.0, 1.0, 1.0};
  /// When positive, F is rescaled to this discrete mass.
  double mass = 0.0;
  double lambda = 0.2;
  /// Remainder: none, or scaled (aF, -aF, a int F) with X norm fraction * delta0.
  std::string remainder = "none";
  double remainder_fraction = 0.25;
};

struct RelaxationConfig {
  double a = 1.0;
  double c0 = 1.0;
  double tau_end = 200.0;
  double dtau = 0.01;
  bool full_state = true;
};

struct ConvergenceConfig {
  std::vector<double> eps{0.1, 0.03, 0.01, 0.003};
  double s = 0.05;
  double t_end = 0.5;
  double dt_macro = 0.025;
  bool zero_runs = true;
  double energy_cap = 0.5;
};

struct EquilibriumConfig {
  CutOff cutoff = 8.0;
  double t_end = 40.0;
  double dt = 0.1;
  double stall_rate = 1e-7;
};

struct MomentsConfig {
  std::vector<CutOff> cutoffs{4.0, 8.0, 16.0, std::nullopt};
  double t_end = 1.0;
  double dt = 0.05;
  double bound_factor = 2.0;
};

struct SingleRunConfig {
  /// limit, full (unscaled RK4) or multirate (scaled, eps from params.eps_scale).
  std::string system = "limit";
  double t_end = 1.0;
  double dt = 0.05;
  CutOff cutoff{};
  int store_every = 1;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::Relaxation;
  Params params;
  int grid_n = 16;
  double half_width = 5.0;
  int sphere_nodes = 32;
  InitialSpec initial;
  RelaxationConfig relaxation;
  ConvergenceConfig convergence;
  EquilibriumConfig equilibrium;
  MomentsConfig moments;
  SingleRunConfig single;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;
};

struct ConfigResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;

  bool ok() const { return config.has_value(); }
};

/// Parse flat "section.key = value" lines ('#' starts a comment). Overrides
/// ("key=value") are applied after the text. Every problem is reported.
/// When expected is set, a missing experiment key takes that value and a
/// different one is an error.
ConfigResult parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                          std::optional<ExperimentKind> expected = std::nullopt);

/// Canonical text with every key, in a fixed order; parse_config inverts it.
/// output.dir is omitted when include_output is false.
std::string serialize_config(const RunConfig& config, bool include_output = true);

/// 16 hex digits of the FNV-1a hash of the canonical text without output.dir.
std::string config_hash(const RunConfig& config);

/// Keys accepted by parse_config, in canonical order.
std::vector<std::string> config_keys();

}  // namespace radkin
