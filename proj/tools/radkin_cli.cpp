#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "radkin/config.hpp"
#include "radkin/runner.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "Config file (flat key = value lines)");
  sub->add_option("--out", o.out_dir, "Output directory (overrides output.dir)");
  sub->add_option("--threads", o.threads, "Worker threads (overrides threads)")->check(CLI::Range(1, 256));
  sub->add_option("--override", o.overrides, "key=value, applied after the config file")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level gas and radiation kinetic solver"};
  app.require_subcommand(1);
  Options opts;
  struct Sub {
    const char* name;
    const char* help;
    std::optional<radkin::ExperimentKind> kind;
  };
  const Sub subs[] = {
      {"relaxation", "Fast radiative relaxation of the reduced subsystem", radkin::ExperimentKind::Relaxation},
      {"convergence", "Convergence of the scaled system to the limit system", radkin::ExperimentKind::Convergence},
      {"equilibrium", "Long-time relaxation of the limit system to a Maxwellian", radkin::ExperimentKind::Equilibrium},
      {"moments", "L1_3 and L1_4 norms across cut-off kernels", radkin::ExperimentKind::Moments},
      {"run", "Run the experiment named by the config", std::nullopt},
  };
  std::vector<std::pair<CLI::App*, std::optional<radkin::ExperimentKind>>> commands;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, opts);
    commands.emplace_back(sub, s.kind);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : radkin::kExitConfig;
  }

  std::optional<radkin::ExperimentKind> expected;
  for (const auto& [sub, kind] : commands)
    if (sub->parsed()) expected = kind;

  std::string text;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read config '" << opts.config_path << "'\n";
      return radkin::kExitConfig;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::vector<std::string> overrides = opts.overrides;
  if (!opts.out_dir.empty()) overrides.push_back("output.dir=" + opts.out_dir);
  if (opts.threads > 0) overrides.push_back("threads=" + std::to_string(opts.threads));

  const radkin::ConfigResult parsed = radkin::parse_config(text, overrides, expected);
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors) std::cerr << "config error: " << e << "\n";
    return radkin::kExitConfig;
  }
  const radkin::RunOutcome out = radkin::run_experiment(*parsed.config);
  for (const auto& f : out.files) std::cout << f << "\n";
  if (out.exit_code != radkin::kExitOk) std::cerr << "error: " << out.message << "\n";
  return out.exit_code;
}
