#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chaossync/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dual combination-combination multi-switching synchronization of "
               "eight coupled chaotic systems"};
  app.require_subcommand(1);

  std::string config_path;
  chaossync::CliOverrides overrides;
  double dt = 0, t_end = 0, gain = 0;
  std::string policy, variant, out_dir;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory (overrides CHAOSSYNC_OUT)");
    cmd->add_option("--dt", dt, "Integration step");
    cmd->add_option("--t-end", t_end, "Integration horizon");
    cmd->add_option("--gain", gain, "Error feedback gain");
    cmd->add_option("--policy", policy, "Control split policy: even | w-channel");
    cmd->add_option("--variant", variant,
                    "Scheme variant: full | non_switched | block1_only | block2_only | "
                    "c_channel_only | d_channel_only | block1_c_only | block1_d_only | "
                    "block2_c_only | block2_d_only");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Run a configured closed loop");
  simulate->add_option("--config", config_path, "Config file (JSON)")->required();
  add_common(simulate);

  CLI::App* reproduce =
      app.add_subcommand("reproduce-paper", "Run the built-in reference experiment "
                                            "and write the figure CSVs");
  reproduce->add_option("--out", out_dir, "Output directory (overrides CHAOSSYNC_OUT)");

  CLI::App* validate = app.add_subcommand("validate", "Validate a config without running it");
  validate->add_option("--config", config_path, "Config file (JSON)")->required();

  int catalog_n = 0;
  CLI::App* enumerate =
      app.add_subcommand("enumerate-patterns", "Count switching tuples per equality pattern");
  enumerate->add_option("n", catalog_n, "Shared system dimension (2..6)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? chaossync::kExitOk : chaossync::kExitConfigError;
  }

  auto opt = [](const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
  };
  if (simulate->count("--dt")) overrides.dt = dt;
  if (simulate->count("--t-end")) overrides.t_end = t_end;
  if (simulate->count("--gain")) overrides.gain = gain;
  overrides.policy = opt(policy);
  overrides.variant = opt(variant);
  overrides.out_dir = opt(out_dir);

  try {
    if (simulate->parsed()) {
      return chaossync::cmd_simulate(config_path, overrides, std::cout);
    }
    if (reproduce->parsed()) {
      return chaossync::cmd_reproduce_paper(overrides.out_dir, std::cout);
    }
    if (validate->parsed()) {
      return chaossync::cmd_validate(config_path, std::cout);
    }
    if (enumerate->parsed()) {
      return chaossync::cmd_enumerate_patterns(catalog_n, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return chaossync::kExitConfigError;
  }
  return chaossync::kExitConfigError;
}
