#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "vclust/error.hpp"

using namespace vclust::cli;

int main(int argc, char** argv) {
  CLI::App app{"Clustered vortex workbench: profiles, Green functions, ansatz, reduced energy, solves, helices"};
  app.require_subcommand(1);
  // --h is the grid spacing, so help stays long-form only
  app.set_help_flag("--help", "Print this help message and exit");
  std::map<std::string, std::string> config_files;
  std::map<std::string, std::map<std::string, std::string>> flags;
  const std::map<std::string, std::string> about = {
      {"profile", "ground-state radial profile and Pohozaev residuals"},
      {"green", "Green column, regular part and Robin value at a source y"},
      {"ansatz", "cluster amplitudes, composite ansatz and sign structure"},
      {"reduce", "maximize the reduced energy of an m-point cluster"},
      {"solve", "Newton solves along a decreasing eps ladder"},
      {"helix", "lift a solved field to helical tubes and 3D vorticity"},
      {"pipeline", "landscape, reduce, solve ladder and helix export in one run"},
  };
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--config", config_files[name], "key = value configuration file");
    for (const auto& key : command_keys(name).keys) {
      const auto& spec = key_spec(key);
      std::string help = spec.help;
      if (spec.fallback) help += " (default: " + (spec.fallback->empty() ? std::string("empty") : *spec.fallback) + ")";
      if (!spec.choices.empty()) {
        help += " [";
        for (size_t i = 0; i < spec.choices.size(); ++i) help += (i ? "|" : "") + spec.choices[i];
        help += "]";
      }
      // flags are parsed as text and validated with the config schema
      sub->add_option("--" + spec.flag, flags[name][key], help)->allow_extra_args(false);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  for (const auto& name : command_names()) {
    auto* sub = app.get_subcommand(name);
    if (!sub->parsed()) continue;
    try {
      Config cfg = config_files[name].empty() ? Config{} : Config::from_file(config_files[name]);
      for (const auto& key : command_keys(name).keys)
        if (sub->get_option("--" + key_spec(key).flag)->count() > 0) cfg.set(key, flags[name][key]);
      return run_command(name, cfg, config_files[name]);
    } catch (const vclust::ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kConfigError;
    } catch (const vclust::IoError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kIoError;
    }
  }
  return kConfigError;
}
