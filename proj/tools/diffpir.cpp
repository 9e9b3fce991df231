// Copyright 2026 The diffpir-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "diffpir/error.hpp"

namespace {

using diffpir::cli::Settings;

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> flags;
  std::string config;
};

void add_flags(Subcommand& sub) {
  sub.app->add_option("--config", sub.config, "key = value or JSON config file");
  for (const auto& spec : diffpir::cli::key_specs()) {
    std::string flag = "--" + std::string(spec.key);
    for (char& c : flag) c = c == '_' ? '-' : c;
    const std::string help = std::string(spec.help) + " [" + spec.default_value + "]";
    sub.app->add_option(flag, sub.flags[spec.key], help);
  }
}

Settings collect(const Subcommand& sub) {
  Settings s;
  if (!sub.config.empty()) diffpir::cli::load_config_file(sub.config, s);
  for (const auto& [key, value] : sub.flags) {
    std::string flag = "--" + key;
    for (char& c : flag) c = c == '_' ? '-' : c;
    if (sub.app->count(flag) > 0) s.set(key, value);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plug-and-play diffusion image restoration"};
  app.require_subcommand(1);
  Subcommand degrade{app.add_subcommand("degrade", "synthesize a measurement from a clean image")};
  Subcommand restore{app.add_subcommand("restore", "restore a measurement")};
  Subcommand bench{app.add_subcommand("bench", "sweep steps, t_start, lambda and zeta")};
  for (Subcommand* sub : {&degrade, &restore, &bench}) add_flags(*sub);
  bench.app->footer("In bench, --steps, --t-start, --lambda and --zeta take comma-separated lists.");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*degrade.app) return diffpir::cli::cmd_degrade(collect(degrade), std::cout, std::cerr);
    if (*restore.app) return diffpir::cli::cmd_restore(collect(restore), std::cout, std::cerr);
    return diffpir::cli::cmd_bench(collect(bench), std::cout, std::cerr);
  } catch (const diffpir::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
