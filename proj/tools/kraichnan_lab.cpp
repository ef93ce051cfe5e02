// SPDX-License-Identifier: Apache-2.0
//
// kraichnan-lab command line front end.
//
//   kraichnan_lab <experiment> [--config PATH] [--seed N] [--out DIR]
//                 [--threads N] [--set key=value ...]
//
// <experiment> is one of: constants kernel regime pde mc yaglom dirac sweep.
// Flags override config-file values.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kraichnan/config.hpp"
#include "kraichnan/errors.hpp"
#include "kraichnan/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"kraichnan-lab: Kraichnan passive-scalar numerical laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::string seed_str;
  int threads = 0;
  std::vector<std::string> sets;

  const std::vector<std::string> experiments = {"constants", "kernel", "regime", "pde",
                                                "mc",        "yaglom", "dirac",  "sweep"};
  for (const auto& name : experiments) {
    CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--seed", seed_str, "master seed (overrides config)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (speed only, never results)");
    sub->add_option("--set", sets, "extra key=value overrides")->take_all();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    kraichnan::ExperimentConfig cfg = config_path.empty()
                                          ? kraichnan::ExperimentConfig()
                                          : kraichnan::ExperimentConfig::from_file(config_path);
    cfg.set_override("experiment=" + app.get_subcommands().front()->get_name());
    if (!seed_str.empty()) cfg.set_override("seed=" + seed_str);
    if (!out_dir.empty()) cfg.set_override("out=" + out_dir);
    if (threads > 0) cfg.set_override("threads=" + std::to_string(threads));
    for (const auto& s : sets) cfg.set_override(s);
    return kraichnan::run_experiment(cfg);
  } catch (const kraichnan::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
