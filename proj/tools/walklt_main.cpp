// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "walklt/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"local-time laboratory for killed and reflected lattice walks"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "enumerate experiment ids");

  std::string id, config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("experiment", id, "experiment id")->required();
  run->add_option("--config", config_path, "key = value config file");
  run->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--workers", workers, "worker count override");
  run->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& e : walklt::experiment_ids()) std::puts(e.c_str());
      return 0;
    }
    walklt::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = walklt::load_config_file(config_path);
    cfg.id = id;
    if (seed_set) cfg.seed = seed;
    if (workers > 0) cfg.workers = workers;
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    walklt::ExperimentRecord rec = walklt::run_experiment(cfg);
    std::fputs(walklt::summary_text(rec).c_str(), stdout);
    return rec.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
