// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "walklt/experiment.hpp"
#include "walklt/increment_law.hpp"

using namespace walklt;

TEST_CASE("config parsing: sections, lists, comments, bad keys") {
  const std::string text =
      "[experiment]\n"
      "id = killed-geometric\n"
      "law = simple   # the Rademacher walk\n"
      "seed = 42\n"
      "workers = 2\n"
      "samples = 1000\n"
      "[grid]\n"
      "N = 25 50\n"
      "u = 0.5 1 2\n"
      "cap = 1000000\n";
  ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.id == "killed-geometric");
  CHECK(cfg.law == "simple");
  CHECK(cfg.seed == 42);
  CHECK(cfg.workers == 2);
  CHECK(cfg.samples == 1000);
  CHECK(cfg.N_grid == std::vector<long long>{25, 50});
  CHECK(cfg.u_list == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(cfg.cap == 1'000'000);

  CHECK_THROWS_AS(parse_config("nonsense = 1\n"), ConfigError);
  ExperimentConfig bad;
  bad.id = "no-such-experiment";
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}

TEST_CASE("experiment ids are enumerable and total ten") {
  CHECK(experiment_ids().size() == 10);
}

TEST_CASE("small killed-geometric run passes and reproduces bit-for-bit") {
  ExperimentConfig cfg;
  cfg.id = "killed-geometric";
  cfg.seed = 7;
  cfg.samples = 40'000;
  cfg.N_grid = {20};
  cfg.workers = 1;
  ExperimentRecord a = run_experiment(cfg);
  CHECK(a.all_pass());
  CHECK(a.reports.size() == 3);  // fit, gof, capped-fraction guard

  ExperimentRecord b = run_experiment(cfg);
  CHECK(verdicts_csv(a) == verdicts_csv(b));
  REQUIRE(a.tables.size() == b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) CHECK(a.tables[i] == b.tables[i]);
}

TEST_CASE("aggregates are identical across worker counts") {
  ExperimentConfig cfg;
  cfg.id = "killed-geometric";
  cfg.seed = 11;
  cfg.samples = 40'000;
  cfg.N_grid = {20};
  std::vector<std::string> outputs;
  for (const int w : {1, 4, 8}) {
    cfg.workers = w;
    ExperimentRecord rec = run_experiment(cfg);
    outputs.push_back(verdicts_csv(rec) + rec.tables[0].second);
  }
  CHECK(outputs[0] == outputs[1]);
  CHECK(outputs[0] == outputs[2]);
}

TEST_CASE("emit_report writes the expected files and schemas") {
  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / "walklt_emit_test").string();
  fs::remove_all(dir);

  ExperimentConfig cfg;
  cfg.id = "conditional-exponential";
  cfg.seed = 5;
  cfg.samples = 20'000;
  cfg.N_grid = {50};
  cfg.workers = 2;
  ExperimentRecord rec = run_experiment(cfg);
  emit_report(rec, dir);

  CHECK(fs::exists(fs::path(dir) / "verdicts.csv"));
  CHECK(fs::exists(fs::path(dir) / "record.jsonl"));
  CHECK(fs::exists(fs::path(dir) / "summary.txt"));
  std::ifstream csv(fs::path(dir) / "conditional_sf_simple.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x,empirical_sf,reference_sf,n");

  std::ifstream sum(fs::path(dir) / "summary.txt");
  std::string all((std::istreambuf_iterator<char>(sum)), std::istreambuf_iterator<char>());
  CHECK(all.find("FAIL") == std::string::npos);
  CHECK(all.find("ALL PASS") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("quadrature experiment is exact and fast") {
  ExperimentConfig cfg;
  cfg.id = "quadrature-aform";
  ExperimentRecord rec = run_experiment(cfg);
  CHECK(rec.all_pass());
  REQUIRE(!rec.tables.empty());
  CHECK(rec.tables[0].first == "quadrature_aform.csv");
}

TEST_CASE("hitting-asymptotics holds the exact identity on a reduced grid") {
  ExperimentConfig cfg;
  cfg.id = "hitting-asymptotics";
  cfg.N_grid = {25, 50, 100};
  ExperimentRecord rec = run_experiment(cfg);
  CHECK(rec.all_pass());
}

TEST_CASE("workers resolve from the environment override") {
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("laws load from plain-text definition files") {
  namespace fs = std::filesystem;
  const std::string path = (fs::temp_directory_path() / "walklt_custom.law").string();
  {
    std::ofstream f(path);
    f << "name = halfstep\nsupport = -1:1/2 1:1/2\n";
  }
  ExperimentConfig cfg;
  cfg.id = "killed-geometric";
  cfg.law = "@" + path;
  cfg.samples = 20'000;
  cfg.N_grid = {15};
  cfg.seed = 3;
  ExperimentRecord rec = run_experiment(cfg);
  CHECK(rec.all_pass());
  fs::remove(path);

  ExperimentConfig bad = cfg;
  bad.law = "@/nonexistent/law/file";
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
}
