// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "walklt/stats.hpp"

namespace walklt {

struct ExperimentConfig {
  std::string id;
  std::string law = "simple";
  std::uint64_t seed = 20240601;
  int workers = 0;  // 0: WALKLT_WORKERS env or hardware parallelism
  long long samples = 0;  // 0: experiment default
  std::vector<long long> N_grid;
  std::vector<long long> levels;
  std::vector<double> u_list;
  std::vector<double> lambda_grid;
  std::string M_rule = "auto";
  long long cap = 100'000'000;
  long long ceiling = -1;  // -1: per-experiment automatic choice
  std::string out_dir;
  bool emit_samples = false;
};

// plain-text config: key = value lines, optional [section] headers, # comments
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

struct ExperimentRecord {
  ExperimentConfig config;
  std::vector<TestReport> reports;
  double wall_seconds = 0.0;
  long long total_samples = 0;
  long long capped_samples = 0;
  // named CSV tables produced by the run (written out by emit_report)
  std::vector<std::pair<std::string, std::string>> tables;
  std::vector<std::string> artifacts;

  bool all_pass() const;
};

std::vector<std::string> experiment_ids();
ExperimentRecord run_experiment(const ExperimentConfig& config);

// Writes verdicts.csv, record.jsonl, summary.txt and the per-experiment
// tables under out_dir; returns the file list.
std::vector<std::string> emit_report(ExperimentRecord& record, const std::string& out_dir);
std::string summary_text(const ExperimentRecord& record);
std::string verdicts_csv(const ExperimentRecord& record);

int resolve_workers(int requested);

}  // namespace walklt
