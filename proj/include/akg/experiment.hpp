#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "akg/eval.hpp"
#include "akg/kg.hpp"
#include "akg/model.hpp"

namespace akg {

// The four experimental arms: an unenriched tagger, pivot-token enrichment,
// the indicator-embedding attention variant, and the no-model KG baseline.
enum class RunMode { plain, pivot, modified_dea, kg_only };
std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);

enum class InsertionMode { stochastic, deterministic };
std::string to_string(InsertionMode mode);
InsertionMode parse_insertion_mode(const std::string& text);

struct ExperimentConfig {
  std::string source_corpus;  // path, training domain
  std::string target_corpus;  // path, evaluation domain
  std::string triples;        // triple dump, unused when kg_file is set
  std::string embeddings;
  std::string generator;  // optional SEED\tTAIL completions file
  std::string kg_file;    // optional prebuilt KG, skips building
  KgConfig kg;
  RunMode mode = RunMode::pivot;
  InsertionMode insertion = InsertionMode::stochastic;
  ModelConfig model;  // model.mode is overridden per run mode
  TrainConfig trainer;
  std::vector<uint64_t> seeds = {1, 2, 3};
  uint64_t partition_seed = 0;
  double kg_sample_pct = 100.0;  // applied to target test enrichment only
  std::optional<double> precision_override;  // both set: skip measuring (p, r)
  std::optional<double> recall_override;
  bool score_pivots = false;  // include pivot positions in the training loss
  std::string out_dir;

  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& file_label);
ExperimentConfig load_experiment_config(const std::string& path);
std::string serialize_experiment_config(const ExperimentConfig& cfg);

struct RunResult {
  std::size_t partition = 0;
  uint64_t seed = 0;
  bool ok = false;
  std::string error;        // set when !ok
  EvalReport report;        // target-domain test scores
  double pivot_precision = 0.0;  // (p, r) targets used by this run
  double pivot_recall = 0.0;
  int epochs_run = 0;
  double best_val_f1 = 0.0;
};

struct ExperimentSummary {
  RunMode mode = RunMode::plain;
  InsertionMode insertion = InsertionMode::stochastic;
  double kg_sample_pct = 100.0;
  std::vector<RunResult> runs;  // partition-major, seed-minor
  double mean_f1 = 0.0;         // over successful runs
  double stddev_f1 = 0.0;       // population standard deviation
  bool partial = false;         // at least one run failed
};

// One run per (partition, seed).  Artifacts land under cfg.out_dir: the KG,
// per-run enriched corpora, checkpoints, logs, and the summary files.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

std::string serialize_summary(const ExperimentSummary& summary);
ExperimentSummary parse_summary(const std::string& text,
                                const std::string& file_label);

// summary.json from dir itself and every immediate child directory.
std::vector<ExperimentSummary> load_summaries(const std::string& dir);

// MODE / INSERTION / KG% / MEAN_F1 (STDDEV) / RUNS rows.
std::string render_report_tsv(const std::vector<ExperimentSummary>& summaries);
std::string render_report_table(const std::vector<ExperimentSummary>& summaries);

}  // namespace akg
