#include "akg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "akg/annotate.hpp"
#include "akg/embedding.hpp"
#include "akg/inject.hpp"
#include "akg/io_util.hpp"
#include "akg/triples.hpp"
#include "json.hpp"

namespace akg {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kMinPrecisionTarget = 0.01;

std::vector<std::vector<BioLabel>> gold_labels(const Corpus& corpus,
                                               const char* which) {
  std::vector<std::vector<BioLabel>> gold;
  gold.reserve(corpus.sentences.size());
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    if (!corpus.sentences[i].labels) {
      throw std::invalid_argument(std::string(which) +
                                  " sentence without gold labels at index " +
                                  std::to_string(i));
    }
    gold.push_back(*corpus.sentences[i].labels);
  }
  return gold;
}

std::vector<ModelInput> plain_inputs(const Corpus& corpus) {
  std::vector<ModelInput> inputs;
  inputs.reserve(corpus.sentences.size());
  for (const TaggedSentence& s : corpus.sentences) {
    inputs.push_back(input_from_plain(s));
  }
  return inputs;
}

std::vector<ModelInput> enriched_inputs(
    const std::vector<EnrichedSequence>& sequences, bool score_pivots) {
  std::vector<ModelInput> inputs;
  inputs.reserve(sequences.size());
  for (const EnrichedSequence& seq : sequences) {
    inputs.push_back(input_from_enriched(seq, score_pivots));
  }
  return inputs;
}

// The indicator-embedding arm sees the original token stream plus per-token
// flags recovered from the same enrichment decisions the pivot arm uses.
std::vector<ModelInput> marked_inputs(
    const Corpus& corpus, const std::vector<EnrichedSequence>& sequences) {
  if (corpus.sentences.size() != sequences.size()) {
    throw std::logic_error("enrichment lost sentence alignment");
  }
  std::vector<ModelInput> inputs;
  inputs.reserve(sequences.size());
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const StrippedSequence stripped = strip_pivots(sequences[i]);
    inputs.push_back(input_from_marked(corpus.sentences[i], stripped.pivot_after));
  }
  return inputs;
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (const double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double population_stddev(const std::vector<double>& xs, double mean) {
  double sum = 0.0;
  for (const double x : xs) sum += (x - mean) * (x - mean);
  return std::sqrt(sum / static_cast<double>(xs.size()));
}

ordered_json report_to_json(const EvalReport& r) {
  ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["true_positives"] = r.true_positives;
  j["predicted_spans"] = r.predicted_spans;
  j["gold_spans"] = r.gold_spans;
  j["token_tp"] = r.token_tp;
  j["token_fp"] = r.token_fp;
  j["token_fn"] = r.token_fn;
  return j;
}

EvalReport report_from_json(const ordered_json& j) {
  EvalReport r;
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.true_positives = j.at("true_positives").get<std::size_t>();
  r.predicted_spans = j.at("predicted_spans").get<std::size_t>();
  r.gold_spans = j.at("gold_spans").get<std::size_t>();
  r.token_tp = j.at("token_tp").get<std::size_t>();
  r.token_fp = j.at("token_fp").get<std::size_t>();
  r.token_fn = j.at("token_fn").get<std::size_t>();
  return r;
}

ordered_json run_to_json(const RunResult& run) {
  ordered_json j;
  j["partition"] = run.partition;
  j["seed"] = run.seed;
  j["ok"] = run.ok;
  j["error"] = run.error;
  j["report"] = report_to_json(run.report);
  j["pivot_precision"] = run.pivot_precision;
  j["pivot_recall"] = run.pivot_recall;
  j["epochs_run"] = run.epochs_run;
  j["best_val_f1"] = run.best_val_f1;
  return j;
}

RunResult run_from_json(const ordered_json& j) {
  RunResult run;
  run.partition = j.at("partition").get<std::size_t>();
  run.seed = j.at("seed").get<uint64_t>();
  run.ok = j.at("ok").get<bool>();
  run.error = j.at("error").get<std::string>();
  run.report = report_from_json(j.at("report"));
  run.pivot_precision = j.at("pivot_precision").get<double>();
  run.pivot_recall = j.at("pivot_recall").get<double>();
  run.epochs_run = j.at("epochs_run").get<int>();
  run.best_val_f1 = j.at("best_val_f1").get<double>();
  return run;
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::plain: return "plain";
    case RunMode::pivot: return "pivot";
    case RunMode::modified_dea: return "modified_dea";
    case RunMode::kg_only: return "kg_only";
  }
  throw std::logic_error("unreachable run mode");
}

RunMode parse_run_mode(const std::string& text) {
  if (text == "plain") return RunMode::plain;
  if (text == "pivot") return RunMode::pivot;
  if (text == "modified_dea") return RunMode::modified_dea;
  if (text == "kg_only") return RunMode::kg_only;
  throw std::invalid_argument("unknown run mode: " + text);
}

std::string to_string(InsertionMode mode) {
  return mode == InsertionMode::stochastic ? "stochastic" : "deterministic";
}

InsertionMode parse_insertion_mode(const std::string& text) {
  if (text == "stochastic") return InsertionMode::stochastic;
  if (text == "deterministic") return InsertionMode::deterministic;
  throw std::invalid_argument("unknown insertion mode: " + text);
}

void ExperimentConfig::validate() const {
  if (source_corpus.empty() || target_corpus.empty()) {
    throw std::invalid_argument("source and target corpus paths are required");
  }
  if (out_dir.empty()) throw std::invalid_argument("out_dir is required");
  if (mode != RunMode::plain && kg_file.empty() &&
      (triples.empty() || embeddings.empty())) {
    throw std::invalid_argument(
        "KG-using modes need kg_file or triples plus embeddings");
  }
  if (seeds.empty()) throw std::invalid_argument("seeds must be non-empty");
  if (!(kg_sample_pct > 0.0 && kg_sample_pct <= 100.0)) {
    throw std::invalid_argument("kg_sample_pct must be in (0, 100]");
  }
  if (precision_override.has_value() != recall_override.has_value()) {
    throw std::invalid_argument(
        "precision_override and recall_override come as a pair");
  }
  if (precision_override &&
      !(*precision_override > 0.0 && *precision_override <= 1.0)) {
    throw std::invalid_argument("precision_override must be in (0, 1]");
  }
  if (recall_override && !(*recall_override >= 0.0 && *recall_override <= 1.0)) {
    throw std::invalid_argument("recall_override must be in [0, 1]");
  }
  kg.validate();
  model.validate();
  if (trainer.batch_size < 1 || trainer.max_epochs < 1 || trainer.patience < 1 ||
      trainer.lr < 0.0 || trainer.weight_decay < 0.0 ||
      trainer.vocab_min_count < 1) {
    throw std::invalid_argument("train config out of range");
  }
}

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& file_label) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(file_label, 1, std::string("bad JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "source_corpus") cfg.source_corpus = value.get<std::string>();
      else if (key == "target_corpus") cfg.target_corpus = value.get<std::string>();
      else if (key == "triples") cfg.triples = value.get<std::string>();
      else if (key == "embeddings") cfg.embeddings = value.get<std::string>();
      else if (key == "generator") cfg.generator = value.get<std::string>();
      else if (key == "kg_file") cfg.kg_file = value.get<std::string>();
      else if (key == "kg") {
        for (const auto& [k, v] : value.items()) {
          if (k == "k_seeds") cfg.kg.k_seeds = v.get<int>();
          else if (k == "max_hops") cfg.kg.max_hops = v.get<int>();
          else if (k == "min_path_relatedness") cfg.kg.min_path_relatedness = v.get<double>();
          else if (k == "generator_completions") cfg.kg.generator_completions = v.get<int>();
          else throw std::invalid_argument("unknown kg key: " + k);
        }
      } else if (key == "mode") cfg.mode = parse_run_mode(value.get<std::string>());
      else if (key == "insertion") cfg.insertion = parse_insertion_mode(value.get<std::string>());
      else if (key == "model") {
        for (const auto& [k, v] : value.items()) {
          if (k == "d") cfg.model.d = v.get<int>();
          else if (k == "heads") cfg.model.heads = v.get<int>();
          else if (k == "layers") cfg.model.layers = v.get<int>();
          else if (k == "k_rel") cfg.model.k_rel = v.get<int>();
          else if (k == "max_len") cfg.model.max_len = v.get<int>();
          else if (k == "mode") cfg.model.mode = parse_attention_mode(v.get<std::string>());
          else throw std::invalid_argument("unknown model key: " + k);
        }
      } else if (key == "train") {
        for (const auto& [k, v] : value.items()) {
          if (k == "lr") cfg.trainer.lr = v.get<double>();
          else if (k == "batch_size") cfg.trainer.batch_size = v.get<int>();
          else if (k == "max_epochs") cfg.trainer.max_epochs = v.get<int>();
          else if (k == "weight_decay") cfg.trainer.weight_decay = v.get<double>();
          else if (k == "patience") cfg.trainer.patience = v.get<int>();
          else if (k == "vocab_min_count") {
            cfg.trainer.vocab_min_count = v.get<int>();
          }
          else throw std::invalid_argument("unknown train key: " + k);
        }
      } else if (key == "seeds") cfg.seeds = value.get<std::vector<uint64_t>>();
      else if (key == "partition_seed") cfg.partition_seed = value.get<uint64_t>();
      else if (key == "kg_sample_pct") cfg.kg_sample_pct = value.get<double>();
      else if (key == "precision_override") {
        if (!value.is_null()) cfg.precision_override = value.get<double>();
      } else if (key == "recall_override") {
        if (!value.is_null()) cfg.recall_override = value.get<double>();
      } else if (key == "score_pivots") cfg.score_pivots = value.get<bool>();
      else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
      else throw std::invalid_argument("unknown config key: " + key);
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(file_label, 1, e.what());
  } catch (const std::exception& e) {
    throw ParseError(file_label, 1, std::string("bad config value: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path), path);
}

std::string serialize_experiment_config(const ExperimentConfig& cfg) {
  ordered_json j;
  j["source_corpus"] = cfg.source_corpus;
  j["target_corpus"] = cfg.target_corpus;
  j["triples"] = cfg.triples;
  j["embeddings"] = cfg.embeddings;
  j["generator"] = cfg.generator;
  j["kg_file"] = cfg.kg_file;
  j["kg"] = {{"k_seeds", cfg.kg.k_seeds},
             {"max_hops", cfg.kg.max_hops},
             {"min_path_relatedness", cfg.kg.min_path_relatedness},
             {"generator_completions", cfg.kg.generator_completions}};
  j["mode"] = to_string(cfg.mode);
  j["insertion"] = to_string(cfg.insertion);
  j["model"] = {{"d", cfg.model.d},
                {"heads", cfg.model.heads},
                {"layers", cfg.model.layers},
                {"k_rel", cfg.model.k_rel},
                {"max_len", cfg.model.max_len},
                {"mode", to_string(cfg.model.mode)}};
  j["train"] = {{"lr", cfg.trainer.lr},
                {"batch_size", cfg.trainer.batch_size},
                {"max_epochs", cfg.trainer.max_epochs},
                {"weight_decay", cfg.trainer.weight_decay},
                {"patience", cfg.trainer.patience},
                {"vocab_min_count", cfg.trainer.vocab_min_count}};
  j["seeds"] = cfg.seeds;
  j["partition_seed"] = cfg.partition_seed;
  j["kg_sample_pct"] = cfg.kg_sample_pct;
  if (cfg.precision_override) j["precision_override"] = *cfg.precision_override;
  else j["precision_override"] = nullptr;
  if (cfg.recall_override) j["recall_override"] = *cfg.recall_override;
  else j["recall_override"] = nullptr;
  j["score_pivots"] = cfg.score_pivots;
  j["out_dir"] = cfg.out_dir;
  return j.dump(2) + "\n";
}

namespace {

// Everything one (partition, seed) run needs beyond the result row.
struct RunContext {
  const ExperimentConfig& cfg;
  const Corpus& source;
  const Corpus& target;
  const PartitionSet& source_parts;
  const PartitionSet& target_parts;
  const DomainKG* kg;  // null in plain mode
  fs::path run_dir;
};

RunResult execute_run(const RunContext& ctx, std::size_t partition,
                      uint64_t seed) {
  const ExperimentConfig& cfg = ctx.cfg;
  RunResult run;
  run.partition = partition;
  run.seed = seed;
  std::ostringstream log;
  log << "partition " << partition << " seed " << seed << " mode "
      << to_string(cfg.mode) << "\n";

  const Split& src_split = ctx.source_parts.partitions[partition];
  const Split& tgt_split = ctx.target_parts.partitions[partition];
  const Corpus src_train = subset(ctx.source, src_split.train);
  const Corpus src_val = subset(ctx.source, src_split.validation);
  const Corpus tgt_test = subset(ctx.target, tgt_split.test);
  const std::vector<std::vector<BioLabel>> test_gold =
      gold_labels(tgt_test, "target test");

  // The KG-size ablation touches only what the evaluation-side enrichment
  // sees; training always works against the full graph.
  DomainKG sampled;
  const DomainKG* test_kg = ctx.kg;
  if (ctx.kg && cfg.kg_sample_pct < 100.0) {
    sampled = sample_kg(*ctx.kg, cfg.kg_sample_pct,
                        seed * 3 + static_cast<uint64_t>(partition));
    test_kg = &sampled;
    log << "sampled KG to " << sampled.nodes.size() << " of "
        << ctx.kg->nodes.size() << " nodes\n";
  }

  std::vector<std::vector<BioLabel>> predictions;
  if (cfg.mode == RunMode::kg_only) {
    predictions = kg_only_tagger(tgt_test, *test_kg);
    log << "kg_only baseline, no training\n";
  } else {
    std::vector<ModelInput> train_in, val_in, test_in;
    ModelConfig model_cfg = cfg.model;

    if (cfg.mode == RunMode::plain) {
      model_cfg.mode = AttentionMode::baseline_dea;
      train_in = plain_inputs(src_train);
      val_in = plain_inputs(src_val);
      test_in = plain_inputs(tgt_test);
    } else {
      double p = 1.0, r = 0.0;
      if (cfg.precision_override) {
        p = *cfg.precision_override;
        r = *cfg.recall_override;
        log << "overridden targets p=" << p << " r=" << r << "\n";
      } else {
        const PivotPr measured = measure_pivot_pr(src_val, *ctx.kg);
        if (measured.no_pivots) {
          log << "validation enrichment produced no pivots; training plain\n";
        } else {
          p = std::max(measured.precision, kMinPrecisionTarget);
          r = measured.recall;
          log << "measured targets p=" << measured.precision
              << " r=" << measured.recall << "\n";
        }
      }
      run.pivot_precision = p;
      run.pivot_recall = r;

      std::vector<EnrichedSequence> train_seqs;
      if (cfg.insertion == InsertionMode::stochastic) {
        PivotPolicy policy;
        policy.precision_target = p;
        policy.recall_target = r;
        policy.rng_seed = seed;
        const StochasticInsertion ins =
            stochastic_train_insertion(src_train, policy);
        log << "stochastic insertion: " << ins.true_insertions << " true + "
            << ins.false_insertions << " false pivots, achieved p="
            << ins.achieved_precision << " r=" << ins.achieved_recall << "\n";
        train_seqs = ins.sequences;
      } else {
        train_seqs = deterministic_train_insertion(src_train, *ctx.kg);
        log << "deterministic insertion against the full KG\n";
      }
      const std::vector<EnrichedSequence> val_seqs =
          deterministic_train_insertion(src_val, *ctx.kg);
      const std::vector<EnrichedSequence> test_seqs =
          deterministic_train_insertion(tgt_test, *test_kg);

      save_enriched(EnrichedCorpus::from_sequences(src_train, train_seqs),
                    (ctx.run_dir / "train_enriched.tsv").string());
      save_enriched(EnrichedCorpus::from_sequences(tgt_test, test_seqs),
                    (ctx.run_dir / "test_enriched.tsv").string());

      if (cfg.mode == RunMode::pivot) {
        model_cfg.mode = AttentionMode::baseline_dea;
        train_in = enriched_inputs(train_seqs, cfg.score_pivots);
        val_in = enriched_inputs(val_seqs, cfg.score_pivots);
        test_in = enriched_inputs(test_seqs, false);
      } else {
        model_cfg.mode = AttentionMode::modified_dea;
        train_in = marked_inputs(src_train, train_seqs);
        val_in = marked_inputs(src_val, val_seqs);
        test_in = marked_inputs(tgt_test, test_seqs);
      }
    }

    std::vector<std::vector<std::string>> train_tokens;
    train_tokens.reserve(train_in.size());
    for (const ModelInput& in : train_in) train_tokens.push_back(in.tokens);
    const Vocab vocab = Vocab::build(train_tokens, cfg.trainer.vocab_min_count);
    log << "vocabulary size " << vocab.size() << "\n";

    TrainConfig tc = cfg.trainer;
    tc.seed = seed;
    const EncoderParams initial = EncoderParams::init(model_cfg, vocab, seed);
    const TrainResult trained = train(train_in, val_in, initial, tc);
    run.epochs_run = trained.epochs_run;
    run.best_val_f1 = trained.best_val_f1;
    log << "trained " << trained.epochs_run << " epochs, best epoch "
        << trained.best_epoch << " val F1 " << trained.best_val_f1 << "\n";
    save_checkpoint(trained.params, (ctx.run_dir / "checkpoint.txt").string());

    predictions = predict(test_in, trained.params);
  }

  run.report = exact_match_f1(predictions, test_gold);
  run.ok = true;
  log << "target test F1 " << run.report.f1 << " (P " << run.report.precision
      << " R " << run.report.recall << ")\n";
  write_file((ctx.run_dir / "log.txt").string(), log.str());
  return run;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path out(cfg.out_dir);
  fs::create_directories(out / "runs");
  write_file((out / "config.json").string(), serialize_experiment_config(cfg));

  const Corpus source = load_corpus(cfg.source_corpus);
  const Corpus target = load_corpus(cfg.target_corpus);

  DomainKG kg;
  const DomainKG* kg_ptr = nullptr;
  if (cfg.mode != RunMode::plain) {
    if (!cfg.kg_file.empty()) {
      kg = load_kg(cfg.kg_file);
    } else {
      const TripleStore store = TripleStore::load(cfg.triples);
      const EmbeddingTable table = EmbeddingTable::load(cfg.embeddings);
      std::unique_ptr<FileTripleGenerator> generator;
      if (!cfg.generator.empty()) {
        generator = std::make_unique<FileTripleGenerator>(cfg.generator);
      }
      kg = build_domain_kg(target, store, table, generator.get(), cfg.kg);
    }
    save_kg(kg, (out / "kg.json").string());
    kg_ptr = &kg;
  }

  const PartitionSet source_parts = make_partitions(source, cfg.partition_seed);
  const PartitionSet target_parts = make_partitions(target, cfg.partition_seed);

  ExperimentSummary summary;
  summary.mode = cfg.mode;
  summary.insertion = cfg.insertion;
  summary.kg_sample_pct = cfg.kg_sample_pct;

  for (std::size_t partition = 0; partition < 3; ++partition) {
    for (const uint64_t seed : cfg.seeds) {
      const fs::path run_dir =
          out / "runs" /
          ("p" + std::to_string(partition) + "_s" + std::to_string(seed));
      fs::create_directories(run_dir);
      RunContext ctx{cfg,          source,       target, source_parts,
                     target_parts, kg_ptr,       run_dir};
      RunResult run;
      try {
        run = execute_run(ctx, partition, seed);
      } catch (const std::exception& e) {
        run = RunResult{};
        run.partition = partition;
        run.seed = seed;
        run.error = e.what();
        write_file((run_dir / "log.txt").string(),
                   std::string("run failed: ") + e.what() + "\n");
      }
      write_file((run_dir / "result.json").string(),
                 run_to_json(run).dump(2) + "\n");
      summary.runs.push_back(std::move(run));
    }
  }

  std::vector<double> f1s;
  for (const RunResult& run : summary.runs) {
    if (run.ok) f1s.push_back(run.report.f1);
    else summary.partial = true;
  }
  if (!f1s.empty()) {
    summary.mean_f1 = mean_of(f1s);
    summary.stddev_f1 = population_stddev(f1s, summary.mean_f1);
  }

  write_file((out / "summary.json").string(), serialize_summary(summary));
  write_file((out / "summary.tsv").string(), render_report_tsv({summary}));
  write_file((out / "table.txt").string(), render_report_table({summary}));
  return summary;
}

std::string serialize_summary(const ExperimentSummary& summary) {
  ordered_json j;
  j["mode"] = to_string(summary.mode);
  j["insertion"] = to_string(summary.insertion);
  j["kg_sample_pct"] = summary.kg_sample_pct;
  j["mean_f1"] = summary.mean_f1;
  j["stddev_f1"] = summary.stddev_f1;
  j["partial"] = summary.partial;
  ordered_json runs = ordered_json::array();
  for (const RunResult& run : summary.runs) runs.push_back(run_to_json(run));
  j["runs"] = runs;
  return j.dump(2) + "\n";
}

ExperimentSummary parse_summary(const std::string& text,
                                const std::string& file_label) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(file_label, 1, std::string("bad JSON: ") + e.what());
  }
  try {
    ExperimentSummary summary;
    summary.mode = parse_run_mode(j.at("mode").get<std::string>());
    summary.insertion =
        parse_insertion_mode(j.at("insertion").get<std::string>());
    summary.kg_sample_pct = j.at("kg_sample_pct").get<double>();
    summary.mean_f1 = j.at("mean_f1").get<double>();
    summary.stddev_f1 = j.at("stddev_f1").get<double>();
    summary.partial = j.at("partial").get<bool>();
    for (const auto& run : j.at("runs")) {
      summary.runs.push_back(run_from_json(run));
    }
    return summary;
  } catch (const std::exception& e) {
    throw ParseError(file_label, 1, std::string("bad summary: ") + e.what());
  }
}

std::vector<ExperimentSummary> load_summaries(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw std::invalid_argument("not a directory: " + dir);
  }
  std::vector<fs::path> candidates = {fs::path(dir) / "summary.json"};
  std::vector<fs::path> children;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) children.push_back(entry.path() / "summary.json");
  }
  std::sort(children.begin(), children.end());
  candidates.insert(candidates.end(), children.begin(), children.end());

  std::vector<ExperimentSummary> summaries;
  for (const fs::path& path : candidates) {
    if (!fs::is_regular_file(path)) continue;
    summaries.push_back(parse_summary(read_file(path.string()), path.string()));
  }
  if (summaries.empty()) {
    throw std::invalid_argument("no summary.json found under " + dir);
  }
  std::stable_sort(summaries.begin(), summaries.end(),
                   [](const ExperimentSummary& a, const ExperimentSummary& b) {
                     const auto key = [](const ExperimentSummary& s) {
                       return std::make_tuple(to_string(s.mode),
                                              to_string(s.insertion),
                                              s.kg_sample_pct);
                     };
                     return key(a) < key(b);
                   });
  return summaries;
}

std::string render_report_tsv(const std::vector<ExperimentSummary>& summaries) {
  std::ostringstream out;
  out << "MODE\tINSERTION\tKG_PCT\tMEAN_F1\tSTDDEV_F1\tOK_RUNS\tTOTAL_RUNS\n";
  for (const ExperimentSummary& s : summaries) {
    std::size_t ok = 0;
    for (const RunResult& run : s.runs) ok += run.ok ? 1 : 0;
    out << to_string(s.mode) << "\t" << to_string(s.insertion) << "\t"
        << std::setprecision(6) << s.kg_sample_pct << "\t" << std::fixed
        << std::setprecision(4) << s.mean_f1 << "\t" << s.stddev_f1 << "\t"
        << ok << "\t" << s.runs.size() << "\n";
    out.unsetf(std::ios::fixed);
  }
  return out.str();
}

std::string render_report_table(
    const std::vector<ExperimentSummary>& summaries) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "MODE" << std::setw(15) << "INSERTION"
      << std::right << std::setw(7) << "KG%" << std::setw(18) << "F1 (STDDEV)"
      << std::setw(7) << "RUNS" << "\n";
  out << std::string(61, '-') << "\n";
  for (const ExperimentSummary& s : summaries) {
    std::size_t ok = 0;
    for (const RunResult& run : s.runs) ok += run.ok ? 1 : 0;
    std::ostringstream score;
    score << std::fixed << std::setprecision(4) << s.mean_f1 << " ("
          << s.stddev_f1 << ")";
    std::ostringstream runs;
    runs << ok << "/" << s.runs.size();
    std::ostringstream pct;
    pct << std::setprecision(6) << s.kg_sample_pct;
    out << std::left << std::setw(14) << to_string(s.mode) << std::setw(15)
        << to_string(s.insertion) << std::right << std::setw(7) << pct.str()
        << std::setw(18) << score.str() << std::setw(7) << runs.str();
    if (s.partial) out << "  PARTIAL";
    out << "\n";
  }
  return out.str();
}

}  // namespace akg
