// Command-line front end: every pipeline stage is a subcommand, every config
// field has a flag, and exit codes distinguish usage (1), bad data (2), and
// run failures (3).

#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "akg/annotate.hpp"
#include "akg/embedding.hpp"
#include "akg/eval.hpp"
#include "akg/experiment.hpp"
#include "akg/inject.hpp"
#include "akg/io_util.hpp"
#include "akg/kg.hpp"
#include "akg/model.hpp"
#include "akg/rng.hpp"
#include "akg/triples.hpp"

namespace {

using namespace akg;

std::vector<ModelInput> inputs_from_corpus(const Corpus& corpus) {
  std::vector<ModelInput> inputs;
  for (const TaggedSentence& s : corpus.sentences) {
    inputs.push_back(input_from_plain(s));
  }
  return inputs;
}

std::vector<ModelInput> inputs_from_enriched_corpus(const EnrichedCorpus& corpus,
                                                    bool marked,
                                                    bool score_pivots) {
  std::vector<ModelInput> inputs;
  if (marked) {
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
      inputs.push_back(
          input_from_marked(corpus.sentences[i], corpus.pivot_after[i]));
    }
  } else {
    for (const EnrichedSequence& seq : corpus.to_sequences()) {
      inputs.push_back(input_from_enriched(seq, score_pivots));
    }
  }
  return inputs;
}

void print_eval_report(const EvalReport& r, std::ostream& out) {
  out << "span_precision\t" << r.precision << "\n";
  out << "span_recall\t" << r.recall << "\n";
  out << "span_f1\t" << r.f1 << "\n";
  out << "spans\t" << r.true_positives << "/" << r.predicted_spans << "/"
      << r.gold_spans << "\ttp/pred/gold\n";
  out << "token_precision\t" << r.token_precision << "\n";
  out << "token_recall\t" << r.token_recall << "\n";
}

struct BuildKgArgs {
  std::string corpus, triples, embeddings, generator, out;
  KgConfig kg;
};

void cmd_build_kg(const BuildKgArgs& a) {
  const Corpus corpus = load_corpus(a.corpus);
  const TripleStore store = TripleStore::load(a.triples);
  const EmbeddingTable table = EmbeddingTable::load(a.embeddings);

  const std::vector<std::string> seeds = select_seed_terms(corpus, a.kg.k_seeds);
  std::cout << "seed terms:";
  for (const std::string& s : seeds) std::cout << " " << s;
  std::cout << "\n";

  KgConfig raw_cfg = a.kg;
  raw_cfg.min_path_relatedness = -1.0;
  const DomainKG raw = build_domain_kg(corpus, store, table, nullptr, raw_cfg);
  std::cout << "raw reachable nodes: " << raw.nodes.size() << "\n";

  DomainKG kg = build_domain_kg(corpus, store, table, nullptr, a.kg);
  std::cout << "pruned nodes: " << kg.nodes.size() << "\n";

  if (!a.generator.empty()) {
    FileTripleGenerator gen(a.generator);
    kg = augment_with_generator(std::move(kg), gen, a.kg);
    std::cout << "augmented nodes: " << kg.nodes.size() << "\n";
  }
  for (const std::string& w : kg.warnings) std::cout << "warning: " << w << "\n";

  save_kg(kg, a.out);
  std::cout << "wrote " << a.out << "\n";
}

struct EnrichArgs {
  std::string corpus, kg, out;
  bool stochastic = false;
  double precision = 1.0;
  double recall = 1.0;
  uint64_t seed = 0;
  double kg_sample = 100.0;
  uint64_t sample_seed = 0;
};

void cmd_enrich(const EnrichArgs& a) {
  const Corpus corpus = load_corpus(a.corpus);
  DomainKG kg = load_kg(a.kg);
  if (a.kg_sample < 100.0) {
    kg = sample_kg(kg, a.kg_sample, a.sample_seed);
    std::cout << "sampled KG to " << kg.nodes.size() << " nodes\n";
  }

  std::vector<EnrichedSequence> sequences;
  if (a.stochastic) {
    PivotPolicy policy;
    policy.precision_target = a.precision;
    policy.recall_target = a.recall;
    policy.rng_seed = a.seed;
    const StochasticInsertion ins = stochastic_train_insertion(corpus, policy);
    std::cout << "true pivots: " << ins.true_insertions
              << "\nfalse pivots: " << ins.false_insertions
              << "\nachieved precision: " << ins.achieved_precision
              << "\nachieved recall: " << ins.achieved_recall << "\n";
    sequences = ins.sequences;
  } else {
    sequences = deterministic_train_insertion(corpus, kg);
    const PivotPr pr = pivot_token_pr(sequences);
    if (pr.no_pivots) {
      std::cout << "no pivots inserted\n";
    } else {
      std::cout << "pivot precision: " << pr.precision
                << "\npivot recall: " << pr.recall << "\n";
    }
  }
  save_enriched(EnrichedCorpus::from_sequences(corpus, sequences), a.out);
  std::cout << "wrote " << a.out << "\n";
}

struct TrainArgs {
  std::string train_corpus, train_enriched, val_corpus, val_enriched, out;
  bool marked = false;
  bool score_pivots = false;
  ModelConfig model;
  TrainConfig trainer;
  std::string attention = "baseline_dea";
};

void cmd_train(const TrainArgs& a) {
  if (a.train_corpus.empty() == a.train_enriched.empty()) {
    throw std::invalid_argument(
        "exactly one of --train / --train-enriched is required");
  }
  ModelConfig model_cfg = a.model;
  model_cfg.mode = parse_attention_mode(a.attention);

  std::vector<ModelInput> train_in, val_in;
  if (!a.train_corpus.empty()) {
    train_in = inputs_from_corpus(load_corpus(a.train_corpus));
  } else {
    train_in = inputs_from_enriched_corpus(load_enriched(a.train_enriched),
                                           a.marked, a.score_pivots);
  }
  if (!a.val_corpus.empty()) {
    val_in = inputs_from_corpus(load_corpus(a.val_corpus));
  } else if (!a.val_enriched.empty()) {
    val_in = inputs_from_enriched_corpus(load_enriched(a.val_enriched),
                                         a.marked, a.score_pivots);
  }

  std::vector<std::vector<std::string>> train_tokens;
  for (const ModelInput& in : train_in) train_tokens.push_back(in.tokens);
  const Vocab vocab = Vocab::build(train_tokens, a.trainer.vocab_min_count);
  std::cout << "vocabulary size: " << vocab.size() << "\n";

  const EncoderParams initial =
      EncoderParams::init(model_cfg, vocab, a.trainer.seed);
  const TrainResult result = train(train_in, val_in, initial, a.trainer);
  std::cout << "epochs run: " << result.epochs_run << "\n";
  std::cout << "best epoch: " << result.best_epoch << "\n";
  std::cout << "best validation span F1: " << result.best_val_f1 << "\n";
  if (!result.epoch_train_loss.empty()) {
    std::cout << "final train loss: " << result.epoch_train_loss.back() << "\n";
  }
  save_checkpoint(result.params, a.out);
  std::cout << "wrote " << a.out << "\n";
}

struct EvalArgs {
  std::string checkpoint, corpus, enriched, kg, out, export_embeddings;
  bool marked = false;
  bool kg_only = false;
  double kg_sample = 100.0;
  uint64_t sample_seed = 0;
  int tally = 0;
};

void cmd_eval(const EvalArgs& a) {
  const Corpus corpus = load_corpus(a.corpus);
  std::vector<std::vector<BioLabel>> gold;
  for (const TaggedSentence& s : corpus.sentences) {
    if (!s.labels) {
      throw std::invalid_argument("evaluation corpus must carry gold labels");
    }
    gold.push_back(*s.labels);
  }

  std::optional<DomainKG> kg;
  if (!a.kg.empty()) {
    kg = load_kg(a.kg);
    if (a.kg_sample < 100.0) {
      kg = sample_kg(*kg, a.kg_sample, a.sample_seed);
      std::cout << "sampled KG to " << kg->nodes.size() << " nodes\n";
    }
  }

  std::vector<std::vector<BioLabel>> predictions;
  std::vector<ModelInput> inputs;
  std::optional<EncoderParams> params;
  if (a.kg_only) {
    if (!kg) throw std::invalid_argument("--kg-only requires --kg");
    predictions = kg_only_tagger(corpus, *kg);
  } else {
    if (a.checkpoint.empty()) {
      throw std::invalid_argument("--checkpoint is required unless --kg-only");
    }
    params = load_checkpoint(a.checkpoint);
    if (!a.enriched.empty()) {
      inputs = inputs_from_enriched_corpus(load_enriched(a.enriched), a.marked,
                                           false);
    } else if (kg) {
      const std::vector<EnrichedSequence> seqs =
          deterministic_train_insertion(corpus, *kg);
      EnrichedCorpus enriched = EnrichedCorpus::from_sequences(corpus, seqs);
      inputs = inputs_from_enriched_corpus(enriched, a.marked, false);
    } else {
      inputs = inputs_from_corpus(corpus);
    }
    predictions = predict(inputs, *params);
  }

  const EvalReport report = exact_match_f1(predictions, gold);
  print_eval_report(report, std::cout);
  if (!a.out.empty()) {
    std::ostringstream json;
    json << "{\n  \"precision\": " << report.precision
         << ",\n  \"recall\": " << report.recall
         << ",\n  \"f1\": " << report.f1
         << ",\n  \"true_positives\": " << report.true_positives
         << ",\n  \"predicted_spans\": " << report.predicted_spans
         << ",\n  \"gold_spans\": " << report.gold_spans << "\n}\n";
    write_file(a.out, json.str());
    std::cout << "wrote " << a.out << "\n";
  }

  if (a.tally > 0) {
    const TokenTally tally = tp_fn_tally(predictions, gold, corpus);
    std::cout << "top true-positive tokens:\n";
    for (int i = 0; i < a.tally &&
                    i < static_cast<int>(tally.true_positives.size());
         ++i) {
      std::cout << "  " << tally.true_positives[i].first << "\t"
                << tally.true_positives[i].second << "\n";
    }
    std::cout << "top false-negative tokens:\n";
    for (int i = 0; i < a.tally &&
                    i < static_cast<int>(tally.false_negatives.size());
         ++i) {
      std::cout << "  " << tally.false_negatives[i].first << "\t"
                << tally.false_negatives[i].second << "\n";
    }
  }

  if (!a.export_embeddings.empty()) {
    if (!params) {
      throw std::invalid_argument(
          "--export-embeddings needs a model checkpoint");
    }
    const auto rows = collect_aspect_embeddings(corpus, inputs, *params);
    save_embedding_rows(rows, params->cfg.width(), a.export_embeddings);
    std::cout << "wrote " << rows.size() << " embedding rows to "
              << a.export_embeddings << "\n";
  }
}

struct GradCheckArgs {
  std::string attention = "modified_dea";
  ModelConfig model;
  int tokens = 4;
  uint64_t seed = 0;
  double tolerance = 1e-4;
};

int cmd_grad_check(const GradCheckArgs& a) {
  ModelConfig cfg = a.model;
  cfg.mode = parse_attention_mode(a.attention);
  cfg.validate();
  if (a.tokens < 1 || a.tokens > cfg.max_len) {
    throw std::invalid_argument("--tokens out of range");
  }

  std::vector<std::string> words;
  for (int i = 0; i < a.tokens; ++i) words.push_back("w" + std::to_string(i));
  const Vocab vocab = Vocab::build({words});
  const EncoderParams params = EncoderParams::init(cfg, vocab, a.seed);

  Rng rng(a.seed + 1);
  ModelInput input;
  input.tokens = words;
  for (int i = 0; i < a.tokens; ++i) {
    input.labels.push_back(static_cast<int>(rng.below(5)));
    input.flags.push_back(rng.below(2) == 1);
    input.origin.push_back(i);
  }
  input.original_len = static_cast<std::size_t>(a.tokens);
  const Batch batch = make_batch({input}, vocab, cfg);

  const GradientCheckReport report = gradient_check(params, batch);
  for (const auto& [name, err] : report.per_tensor) {
    std::cout << name << "\t" << err << "\n";
  }
  std::cout << "max relative error: " << report.max_rel_error << " ("
            << report.worst_tensor << ")\n";
  if (report.max_rel_error >= a.tolerance) {
    std::cout << "FAIL: tolerance " << a.tolerance << " exceeded\n";
    return 3;
  }
  std::cout << "PASS: within tolerance " << a.tolerance << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-domain aspect extraction with KG-injected taggers"};
  app.require_subcommand(1);
  int exit_code = 0;

  // build-kg
  BuildKgArgs bk;
  CLI::App* build_kg = app.add_subcommand(
      "build-kg", "Build a pruned domain KG from triples and embeddings");
  build_kg->add_option("--corpus", bk.corpus, "Domain corpus (TSV)")->required();
  build_kg->add_option("--triples", bk.triples, "Triple dump (TSV)")->required();
  build_kg->add_option("--embeddings", bk.embeddings, "Concept embeddings")
      ->required();
  build_kg->add_option("--generator", bk.generator,
                       "Optional SEED\\tTAIL completion file");
  build_kg->add_option("--out", bk.out, "Output KG path")->required();
  build_kg->add_option("--k-seeds", bk.kg.k_seeds, "Seed term count");
  build_kg->add_option("--max-hops", bk.kg.max_hops, "Expansion hops");
  build_kg->add_option("--min-relatedness", bk.kg.min_path_relatedness,
                       "Path bottleneck threshold");
  build_kg->add_option("--generator-completions", bk.kg.generator_completions,
                       "Generated tails per seed");
  build_kg->callback([&] { cmd_build_kg(bk); });

  // enrich
  EnrichArgs en;
  CLI::App* enrich = app.add_subcommand(
      "enrich", "Insert pivot tokens into a corpus using a KG");
  enrich->add_option("--corpus", en.corpus, "Corpus (TSV)")->required();
  enrich->add_option("--kg", en.kg, "Domain KG")->required();
  enrich->add_option("--out", en.out, "Enriched corpus output")->required();
  enrich->add_flag("--stochastic", en.stochastic,
                   "Label-driven insertion with (p, r) targets");
  enrich->add_option("--precision", en.precision, "Stochastic precision target");
  enrich->add_option("--recall", en.recall, "Stochastic recall target");
  enrich->add_option("--seed", en.seed, "Stochastic insertion seed");
  enrich->add_option("--kg-sample", en.kg_sample,
                     "Keep this percent of non-seed KG nodes");
  enrich->add_option("--sample-seed", en.sample_seed, "KG sampling seed");
  enrich->callback([&] { cmd_enrich(en); });

  // train
  TrainArgs tr;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train a tagger and save its checkpoint");
  train_cmd->add_option("--train", tr.train_corpus, "Plain training corpus");
  train_cmd->add_option("--train-enriched", tr.train_enriched,
                        "Enriched training corpus");
  train_cmd->add_option("--val", tr.val_corpus, "Plain validation corpus");
  train_cmd->add_option("--val-enriched", tr.val_enriched,
                        "Enriched validation corpus");
  train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
  train_cmd->add_flag("--marked", tr.marked,
                      "Feed indicator flags instead of pivot tokens");
  train_cmd->add_flag("--score-pivots", tr.score_pivots,
                      "Include pivot positions in the loss");
  train_cmd->add_option("--attention", tr.attention,
                        "plain | baseline_dea | modified_dea");
  train_cmd->add_option("--d", tr.model.d, "Per-head width");
  train_cmd->add_option("--heads", tr.model.heads, "Attention heads");
  train_cmd->add_option("--layers", tr.model.layers, "Encoder layers");
  train_cmd->add_option("--k-rel", tr.model.k_rel, "Relative position window");
  train_cmd->add_option("--max-len", tr.model.max_len, "Truncation length");
  train_cmd->add_option("--lr", tr.trainer.lr, "Learning rate");
  train_cmd->add_option("--batch-size", tr.trainer.batch_size, "Batch size");
  train_cmd->add_option("--epochs", tr.trainer.max_epochs, "Epoch cap");
  train_cmd->add_option("--weight-decay", tr.trainer.weight_decay,
                        "Decoupled weight decay");
  train_cmd->add_option("--patience", tr.trainer.patience,
                        "Early stopping patience");
  train_cmd->add_option("--min-count", tr.trainer.vocab_min_count,
                        "Vocabulary frequency cutoff; rarer types become [UNK]");
  train_cmd->add_option("--seed", tr.trainer.seed, "Init and shuffle seed");
  train_cmd->callback([&] { cmd_train(tr); });

  // eval
  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Score a checkpoint or the KG-only baseline on a corpus");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Model checkpoint");
  eval_cmd->add_option("--corpus", ev.corpus, "Gold-labeled corpus")->required();
  eval_cmd->add_option("--enriched", ev.enriched,
                       "Pre-enriched view of the corpus");
  eval_cmd->add_option("--kg", ev.kg, "KG for on-the-fly enrichment");
  eval_cmd->add_flag("--marked", ev.marked,
                     "Feed indicator flags instead of pivot tokens");
  eval_cmd->add_flag("--kg-only", ev.kg_only, "Score the no-model KG baseline");
  eval_cmd->add_option("--kg-sample", ev.kg_sample,
                       "Keep this percent of non-seed KG nodes");
  eval_cmd->add_option("--sample-seed", ev.sample_seed, "KG sampling seed");
  eval_cmd->add_option("--tally", ev.tally, "Print top-N TP/FN tokens");
  eval_cmd->add_option("--export-embeddings", ev.export_embeddings,
                       "Write aspect hidden states to this path");
  eval_cmd->add_option("--out", ev.out, "Write the span report as JSON");
  eval_cmd->callback([&] { cmd_eval(ev); });

  // run-experiment
  ExperimentConfig xc;
  std::string config_path, seeds_csv, mode_flag, insertion_flag;
  double p_override = -1.0, r_override = -1.0;
  CLI::App* run_cmd = app.add_subcommand(
      "run-experiment", "Run (partition x seed) transfer experiments");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)");
  run_cmd->add_option("--source", xc.source_corpus, "Source corpus override");
  run_cmd->add_option("--target", xc.target_corpus, "Target corpus override");
  run_cmd->add_option("--triples", xc.triples, "Triple dump override");
  run_cmd->add_option("--embeddings", xc.embeddings, "Embeddings override");
  run_cmd->add_option("--generator", xc.generator, "Generator file override");
  run_cmd->add_option("--kg-file", xc.kg_file, "Prebuilt KG override");
  run_cmd->add_option("--out", xc.out_dir, "Output directory override");
  run_cmd->add_option("--mode", mode_flag,
                      "plain | pivot | modified_dea | kg_only");
  run_cmd->add_option("--insertion", insertion_flag,
                      "stochastic | deterministic");
  run_cmd->add_option("--seeds", seeds_csv, "Comma-separated run seeds");
  run_cmd->add_option("--partition-seed", xc.partition_seed,
                      "Partition shuffle seed")
      ->capture_default_str();
  run_cmd->add_option("--kg-sample", xc.kg_sample_pct,
                      "Percent of non-seed KG nodes for test enrichment")
      ->capture_default_str();
  run_cmd->add_option("--p-override", p_override,
                      "Fixed precision target (with --r-override)");
  run_cmd->add_option("--r-override", r_override,
                      "Fixed recall target (with --p-override)");
  run_cmd->add_flag("--score-pivots", xc.score_pivots,
                    "Include pivot positions in the loss");
  run_cmd->add_option("--d", xc.model.d, "Per-head width")->capture_default_str();
  run_cmd->add_option("--heads", xc.model.heads, "Attention heads")
      ->capture_default_str();
  run_cmd->add_option("--layers", xc.model.layers, "Encoder layers")
      ->capture_default_str();
  run_cmd->add_option("--k-rel", xc.model.k_rel, "Relative position window")
      ->capture_default_str();
  run_cmd->add_option("--max-len", xc.model.max_len, "Truncation length")
      ->capture_default_str();
  run_cmd->add_option("--lr", xc.trainer.lr, "Learning rate")
      ->capture_default_str();
  run_cmd->add_option("--batch-size", xc.trainer.batch_size, "Batch size")
      ->capture_default_str();
  run_cmd->add_option("--epochs", xc.trainer.max_epochs, "Epoch cap")
      ->capture_default_str();
  run_cmd->add_option("--weight-decay", xc.trainer.weight_decay,
                      "Decoupled weight decay")
      ->capture_default_str();
  run_cmd->add_option("--patience", xc.trainer.patience,
                      "Early stopping patience")
      ->capture_default_str();
  run_cmd->add_option("--min-count", xc.trainer.vocab_min_count,
                      "Vocabulary frequency cutoff; rarer types become [UNK]")
      ->capture_default_str();
  run_cmd->callback([&] {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_experiment_config(config_path);
    // Flags override file values only when actually given.
    if (run_cmd->count("--source")) cfg.source_corpus = xc.source_corpus;
    if (run_cmd->count("--target")) cfg.target_corpus = xc.target_corpus;
    if (run_cmd->count("--triples")) cfg.triples = xc.triples;
    if (run_cmd->count("--embeddings")) cfg.embeddings = xc.embeddings;
    if (run_cmd->count("--generator")) cfg.generator = xc.generator;
    if (run_cmd->count("--kg-file")) cfg.kg_file = xc.kg_file;
    if (run_cmd->count("--out")) cfg.out_dir = xc.out_dir;
    if (!mode_flag.empty()) cfg.mode = parse_run_mode(mode_flag);
    if (!insertion_flag.empty()) {
      cfg.insertion = parse_insertion_mode(insertion_flag);
    }
    if (!seeds_csv.empty()) {
      cfg.seeds.clear();
      std::istringstream in(seeds_csv);
      std::string item;
      while (std::getline(in, item, ',')) {
        cfg.seeds.push_back(std::stoull(item));
      }
    }
    if (run_cmd->count("--partition-seed")) {
      cfg.partition_seed = xc.partition_seed;
    }
    if (run_cmd->count("--kg-sample")) cfg.kg_sample_pct = xc.kg_sample_pct;
    if (p_override >= 0.0) cfg.precision_override = p_override;
    if (r_override >= 0.0) cfg.recall_override = r_override;
    if (run_cmd->count("--score-pivots")) cfg.score_pivots = xc.score_pivots;
    if (run_cmd->count("--d")) cfg.model.d = xc.model.d;
    if (run_cmd->count("--heads")) cfg.model.heads = xc.model.heads;
    if (run_cmd->count("--layers")) cfg.model.layers = xc.model.layers;
    if (run_cmd->count("--k-rel")) cfg.model.k_rel = xc.model.k_rel;
    if (run_cmd->count("--max-len")) cfg.model.max_len = xc.model.max_len;
    if (run_cmd->count("--lr")) cfg.trainer.lr = xc.trainer.lr;
    if (run_cmd->count("--batch-size")) {
      cfg.trainer.batch_size = xc.trainer.batch_size;
    }
    if (run_cmd->count("--epochs")) {
      cfg.trainer.max_epochs = xc.trainer.max_epochs;
    }
    if (run_cmd->count("--weight-decay")) {
      cfg.trainer.weight_decay = xc.trainer.weight_decay;
    }
    if (run_cmd->count("--patience")) cfg.trainer.patience = xc.trainer.patience;
    if (run_cmd->count("--min-count")) {
      cfg.trainer.vocab_min_count = xc.trainer.vocab_min_count;
    }

    const ExperimentSummary summary = run_experiment(cfg);
    std::cout << render_report_table({summary});
    if (summary.partial) {
      std::cout << "some runs failed; see " << cfg.out_dir << "/runs\n";
      exit_code = 3;
    }
  });

  // report
  std::string report_dir, report_tsv, report_table;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Tabulate experiment summaries from a directory");
  report_cmd->add_option("--dir", report_dir, "Directory of experiment outputs")
      ->required();
  report_cmd->add_option("--out-tsv", report_tsv, "Write the TSV here");
  report_cmd->add_option("--out-table", report_table, "Write the table here");
  report_cmd->callback([&] {
    const std::vector<ExperimentSummary> summaries = load_summaries(report_dir);
    const std::string table = render_report_table(summaries);
    std::cout << table;
    if (!report_tsv.empty()) write_file(report_tsv, render_report_tsv(summaries));
    if (!report_table.empty()) write_file(report_table, table);
  });

  // grad-check
  GradCheckArgs gc;
  CLI::App* grad_cmd = app.add_subcommand(
      "grad-check", "Compare analytic gradients to finite differences");
  grad_cmd->add_option("--attention", gc.attention,
                       "plain | baseline_dea | modified_dea");
  grad_cmd->add_option("--d", gc.model.d, "Per-head width")
      ->capture_default_str();
  grad_cmd->add_option("--heads", gc.model.heads, "Attention heads")
      ->capture_default_str();
  grad_cmd->add_option("--layers", gc.model.layers, "Encoder layers")
      ->capture_default_str();
  grad_cmd->add_option("--k-rel", gc.model.k_rel, "Relative position window")
      ->capture_default_str();
  grad_cmd->add_option("--tokens", gc.tokens, "Sequence length")
      ->capture_default_str();
  grad_cmd->add_option("--seed", gc.seed, "Init seed");
  grad_cmd->add_option("--tolerance", gc.tolerance, "Max relative error")
      ->capture_default_str();
  grad_cmd->callback([&] { exit_code = cmd_grad_check(gc); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.rfind("cannot open", 0) == 0) {
      std::cerr << "data error: " << what << "\n";
      return 2;
    }
    std::cerr << "run failure: " << what << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "run failure: " << e.what() << "\n";
    return 3;
  }
  return exit_code;
}
