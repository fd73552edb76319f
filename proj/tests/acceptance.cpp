// Acceptance gate: eleven end-to-end properties, one verdict line each.
// Every numeric check pins its tolerance here, and every oracle is written
// out locally as straight-line scalar code so it cannot share a bug with the
// library implementation.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "akg/annotate.hpp"
#include "akg/corpus.hpp"
#include "akg/embedding.hpp"
#include "akg/eval.hpp"
#include "akg/experiment.hpp"
#include "akg/inject.hpp"
#include "akg/kg.hpp"
#include "akg/model.hpp"
#include "akg/rng.hpp"
#include "akg/triples.hpp"

using namespace akg;

namespace {

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(3) << v;
  return out.str();
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients against central finite differences on the
//    indicator-embedding attention model.

Verdict gradient_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  ModelConfig cfg;
  cfg.d = 8;
  cfg.heads = 2;
  cfg.layers = 1;
  cfg.k_rel = 4;
  cfg.max_len = 8;
  cfg.mode = AttentionMode::modified_dea;

  const std::vector<std::string> words = {"w0", "w1", "w2", "w3"};
  const Vocab vocab = Vocab::build({words});
  const EncoderParams params = EncoderParams::init(cfg, vocab, 11);

  Rng rng(12);
  ModelInput input;
  input.tokens = words;
  for (int i = 0; i < 4; ++i) {
    input.labels.push_back(static_cast<int>(rng.below(5)));
    input.flags.push_back(rng.below(2) == 1);
    input.origin.push_back(i);
  }
  input.original_len = 4;
  const Batch batch = make_batch({input}, vocab, cfg);

  const GradientCheckReport report = gradient_check(params, batch);
  bool saw_indicator_tensors = false;
  for (const auto& [name, err] : report.per_tensor) {
    (void)err;
    if (name.find("m_plus") != std::string::npos ||
        name.find("wqm") != std::string::npos) {
      saw_indicator_tensors = true;
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass =
      report.max_rel_error < 1e-4 && saw_indicator_tensors && elapsed < 30.0;
  return {"gradient_fidelity", pass,
          "max_rel=" + fmt(report.max_rel_error) + " worst=" +
              report.worst_tensor + " " + fmt(elapsed) + "s"};
}

// ---------------------------------------------------------------------------
// Shared scalar attention oracle for criteria 2 and 3.  Triple loops, local
// softmax, nothing borrowed from the library.

void oracle_attention(const AttentionInputs& in, bool with_indicator,
                      Eigen::MatrixXd& scores, Eigen::MatrixXd& weights,
                      Eigen::MatrixXd& output) {
  const int n = static_cast<int>(in.qc.rows());
  const int d = static_cast<int>(in.qc.cols());
  scores.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        s += in.qc(i, k) * in.kc(j, k);                   // content to content
        s += in.qc(i, k) * in.pk(in.delta(i, j), k);      // content to position
        s += in.kc(j, k) * in.pq(in.delta(j, i), k);      // position to content
        if (with_indicator) {
          s += in.qc(i, k) * in.km(j, k);                 // content to marker
          s += in.qm(i, k) * in.kc(j, k);                 // marker to content
        }
      }
      scores(i, j) = s;
    }
  }
  const double temp = std::sqrt((with_indicator ? 5.0 : 3.0) * d);
  weights.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    double hi = scores(i, 0) / temp;
    for (int j = 1; j < n; ++j) hi = std::max(hi, scores(i, j) / temp);
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp(scores(i, j) / temp - hi);
    for (int j = 0; j < n; ++j) {
      weights(i, j) = std::exp(scores(i, j) / temp - hi) / z;
    }
  }
  output.setZero(n, d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      for (int j = 0; j < n; ++j) output(i, k) += weights(i, j) * in.vc(j, k);
    }
  }
}

AttentionInputs random_attention_inputs(Rng& rng, int n, int d, int k_rel) {
  AttentionInputs in;
  const auto fill = [&rng](Eigen::MatrixXd& m, int rows, int cols) {
    m.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
    }
  };
  fill(in.qc, n, d);
  fill(in.kc, n, d);
  fill(in.vc, n, d);
  fill(in.pq, 2 * k_rel, d);
  fill(in.pk, 2 * k_rel, d);
  fill(in.qm, n, d);
  fill(in.km, n, d);
  in.delta = delta_matrix(n, k_rel);
  return in;
}

// 2. Zeroed marker projections collapse the extended scores onto the base
//    formula exactly, and the row argmax survives the temperature change.

Verdict attention_reduction() {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const int d = 2 + static_cast<int>(rng.below(4));
    const int k_rel = 1 + static_cast<int>(rng.below(3));
    AttentionInputs in = random_attention_inputs(rng, n, d, k_rel);
    in.qm.setZero();
    in.km.setZero();
    const AttentionResult base = disentangled_attention(in);
    const AttentionResult ext = modified_attention(in);
    if (!(ext.scores.array() == base.scores.array()).all()) {
      return {"attention_reduction", false,
              "scores differ at trial " + std::to_string(trial)};
    }
    for (int i = 0; i < n; ++i) {
      int arg_base = 0, arg_ext = 0;
      for (int j = 1; j < n; ++j) {
        if (base.weights(i, j) > base.weights(i, arg_base)) arg_base = j;
        if (ext.weights(i, j) > ext.weights(i, arg_ext)) arg_ext = j;
      }
      if (arg_base != arg_ext) {
        return {"attention_reduction", false,
                "argmax differs at trial " + std::to_string(trial)};
      }
    }
  }
  return {"attention_reduction", true, "100 instances exact"};
}

// 3. Matrix attention against the scalar oracle, both formulas.

Verdict attention_oracle() {
  Rng rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const int d = 2 + static_cast<int>(rng.below(4));
    const int k_rel = 1 + static_cast<int>(rng.below(3));
    const AttentionInputs in = random_attention_inputs(rng, n, d, k_rel);
    for (const bool with_indicator : {false, true}) {
      Eigen::MatrixXd scores, weights, output;
      oracle_attention(in, with_indicator, scores, weights, output);
      const AttentionResult got =
          with_indicator ? modified_attention(in) : disentangled_attention(in);
      worst = std::max(worst, (got.scores - scores).cwiseAbs().maxCoeff());
      worst = std::max(worst, (got.weights - weights).cwiseAbs().maxCoeff());
      worst = std::max(worst, (got.output - output).cwiseAbs().maxCoeff());
    }
  }
  return {"attention_oracle", worst < 1e-10, "max_abs_diff=" + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 4. Expansion and pruning against exhaustive path enumeration.

Verdict kg_pruning_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(41);
  KgConfig cfg;  // two hops, threshold 0.2
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(48));
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));

    TripleStore store;
    const int n_edges = n + static_cast<int>(rng.below(names.size()));
    for (int e = 0; e < n_edges; ++e) {
      const std::string& a = names[rng.below(names.size())];
      const std::string& b = names[rng.below(names.size())];
      if (a == b) continue;
      store.add({a, "RelatedTo", b, TripleSource::dump});
    }

    EmbeddingTable table;
    table.dimension = 3;
    for (const std::string& name : names) {
      if (rng.below(10) == 0) continue;  // some concepts stay unresolvable
      Eigen::VectorXd v(3);
      for (int k = 0; k < 3; ++k) v(k) = rng.uniform(-1.0, 1.0);
      table.entries[name] = v;
    }

    const std::string seed = names[0];
    if (!store.contains(seed)) continue;

    // Cosine to the seed, zero whenever either side has no usable vector.
    const auto cos_to_seed = [&](const std::string& term) {
      const auto sv = table.entries.find(seed);
      const auto tv = table.entries.find(term);
      if (sv == table.entries.end() || tv == table.entries.end()) return 0.0;
      const double denom = sv->second.norm() * tv->second.norm();
      return denom == 0.0 ? 0.0 : sv->second.dot(tv->second) / denom;
    };

    // Every path of length one or two out of the seed; a node is kept when
    // its best path bottleneck clears the threshold.
    std::set<std::string> expected = {seed};
    for (const std::string& a : store.neighbors(seed)) {
      if (cos_to_seed(a) >= cfg.min_path_relatedness) expected.insert(a);
      for (const std::string& b : store.neighbors(a)) {
        if (b == seed) continue;
        const double bottleneck = std::min(cos_to_seed(a), cos_to_seed(b));
        if (bottleneck >= cfg.min_path_relatedness) expected.insert(b);
      }
    }

    const SeedExpansion got = expand_and_prune(store, seed, table, cfg);
    std::set<std::string> got_set;
    for (const auto& [term, hop_score] : got.retained) {
      (void)hop_score;
      got_set.insert(term);
    }
    if (got_set != expected) {
      return {"kg_pruning_oracle", false,
              "set mismatch on graph " + std::to_string(trial)};
    }
  }
  const double elapsed = seconds_since(start);
  return {"kg_pruning_oracle", elapsed < 10.0,
          "200 graphs exact, " + fmt(elapsed) + "s"};
}

// ---------------------------------------------------------------------------
// 5. Stochastic insertion hits its precision and recall targets and is
//    seed-deterministic.

std::string sequences_fingerprint(const std::vector<EnrichedSequence>& seqs) {
  std::ostringstream out;
  for (const EnrichedSequence& seq : seqs) {
    for (const std::string& token : seq.tokens) out << token << ' ';
    out << '\n';
  }
  return out.str();
}

Verdict stochastic_calibration() {
  Corpus corpus;
  corpus.domain_id = "cal";
  for (int s = 0; s < 5000; ++s) {
    TaggedSentence sent;
    sent.tokens = {"a" + std::to_string(2 * s), "x", "y",
                   "a" + std::to_string(2 * s + 1), "z", "q"};
    const std::vector<BioLabel> labels = {BioLabel::BA, BioLabel::N,
                                          BioLabel::N,  BioLabel::BA,
                                          BioLabel::N,  BioLabel::N};
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      sent.pos.push_back("NOUN");
      sent.dep_head.push_back(static_cast<int>(i));
      sent.dep_label.push_back("dep");
    }
    sent.labels = labels;
    corpus.sentences.push_back(std::move(sent));
  }

  PivotPolicy policy;
  policy.precision_target = 0.8;
  policy.recall_target = 0.7;
  policy.rng_seed = 99;
  const StochasticInsertion first = stochastic_train_insertion(corpus, policy);
  const StochasticInsertion second = stochastic_train_insertion(corpus, policy);

  const PivotPr tokens = pivot_token_pr(first.sequences);
  const bool spans_ok = std::abs(first.achieved_precision - 0.8) <= 0.02 &&
                        std::abs(first.achieved_recall - 0.7) <= 0.02;
  const bool tokens_ok = std::abs(tokens.precision - 0.8) <= 0.02 &&
                         std::abs(tokens.recall - 0.7) <= 0.02;
  const bool deterministic = sequences_fingerprint(first.sequences) ==
                             sequences_fingerprint(second.sequences);
  return {"stochastic_calibration", spans_ok && tokens_ok && deterministic,
          "span p=" + fmt(first.achieved_precision) + " r=" +
              fmt(first.achieved_recall) + " token p=" + fmt(tokens.precision) +
              " r=" + fmt(tokens.recall) +
              (deterministic ? ", deterministic" : ", NONDETERMINISTIC")};
}

// ---------------------------------------------------------------------------
// 6. Inserting then stripping pivots is the identity, and the documented
//    walkthrough sentence comes out token for token.

Verdict pivot_round_trip() {
  Rng rng(61);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    TaggedSentence sent;
    for (std::size_t i = 0; i < n; ++i) {
      sent.tokens.push_back("t" + std::to_string(rng.below(20)));
      sent.pos.push_back("NOUN");
      sent.dep_head.push_back(static_cast<int>(i));
      sent.dep_label.push_back("dep");
    }

    // Up to three disjoint spans, laid left to right.
    InjectionPlan plan;
    std::size_t cursor = 0;
    const std::size_t want = rng.below(4);
    while (plan.matches.size() < want && cursor < n) {
      const std::size_t start = cursor + rng.below(3);
      if (start >= n) break;
      const std::size_t end = std::min(n, start + 1 + rng.below(2));
      plan.matches.push_back({{start, end}, "node", start});
      cursor = end + 1;
    }
    if (trial % 2 == 0) {
      std::vector<BioLabel> labels(n, BioLabel::N);
      for (const InjectionMatch& m : plan.matches) {
        labels[m.span.start] = BioLabel::BA;
        for (std::size_t t = m.span.start + 1; t < m.span.end; ++t) {
          labels[t] = BioLabel::IA;
        }
      }
      sent.labels = labels;
    }

    const EnrichedSequence enriched = insert_pivots(sent, plan);
    const StrippedSequence stripped = strip_pivots(enriched);
    if (stripped.tokens != sent.tokens) {
      return {"pivot_round_trip", false,
              "tokens changed at trial " + std::to_string(trial)};
    }
    std::vector<std::optional<PivotKind>> want_flags(n);
    for (const InjectionMatch& m : plan.matches) {
      want_flags[m.span.start] = PivotKind::b;
      for (std::size_t t = m.span.start + 1; t < m.span.end; ++t) {
        want_flags[t] = PivotKind::i;
      }
    }
    if (stripped.pivot_after != want_flags) {
      return {"pivot_round_trip", false,
              "flags changed at trial " + std::to_string(trial)};
    }
    const EnrichedSequence rebuilt = enrich_from_flags(sent, stripped.pivot_after);
    if (rebuilt.tokens != enriched.tokens) {
      return {"pivot_round_trip", false,
              "rebuild differs at trial " + std::to_string(trial)};
    }
  }

  // The documented walkthrough: a two-token dish either side of the pivots.
  TaggedSentence sent;
  sent.tokens = {"it", "was", "the", "best", "pad", "thai", "i", "'ve",
                 "ever", "had"};
  sent.pos = {"PRON", "AUX", "DET", "ADJ", "NOUN", "NOUN", "PRON", "AUX",
              "ADV", "VERB"};
  sent.dep_head = {1, 1, 5, 5, 5, 1, 9, 9, 9, 1};
  sent.dep_label = {"dep", "dep", "det", "amod", "compound", "dep", "dep",
                    "dep", "dep", "dep"};
  DomainKG kg;
  kg.nodes["pad_thai"] = KgNode{};
  const InjectionPlan plan = plan_injections(sent, kg);
  const EnrichedSequence enriched = insert_pivots(sent, plan);
  const std::vector<std::string> expected = {
      "it",   "was",        "the",  "best",       "pad", "[DOMAIN-B]",
      "thai", "[DOMAIN-I]", "i",    "'ve",        "ever", "had"};
  if (enriched.tokens != expected) {
    std::string got;
    for (const std::string& t : enriched.tokens) got += t + " ";
    return {"pivot_round_trip", false, "walkthrough produced: " + got};
  }
  return {"pivot_round_trip", true, "10000 round trips + walkthrough exact"};
}

// ---------------------------------------------------------------------------
// 7. Span scoring against a brute-force span-set oracle.

std::set<std::pair<std::size_t, std::size_t>> oracle_spans(
    const std::vector<BioLabel>& labels) {
  std::set<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i] != BioLabel::BA) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < labels.size() && labels[end] == BioLabel::IA) ++end;
    spans.insert({i, end});
    i = end;
  }
  return spans;
}

Verdict f1_oracle() {
  Rng rng(71);
  const std::vector<BioLabel> all = {BioLabel::BA, BioLabel::IA, BioLabel::BO,
                                     BioLabel::IO, BioLabel::N};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n_sent = 1 + rng.below(4);
    std::vector<std::vector<BioLabel>> pred, gold;
    for (std::size_t s = 0; s < n_sent; ++s) {
      const std::size_t n = 1 + rng.below(10);
      std::vector<BioLabel> p, g;
      for (std::size_t i = 0; i < n; ++i) {
        p.push_back(all[rng.below(all.size())]);
        g.push_back(all[rng.below(all.size())]);
      }
      pred.push_back(p);
      gold.push_back(g);
    }

    std::size_t tp = 0, np = 0, ng = 0;
    for (std::size_t s = 0; s < n_sent; ++s) {
      const auto ps = oracle_spans(pred[s]);
      const auto gs = oracle_spans(gold[s]);
      np += ps.size();
      ng += gs.size();
      for (const auto& span : ps) tp += gs.count(span);
    }
    const double precision = np == 0 ? 0.0 : double(tp) / double(np);
    const double recall = ng == 0 ? 0.0 : double(tp) / double(ng);
    const double f1 = precision + recall == 0.0
                          ? 0.0
                          : 2.0 * precision * recall / (precision + recall);

    const EvalReport got = exact_match_f1(pred, gold);
    if (got.true_positives != tp || got.predicted_spans != np ||
        got.gold_spans != ng || std::abs(got.precision - precision) > 1e-12 ||
        std::abs(got.recall - recall) > 1e-12 || std::abs(got.f1 - f1) > 1e-12) {
      return {"f1_oracle", false, "mismatch at trial " + std::to_string(trial)};
    }
  }

  // Off-by-one boundaries must never count as a hit.
  const std::vector<std::vector<BioLabel>> pred = {
      {BioLabel::BA, BioLabel::IA, BioLabel::IA, BioLabel::N}};
  const std::vector<std::vector<BioLabel>> gold = {
      {BioLabel::BA, BioLabel::IA, BioLabel::N, BioLabel::N}};
  const EvalReport report = exact_match_f1(pred, gold);
  if (report.true_positives != 0 || report.f1 != 0.0) {
    return {"f1_oracle", false, "boundary mismatch scored a true positive"};
  }
  return {"f1_oracle", true, "1000 pairs exact, boundary case 0 TP"};
}

// ---------------------------------------------------------------------------
// 8 and 9. The constructed transfer experiment and its KG-size trend.  These
// share run_experiment output; the config comes from the checked-in file.

struct TransferOutcome {
  Verdict transfer;
  Verdict kg_trend;
};

ExperimentSummary run_arm(ExperimentConfig cfg, RunMode mode, double pct,
                          const std::string& out_dir) {
  cfg.mode = mode;
  cfg.kg_sample_pct = pct;
  cfg.out_dir = out_dir;
  return run_experiment(cfg);
}

TransferOutcome transfer_and_trend(const std::string& config_path) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig base = load_experiment_config(config_path);
  const std::filesystem::path work =
      std::filesystem::temp_directory_path() / "akg_acceptance";
  std::filesystem::remove_all(work);

  const ExperimentSummary pivot =
      run_arm(base, RunMode::pivot, 100.0, (work / "pivot").string());
  const ExperimentSummary plain =
      run_arm(base, RunMode::plain, 100.0, (work / "plain").string());
  const double elapsed = seconds_since(start);

  TransferOutcome out;
  const bool all_ok = !pivot.partial && !plain.partial &&
                      pivot.runs.size() == 9 && plain.runs.size() == 9;
  out.transfer = {"transfer_direction",
                  all_ok && pivot.mean_f1 > plain.mean_f1 && elapsed < 600.0,
                  "pivot=" + fmt(pivot.mean_f1) + " plain=" +
                      fmt(plain.mean_f1) + " over 9 runs each, " +
                      fmt(elapsed) + "s"};

  const ExperimentSummary at10 =
      run_arm(base, RunMode::pivot, 10.0, (work / "kg10").string());
  const ExperimentSummary at50 =
      run_arm(base, RunMode::pivot, 50.0, (work / "kg50").string());
  const std::vector<const ExperimentSummary*> arms = {&at10, &at50, &pivot};
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < arms.size(); ++i) {
    const double va = arms[i]->stddev_f1 * arms[i]->stddev_f1;
    const double vb = arms[i + 1]->stddev_f1 * arms[i + 1]->stddev_f1;
    const double pooled = std::sqrt((va + vb) / 2.0);
    if (arms[i + 1]->mean_f1 < arms[i]->mean_f1 - pooled) monotone = false;
  }
  out.kg_trend = {"kg_size_trend",
                  monotone && !at10.partial && !at50.partial,
                  "mean F1 at 10/50/100% = " + fmt(at10.mean_f1) + "/" +
                      fmt(at50.mean_f1) + "/" + fmt(pivot.mean_f1)};
  std::filesystem::remove_all(work);
  return out;
}

// ---------------------------------------------------------------------------
// 10. Crowd merging against a per-token voting oracle.

std::vector<TokenSpan> oracle_merge(std::size_t n,
                                    const std::vector<WorkerSelection>& sels,
                                    const std::vector<TokenSpan>& existing,
                                    std::size_t quorum) {
  std::vector<std::set<std::string>> votes(n);
  for (const WorkerSelection& sel : sels) {
    for (std::size_t t = sel.span.start; t < sel.span.end; ++t) {
      votes[t].insert(sel.worker_id);
    }
  }
  std::vector<TokenSpan> runs;
  for (std::size_t t = 0; t < n;) {
    if (votes[t].size() < quorum) {
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < n && votes[end].size() >= quorum) ++end;
    runs.push_back({t, end});
    t = end;
  }
  // A vote-backed run enters only when strictly longer than every existing
  // span it touches; the spans it beats drop out.
  std::vector<TokenSpan> result;
  std::vector<bool> dropped(existing.size(), false);
  for (const TokenSpan& run : runs) {
    bool wins = true;
    for (const TokenSpan& old : existing) {
      if (run.overlaps(old) && old.length() >= run.length()) wins = false;
    }
    if (!wins) continue;
    result.push_back(run);
    for (std::size_t i = 0; i < existing.size(); ++i) {
      if (run.overlaps(existing[i])) dropped[i] = true;
    }
  }
  for (std::size_t i = 0; i < existing.size(); ++i) {
    if (!dropped[i]) result.push_back(existing[i]);
  }
  std::sort(result.begin(), result.end());
  return result;
}

Verdict crowd_merge_oracle() {
  Rng rng(101);
  const std::vector<std::string> workers = {"w1", "w2", "w3", "w4", "w5"};
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    TaggedSentence sent;
    for (std::size_t i = 0; i < n; ++i) {
      sent.tokens.push_back("t");
      sent.pos.push_back("NOUN");
      sent.dep_head.push_back(static_cast<int>(i));
      sent.dep_label.push_back("dep");
    }
    std::vector<WorkerSelection> sels;
    for (const std::string& w : workers) {
      const std::size_t k = rng.below(4);
      for (std::size_t s = 0; s < k; ++s) {
        const std::size_t start = rng.below(n);
        const std::size_t end = std::min(n, start + 1 + rng.below(4));
        sels.push_back({w, 0, {start, end}, "aspect", std::nullopt});
      }
    }
    std::vector<TokenSpan> existing;
    std::size_t cursor = rng.below(3);
    while (existing.size() < 2 && cursor < n) {
      const std::size_t end = std::min(n, cursor + 1 + rng.below(3));
      existing.push_back({cursor, end});
      cursor = end + 1 + rng.below(3);
    }

    const std::vector<TokenSpan> got =
        merge_crowd_annotations(sent, sels, existing, 3, 5);
    const std::vector<TokenSpan> want = oracle_merge(n, sels, existing, 3);
    if (got != want) {
      return {"crowd_merge_oracle", false,
              "mismatch at panel " + std::to_string(trial)};
    }
  }

  // Hand panels: a unanimous span survives, a 3-of-5 span survives, a 2-of-5
  // span does not.
  TaggedSentence sent;
  for (int i = 0; i < 6; ++i) {
    sent.tokens.push_back("t");
    sent.pos.push_back("NOUN");
    sent.dep_head.push_back(i);
    sent.dep_label.push_back("dep");
  }
  std::vector<WorkerSelection> sels;
  for (const std::string& w : workers) {
    sels.push_back({w, 0, {1, 2}, "aspect", std::nullopt});
  }
  for (const std::string& w : {std::string("w1"), std::string("w2"),
                               std::string("w3")}) {
    sels.push_back({w, 0, {3, 5}, "aspect", std::nullopt});
  }
  for (const std::string& w : {std::string("w4"), std::string("w5")}) {
    sels.push_back({w, 0, {5, 6}, "aspect", std::nullopt});
  }
  const std::vector<TokenSpan> got = merge_crowd_annotations(sent, sels, {}, 3, 5);
  const std::vector<TokenSpan> want = {{1, 2}, {3, 5}};
  if (got != want) {
    return {"crowd_merge_oracle", false, "hand panel mismatch"};
  }
  return {"crowd_merge_oracle", true, "500 panels + hand panels exact"};
}

// ---------------------------------------------------------------------------
// 11. The two documented diagnostic examples.

Verdict diagnostics_examples() {
  const std::vector<Eigen::VectorXd> a = {Eigen::Vector2d(0.0, 0.0)};
  const std::vector<Eigen::VectorXd> b = {Eigen::Vector2d(3.0, 4.0),
                                          Eigen::Vector2d(6.0, 8.0)};
  const KClosestReport distance = k_closest_distance(a, b, 2);
  const bool distance_ok = std::abs(distance.a_to_b - 7.5) <= 1e-9;

  Corpus corpus;
  corpus.domain_id = "diag";
  const auto add = [&corpus](std::vector<std::string> tokens,
                             std::vector<BioLabel> labels) {
    TaggedSentence sent;
    sent.tokens = std::move(tokens);
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      sent.pos.push_back("NOUN");
      sent.dep_head.push_back(static_cast<int>(i));
      sent.dep_label.push_back("dep");
    }
    sent.labels = std::move(labels);
    corpus.sentences.push_back(std::move(sent));
  };
  add({"the", "food", "arrived"}, {BioLabel::N, BioLabel::BA, BioLabel::N});
  add({"good", "food"}, {BioLabel::N, BioLabel::BA});
  add({"food", "again"}, {BioLabel::BA, BioLabel::N});
  add({"ordering", "food", "takes", "time"},
      {BioLabel::N, BioLabel::N, BioLabel::N, BioLabel::N});
  const ConsistencyReport consistency = aspect_consistency(corpus);
  const bool consistency_ok =
      std::abs(consistency.consistency - 0.75) <= 1e-9 &&
      consistency.cardinality == 1;

  return {"diagnostics_examples", distance_ok && consistency_ok,
          "k_closest=" + fmt(distance.a_to_b) + " consistency=" +
              fmt(consistency.consistency)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config_path =
      argc > 1 ? argv[1] : "fixtures/experiment.json";

  std::vector<Verdict> verdicts;
  verdicts.push_back(gradient_fidelity());
  verdicts.push_back(attention_reduction());
  verdicts.push_back(attention_oracle());
  verdicts.push_back(kg_pruning_oracle());
  verdicts.push_back(stochastic_calibration());
  verdicts.push_back(pivot_round_trip());
  verdicts.push_back(f1_oracle());
  const TransferOutcome transfer = transfer_and_trend(config_path);
  verdicts.push_back(transfer.transfer);
  verdicts.push_back(transfer.kg_trend);
  verdicts.push_back(crowd_merge_oracle());
  verdicts.push_back(diagnostics_examples());

  int failed = 0;
  for (const Verdict& v : verdicts) {
    std::cout << (v.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(24)
              << v.name << "  " << v.detail << "\n";
    failed += v.pass ? 0 : 1;
  }
  std::cout << (verdicts.size() - failed) << "/" << verdicts.size()
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
