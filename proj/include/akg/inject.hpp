#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "akg/annotate.hpp"
#include "akg/corpus.hpp"
#include "akg/kg.hpp"

namespace akg {

inline constexpr const char* kPivotB = "[DOMAIN-B]";
inline constexpr const char* kPivotI = "[DOMAIN-I]";

enum class PivotKind { b, i };

char to_char(PivotKind kind);
const char* pivot_token(PivotKind kind);

// A sentence with pivot markers materialized in the token stream.  Original
// tokens carry their index in `origin`; pivot positions carry a kind instead.
// Positions without an origin are non-scoring everywhere downstream.
struct EnrichedSequence {
  std::vector<std::string> tokens;
  std::vector<std::optional<std::size_t>> origin;
  std::vector<std::optional<PivotKind>> pivot_kinds;
  std::optional<std::vector<BioLabel>> labels;  // pivots labeled N

  std::size_t original_size() const;
  // Throws std::invalid_argument when the structure is malformed: origin must
  // replay 0..n-1 in order, exactly one of origin/pivot_kind per position,
  // every pivot directly follows an original token, pivot surface forms match
  // their kind, labels (when present) align and mark pivots N.
  void validate() const;
};

struct PivotPolicy {
  double precision_target = 1.0;  // p, in (0, 1]
  double recall_target = 1.0;     // r, in [0, 1]
  uint64_t rng_seed = 0;
};

// Places a B-pivot after the first token of each planned span and an I-pivot
// after each subsequent one.  Labels, when the sentence has them, are carried
// over with pivots labeled N.
EnrichedSequence insert_pivots(const TaggedSentence& sentence,
                               const InjectionPlan& plan);

struct StrippedSequence {
  std::vector<std::string> tokens;
  // For each original token, the kind of the pivot right after it, if any.
  std::vector<std::optional<PivotKind>> pivot_after;
};

StrippedSequence strip_pivots(const EnrichedSequence& seq);

// Rebuilds the materialized view from per-token follower flags; the exact
// inverse of strip_pivots for sequences built by this module.
EnrichedSequence enrich_from_flags(
    const TaggedSentence& sentence,
    const std::vector<std::optional<PivotKind>>& pivot_after);

struct StochasticInsertion {
  std::vector<EnrichedSequence> sequences;
  std::size_t gold_spans = 0;
  std::size_t true_insertions = 0;
  std::size_t false_insertions = 0;  // actually placed, capped by N supply
  double achieved_precision = 0.0;
  double achieved_recall = 0.0;
};

// Pivots round(r*A) of the A gold aspect spans chosen uniformly at random,
// then drops round(T*(1-p)/p) single B-pivots after uniformly chosen
// N-labeled tokens.  Runs out of N tokens: places as many as possible and the
// achieved precision reflects it.
StochasticInsertion stochastic_train_insertion(const Corpus& corpus,
                                               const PivotPolicy& policy);

// The inference pipeline applied to training data: plan_injections per
// sentence, then insert_pivots.
std::vector<EnrichedSequence> deterministic_train_insertion(
    const Corpus& corpus, const DomainKG& kg, const CandidateConfig& cfg = {});

struct PivotPr {
  double precision = 0.0;
  double recall = 0.0;
  bool no_pivots = false;         // precision was 0/0
  bool no_aspect_tokens = false;  // recall was 0/0
};

// Token-level counts: a pivoted token is a true positive when its gold label
// is BA or IA; recall is over all BA/IA tokens.
PivotPr pivot_token_pr(const std::vector<EnrichedSequence>& sequences);

// Deterministic insertion followed by pivot_token_pr on the result.
PivotPr measure_pivot_pr(const Corpus& corpus, const DomainKG& kg,
                         const CandidateConfig& cfg = {});

// On-disk form: the corpus TSV with one extra PIVOT column in {-, B, I}
// marking the pivot that follows each original token.
struct EnrichedCorpus {
  std::string domain_id;
  std::vector<TaggedSentence> sentences;
  std::vector<std::vector<std::optional<PivotKind>>> pivot_after;

  std::vector<EnrichedSequence> to_sequences() const;
  static EnrichedCorpus from_sequences(const Corpus& base,
                                       const std::vector<EnrichedSequence>& seqs);
};

std::string serialize_enriched(const EnrichedCorpus& corpus);
EnrichedCorpus parse_enriched(const std::string& text,
                              const std::string& file_label,
                              std::string domain_id);
void save_enriched(const EnrichedCorpus& corpus, const std::string& path);
EnrichedCorpus load_enriched(const std::string& path, std::string domain_id = "");

}  // namespace akg
