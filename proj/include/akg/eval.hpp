#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "akg/corpus.hpp"
#include "akg/kg.hpp"
#include "akg/model.hpp"

namespace akg {

// Span-level exact-match scores plus token-level diagnostics.  A predicted
// aspect span counts only when its boundaries coincide with a gold span.
struct EvalReport {
  std::size_t true_positives = 0;
  std::size_t predicted_spans = 0;
  std::size_t gold_spans = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // harmonic mean, 0 when either side is 0

  std::size_t token_tp = 0;
  std::size_t token_fp = 0;
  std::size_t token_fn = 0;
  double token_precision = 0.0;
  double token_recall = 0.0;
};

// Scores aspect spans (maximal BA (IA)* runs).  Throws on a sentence-count
// or per-sentence length mismatch.
EvalReport exact_match_f1(const std::vector<std::vector<BioLabel>>& pred,
                          const std::vector<std::vector<BioLabel>>& gold);

// Labels exactly the tokens a pivot would follow: the first token of every
// planned injection span becomes BA, deeper tokens IA, everything else N.
// No model runs and no BO/IO ever appears.
std::vector<std::vector<BioLabel>> kg_only_tagger(const Corpus& corpus,
                                                  const DomainKG& kg);

struct ConsistencyReport {
  std::size_t cardinality = 0;  // unique lowercased tokens ever labeled aspect
  double consistency = 0.0;     // mean over that set of P(labeled aspect)
  bool no_aspects = false;
};

// Tokens pool case-insensitively; every sentence must carry gold labels.
ConsistencyReport aspect_consistency(const Corpus& corpus);

enum class DistanceMetric { euclidean, cosine };

struct KClosestReport {
  double a_to_b = 0.0;  // mean over A of the mean distance to K nearest in B
  double b_to_a = 0.0;
  bool clamped = false;  // K exceeded a set size and was reduced
};

// K nearest neighbours are found per vector in the opposite set; a warning
// sink, when given, records any clamping.
KClosestReport k_closest_distance(const std::vector<Eigen::VectorXd>& a,
                                  const std::vector<Eigen::VectorXd>& b,
                                  std::size_t k,
                                  DistanceMetric metric = DistanceMetric::euclidean,
                                  std::vector<std::string>* warnings = nullptr);

struct TokenTally {
  // (token, count), count descending then token ascending.
  std::vector<std::pair<std::string, std::size_t>> true_positives;
  std::vector<std::pair<std::string, std::size_t>> false_negatives;
};

// Token-level tally over gold aspect tokens: predicted aspect counts as TP,
// predicted non-aspect as FN.  Surface forms are kept verbatim.
TokenTally tp_fn_tally(const std::vector<std::vector<BioLabel>>& pred,
                       const std::vector<std::vector<BioLabel>>& gold,
                       const Corpus& corpus);

struct EmbeddingRow {
  std::string domain;
  std::string token;
  Eigen::VectorXd vec;
};

// One row per gold aspect token occurrence, in corpus order, carrying that
// token's final hidden state.  inputs must parallel corpus.sentences and may
// be enriched; tokens lost to truncation come back as zero vectors.
std::vector<EmbeddingRow> collect_aspect_embeddings(
    const Corpus& corpus, const std::vector<ModelInput>& inputs,
    const EncoderParams& params);

// Header `DIM W`, then DOMAIN\tTOKEN\tv1..vW rows with full precision.
std::string serialize_embedding_rows(const std::vector<EmbeddingRow>& rows,
                                     Eigen::Index dim);
std::vector<EmbeddingRow> parse_embedding_rows(const std::string& text,
                                               const std::string& file_label);
void save_embedding_rows(const std::vector<EmbeddingRow>& rows,
                         Eigen::Index dim, const std::string& path);
std::vector<EmbeddingRow> load_embedding_rows(const std::string& path);

struct DomainDiagnostics {
  std::size_t kg_size = 0;  // node count
  std::size_t aspect_cardinality = 0;
  double aspect_consistency = 0.0;
};

DomainDiagnostics domain_diagnostics(const Corpus& corpus, const DomainKG& kg);

}  // namespace akg
