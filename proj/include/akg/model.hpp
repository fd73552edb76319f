#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "akg/corpus.hpp"
#include "akg/inject.hpp"

namespace akg {

// plain keeps only the content term; baseline_dea adds the two relative
// position terms; modified_dea further adds the indicator terms.
enum class AttentionMode { plain, baseline_dea, modified_dea };

const char* to_string(AttentionMode mode);
AttentionMode parse_attention_mode(const std::string& text);

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kPivotBId = 2;
inline constexpr int kPivotIId = 3;

// Word-level vocabulary.  Ids 0..3 are reserved for [PAD], [UNK] and the two
// pivot tokens; the remaining tokens are sorted so construction order never
// leaks into ids.
struct Vocab {
  std::vector<std::string> id_to_token;
  std::unordered_map<std::string, int> token_to_id;

  // Types seen fewer than min_count times fall back to [UNK], which trains
  // the unknown-token embedding on the rare-word regime.
  static Vocab build(const std::vector<std::vector<std::string>>& sentences,
                     int min_count = 1);
  int id(const std::string& token) const;
  std::size_t size() const { return id_to_token.size(); }
};

struct ModelConfig {
  int d = 16;  // per-head size; attention temperatures scale with it
  int heads = 2;
  int layers = 2;
  int k_rel = 8;
  int num_labels = 5;
  int max_len = 64;
  AttentionMode mode = AttentionMode::baseline_dea;

  int width() const { return d * heads; }
  void validate() const;
};

// Returns 0 when i-j <= -k_rel, 2*k_rel-1 when i-j >= k_rel, else i-j+k_rel.
int relative_bucket(int i, int j, int k_rel);
// N x N matrix of relative_bucket values.
Eigen::MatrixXi delta_matrix(int n, int k_rel);

// One attention head over raw projection matrices; shared by the encoder and
// by oracle tests.  qc/kc/vc are N x d, pq/pk are 2k x d, qm/km are N x d and
// read only in modified mode.
struct AttentionInputs {
  Eigen::MatrixXd qc, kc, vc;
  Eigen::MatrixXd pq, pk;
  Eigen::MatrixXd qm, km;
  Eigen::MatrixXi delta;
};

struct AttentionResult {
  Eigen::MatrixXd scores;   // pre-softmax A (or A-hat)
  Eigen::MatrixXd weights;  // row softmax of scores / sqrt(terms * d)
  Eigen::MatrixXd output;   // weights * vc
};

// scores = c2c + c2p + p2c, temperature sqrt(3d).
AttentionResult disentangled_attention(const AttentionInputs& in);
// scores additionally gains c2m + m2c, temperature sqrt(5d).
AttentionResult modified_attention(const AttentionInputs& in);
// c2c only, temperature sqrt(d); the no-position-information control arm.
AttentionResult plain_attention(const AttentionInputs& in);

struct LayerParams {
  Eigen::MatrixXd wq, wk, wv;  // width x width
  Eigen::MatrixXd wqp, wkp;    // width x width, position projections
  Eigen::MatrixXd wqm, wkm;    // width x width, indicator projections
  Eigen::MatrixXd ff1, ff1_b;  // width x 4*width, 1 x 4*width
  Eigen::MatrixXd ff2, ff2_b;  // 4*width x width, 1 x width
  Eigen::MatrixXd ln1_g, ln1_b, ln2_g, ln2_b;  // 1 x width
};

struct EncoderParams {
  ModelConfig cfg;
  Vocab vocab;
  Eigen::MatrixXd token_embedding;     // vocab x width
  Eigen::MatrixXd position_embedding;  // 2*k_rel x width, shared across layers
  Eigen::MatrixXd m_plus, m_minus;     // 1 x width, modified mode only
  std::vector<LayerParams> layers;
  Eigen::MatrixXd head_w;  // width x num_labels
  Eigen::MatrixXd head_b;  // 1 x num_labels

  // Correctly-shaped zero tensors for the mode's parameter set.
  static EncoderParams allocate(const ModelConfig& cfg, Vocab vocab);
  // Scaled-uniform initialization (+-1/sqrt(fan_in)) drawn from a single
  // seeded stream in tensor order.
  static EncoderParams init(const ModelConfig& cfg, Vocab vocab, uint64_t seed);
  static EncoderParams zeros_like(const EncoderParams& other);

  // Name/tensor pairs in a fixed declared order; the same order drives the
  // optimizer, the gradient checker, and the checkpoint format.  Tensors a
  // mode does not use are absent rather than zero-sized.
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensors();
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensors() const;
};

// Weight decay applies to projection and feed-forward matrices only, never to
// embeddings, indicator vectors, biases, or layer-norm parameters.
bool decays(const std::string& tensor_name);

// One model-ready sentence.  labels hold -1 at non-scoring positions (pads
// never exist; pivots are non-scoring unless explicitly included).  origin
// maps each position back to the original token index, -1 at pivots.
struct ModelInput {
  std::vector<std::string> tokens;
  std::vector<int> labels;
  std::vector<bool> flags;  // indicator-source per position
  std::vector<int> origin;
  std::size_t original_len = 0;
};

ModelInput input_from_plain(const TaggedSentence& sentence);
// Enriched token stream for pivot-token injection; score_pivots labels pivot
// positions N instead of masking them out of the loss.
ModelInput input_from_enriched(const EnrichedSequence& seq, bool score_pivots);
// Original token stream with indicator flags at tokens a pivot would follow;
// the modified-attention arm.
ModelInput input_from_marked(
    const TaggedSentence& sentence,
    const std::vector<std::optional<PivotKind>>& pivot_after);

// Rows stay ragged at their true lengths, truncated to cfg.max_len; attention
// therefore never sees padding and no mask is needed.
struct Batch {
  std::vector<std::vector<int>> token_ids;
  std::vector<std::vector<int>> labels;
  std::vector<std::vector<bool>> flags;
};

Batch make_batch(const std::vector<ModelInput>& inputs, const Vocab& vocab,
                 const ModelConfig& cfg);

// Mean token cross-entropy over scoring positions; logits_out, when given,
// receives one num_labels-wide matrix per row.  Throws when every position is
// non-scoring and no logits sink is provided to justify the pass.
double forward_loss(const Batch& batch, const EncoderParams& params,
                    std::vector<Eigen::MatrixXd>* logits_out = nullptr);

// Analytic gradients of forward_loss with respect to every parameter tensor;
// loss_out receives the loss value from the same pass.
EncoderParams loss_grad(const Batch& batch, const EncoderParams& params,
                        double* loss_out = nullptr);

struct GradientCheckReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::vector<std::pair<std::string, double>> per_tensor;
};

// Central finite differences, step 1e-5 scaled by entry magnitude, against
// the analytic gradients, every entry of every tensor.
GradientCheckReport gradient_check(const EncoderParams& params, const Batch& batch);

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 8;
  int max_epochs = 30;
  double weight_decay = 0.01;
  int patience = 3;  // epochs without validation F1 improvement
  uint64_t seed = 0;
  int vocab_min_count = 1;  // used where the vocabulary is built, not by train()
};

struct TrainResult {
  EncoderParams params;  // best-validation snapshot
  std::vector<double> epoch_train_loss;
  std::vector<double> epoch_val_f1;
  int best_epoch = -1;
  double best_val_f1 = 0.0;
  int epochs_run = 0;
};

// AdamW with early stopping on validation aspect span F1.  Deterministic for
// a fixed seed: epoch shuffles come from per-epoch substreams and every
// reduction is sequential.
TrainResult train(const std::vector<ModelInput>& train_inputs,
                  const std::vector<ModelInput>& val_inputs,
                  const EncoderParams& initial, const TrainConfig& tc);

// Argmax labels realigned to original token positions; positions lost to
// truncation come back as N.
std::vector<std::vector<BioLabel>> predict(const std::vector<ModelInput>& inputs,
                                           const EncoderParams& params);

// Final-layer hidden states realigned to original positions (truncated tail
// rows are zero).
std::vector<Eigen::MatrixXd> hidden_states(const std::vector<ModelInput>& inputs,
                                           const EncoderParams& params);

void save_checkpoint(const EncoderParams& params, const std::string& path);
EncoderParams load_checkpoint(const std::string& path);

}  // namespace akg
