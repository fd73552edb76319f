#include "akg/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "akg/rng.hpp"

namespace akg {

const char* to_string(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::plain: return "plain";
    case AttentionMode::baseline_dea: return "baseline_dea";
    case AttentionMode::modified_dea: return "modified_dea";
  }
  return "?";
}

AttentionMode parse_attention_mode(const std::string& text) {
  if (text == "plain") return AttentionMode::plain;
  if (text == "baseline_dea") return AttentionMode::baseline_dea;
  if (text == "modified_dea") return AttentionMode::modified_dea;
  throw std::invalid_argument("unknown attention mode: " + text);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& sentences,
                   int min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  Vocab v;
  v.id_to_token = {"[PAD]", "[UNK]", kPivotB, kPivotI};
  std::set<std::string> seen(v.id_to_token.begin(), v.id_to_token.end());
  std::map<std::string, int> counts;
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence) {
      if (!seen.count(token)) ++counts[token];
    }
  }
  for (const auto& [token, count] : counts) {
    if (count >= min_count) v.id_to_token.push_back(token);
  }
  for (std::size_t i = 0; i < v.id_to_token.size(); ++i) {
    v.token_to_id[v.id_to_token[i]] = static_cast<int>(i);
  }
  return v;
}

int Vocab::id(const std::string& token) const {
  const auto it = token_to_id.find(token);
  return it == token_to_id.end() ? kUnkId : it->second;
}

void ModelConfig::validate() const {
  if (d < 1 || heads < 1 || layers < 0 || k_rel < 1 || num_labels < 2 ||
      max_len < 2) {
    throw std::invalid_argument("model config out of range");
  }
}

int relative_bucket(int i, int j, int k_rel) {
  const int offset = i - j;
  if (offset <= -k_rel) return 0;
  if (offset >= k_rel) return 2 * k_rel - 1;
  return offset + k_rel;
}

Eigen::MatrixXi delta_matrix(int n, int k_rel) {
  Eigen::MatrixXi delta(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) delta(i, j) = relative_bucket(i, j, k_rel);
  }
  return delta;
}

namespace {

using RowArray = Eigen::Array<double, 1, Eigen::Dynamic>;

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = scores.row(i).maxCoeff();
    const RowArray e = (scores.row(i).array() - m).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}

// terms counts the attention constituents and fixes the temperature sqrt(terms*d).
AttentionResult attention_core(const AttentionInputs& in, int terms) {
  const Eigen::Index n = in.qc.rows();
  const Eigen::Index d = in.qc.cols();
  if (in.kc.rows() != n || in.vc.rows() != n || in.kc.cols() != d ||
      in.vc.cols() != d) {
    throw std::invalid_argument("attention: content projection shape mismatch");
  }
  AttentionResult r;
  r.scores = in.qc * in.kc.transpose();
  if (terms >= 3) {
    if (in.delta.rows() != n || in.delta.cols() != n) {
      throw std::invalid_argument("attention: delta shape mismatch");
    }
    if (in.pq.cols() != d || in.pk.cols() != d) {
      throw std::invalid_argument("attention: position projection shape mismatch");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const int fwd = in.delta(i, j), rev = in.delta(j, i);
        if (fwd < 0 || fwd >= in.pk.rows() || rev < 0 || rev >= in.pq.rows()) {
          throw std::invalid_argument("attention: delta bucket out of range");
        }
        r.scores(i, j) += in.qc.row(i).dot(in.pk.row(fwd)) +
                          in.kc.row(j).dot(in.pq.row(rev));
      }
    }
  }
  if (terms >= 5) {
    if (in.qm.rows() != n || in.km.rows() != n || in.qm.cols() != d ||
        in.km.cols() != d) {
      throw std::invalid_argument("attention: indicator projection shape mismatch");
    }
    r.scores += in.qc * in.km.transpose() + in.qm * in.kc.transpose();
  }
  r.weights = row_softmax(r.scores / std::sqrt(static_cast<double>(terms * d)));
  r.output = r.weights * in.vc;
  return r;
}

}  // namespace

AttentionResult plain_attention(const AttentionInputs& in) {
  return attention_core(in, 1);
}

AttentionResult disentangled_attention(const AttentionInputs& in) {
  return attention_core(in, 3);
}

AttentionResult modified_attention(const AttentionInputs& in) {
  return attention_core(in, 5);
}

namespace {

int attention_terms(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::plain: return 1;
    case AttentionMode::baseline_dea: return 3;
    case AttentionMode::modified_dea: return 5;
  }
  return 1;
}

bool uses_positions(AttentionMode mode) { return mode != AttentionMode::plain; }
bool uses_indicators(AttentionMode mode) {
  return mode == AttentionMode::modified_dea;
}

}  // namespace

EncoderParams EncoderParams::allocate(const ModelConfig& cfg, Vocab vocab) {
  cfg.validate();
  EncoderParams p;
  p.cfg = cfg;
  p.vocab = std::move(vocab);
  const int w = cfg.width();
  p.token_embedding =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.vocab.size()), w);
  if (uses_positions(cfg.mode)) {
    p.position_embedding = Eigen::MatrixXd::Zero(2 * cfg.k_rel, w);
  }
  if (uses_indicators(cfg.mode)) {
    p.m_plus = Eigen::MatrixXd::Zero(1, w);
    p.m_minus = Eigen::MatrixXd::Zero(1, w);
  }
  for (int l = 0; l < cfg.layers; ++l) {
    LayerParams lp;
    lp.wq = Eigen::MatrixXd::Zero(w, w);
    lp.wk = Eigen::MatrixXd::Zero(w, w);
    lp.wv = Eigen::MatrixXd::Zero(w, w);
    if (uses_positions(cfg.mode)) {
      lp.wqp = Eigen::MatrixXd::Zero(w, w);
      lp.wkp = Eigen::MatrixXd::Zero(w, w);
    }
    if (uses_indicators(cfg.mode)) {
      lp.wqm = Eigen::MatrixXd::Zero(w, w);
      lp.wkm = Eigen::MatrixXd::Zero(w, w);
    }
    lp.ff1 = Eigen::MatrixXd::Zero(w, 4 * w);
    lp.ff1_b = Eigen::MatrixXd::Zero(1, 4 * w);
    lp.ff2 = Eigen::MatrixXd::Zero(4 * w, w);
    lp.ff2_b = Eigen::MatrixXd::Zero(1, w);
    lp.ln1_g = Eigen::MatrixXd::Ones(1, w);
    lp.ln1_b = Eigen::MatrixXd::Zero(1, w);
    lp.ln2_g = Eigen::MatrixXd::Ones(1, w);
    lp.ln2_b = Eigen::MatrixXd::Zero(1, w);
    p.layers.push_back(std::move(lp));
  }
  p.head_w = Eigen::MatrixXd::Zero(w, cfg.num_labels);
  p.head_b = Eigen::MatrixXd::Zero(1, cfg.num_labels);
  return p;
}

EncoderParams EncoderParams::init(const ModelConfig& cfg, Vocab vocab,
                                  uint64_t seed) {
  EncoderParams p = allocate(cfg, std::move(vocab));
  Rng rng(seed);
  for (auto& [name, tensor] : p.tensors()) {
    if (name.find("ln") != std::string::npos || name.ends_with("_b")) {
      continue;  // layer norms and biases keep their allocation values
    }
    // Projections read fan-in off their input rows; embedding-like tensors are
    // row collections, so their width is the relevant scale.
    const bool embedding_like =
        name.find("embedding") != std::string::npos || name.starts_with("m_");
    const double fan_in =
        static_cast<double>(embedding_like ? tensor->cols() : tensor->rows());
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
        (*tensor)(r, c) = rng.uniform(-bound, bound);
      }
    }
  }
  if (uses_indicators(cfg.mode) && (p.m_plus - p.m_minus).norm() == 0.0) {
    throw std::logic_error("indicator embeddings initialized equal");
  }
  return p;
}

EncoderParams EncoderParams::zeros_like(const EncoderParams& other) {
  EncoderParams p = allocate(other.cfg, other.vocab);
  for (auto& [name, tensor] : p.tensors()) {
    (void)name;
    tensor->setZero();  // allocate() leaves layer-norm gains at one
  }
  return p;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> EncoderParams::tensors() {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
  out.emplace_back("token_embedding", &token_embedding);
  if (uses_positions(cfg.mode)) {
    out.emplace_back("position_embedding", &position_embedding);
  }
  if (uses_indicators(cfg.mode)) {
    out.emplace_back("m_plus", &m_plus);
    out.emplace_back("m_minus", &m_minus);
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    LayerParams& lp = layers[l];
    out.emplace_back(prefix + "wq", &lp.wq);
    out.emplace_back(prefix + "wk", &lp.wk);
    out.emplace_back(prefix + "wv", &lp.wv);
    if (uses_positions(cfg.mode)) {
      out.emplace_back(prefix + "wqp", &lp.wqp);
      out.emplace_back(prefix + "wkp", &lp.wkp);
    }
    if (uses_indicators(cfg.mode)) {
      out.emplace_back(prefix + "wqm", &lp.wqm);
      out.emplace_back(prefix + "wkm", &lp.wkm);
    }
    out.emplace_back(prefix + "ff1", &lp.ff1);
    out.emplace_back(prefix + "ff1_b", &lp.ff1_b);
    out.emplace_back(prefix + "ff2", &lp.ff2);
    out.emplace_back(prefix + "ff2_b", &lp.ff2_b);
    out.emplace_back(prefix + "ln1_g", &lp.ln1_g);
    out.emplace_back(prefix + "ln1_b", &lp.ln1_b);
    out.emplace_back(prefix + "ln2_g", &lp.ln2_g);
    out.emplace_back(prefix + "ln2_b", &lp.ln2_b);
  }
  out.emplace_back("head_w", &head_w);
  out.emplace_back("head_b", &head_b);
  return out;
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> EncoderParams::tensors()
    const {
  auto mutable_list = const_cast<EncoderParams*>(this)->tensors();
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
  out.reserve(mutable_list.size());
  for (auto& [name, tensor] : mutable_list) out.emplace_back(name, tensor);
  return out;
}

bool decays(const std::string& tensor_name) {
  static const std::set<std::string> suffixes = {"wq",  "wk",  "wv",  "wqp", "wkp",
                                                 "wqm", "wkm", "ff1", "ff2"};
  if (tensor_name == "head_w") return true;
  const std::size_t dot = tensor_name.rfind('.');
  if (dot == std::string::npos) return false;
  return suffixes.count(tensor_name.substr(dot + 1)) > 0;
}

ModelInput input_from_plain(const TaggedSentence& sentence) {
  ModelInput in;
  in.tokens = sentence.tokens;
  in.original_len = sentence.tokens.size();
  in.flags.assign(in.tokens.size(), false);
  in.origin.resize(in.tokens.size());
  for (std::size_t i = 0; i < in.tokens.size(); ++i) {
    in.origin[i] = static_cast<int>(i);
  }
  in.labels.assign(in.tokens.size(), -1);
  if (sentence.labels) {
    for (std::size_t i = 0; i < in.tokens.size(); ++i) {
      in.labels[i] = static_cast<int>((*sentence.labels)[i]);
    }
  }
  return in;
}

ModelInput input_from_enriched(const EnrichedSequence& seq, bool score_pivots) {
  seq.validate();
  ModelInput in;
  in.tokens = seq.tokens;
  in.original_len = seq.original_size();
  in.flags.assign(in.tokens.size(), false);
  in.origin.resize(in.tokens.size());
  in.labels.assign(in.tokens.size(), -1);
  for (std::size_t i = 0; i < in.tokens.size(); ++i) {
    const bool pivot = !seq.origin[i].has_value();
    in.origin[i] = pivot ? -1 : static_cast<int>(*seq.origin[i]);
    if (seq.labels && (!pivot || score_pivots)) {
      in.labels[i] = static_cast<int>((*seq.labels)[i]);
    }
  }
  return in;
}

ModelInput input_from_marked(
    const TaggedSentence& sentence,
    const std::vector<std::optional<PivotKind>>& pivot_after) {
  if (pivot_after.size() != sentence.tokens.size()) {
    throw std::invalid_argument("indicator flags do not match sentence length");
  }
  ModelInput in = input_from_plain(sentence);
  for (std::size_t i = 0; i < pivot_after.size(); ++i) {
    in.flags[i] = pivot_after[i].has_value();
  }
  return in;
}

Batch make_batch(const std::vector<ModelInput>& inputs, const Vocab& vocab,
                 const ModelConfig& cfg) {
  Batch b;
  for (const ModelInput& in : inputs) {
    const std::size_t n =
        std::min(in.tokens.size(), static_cast<std::size_t>(cfg.max_len));
    std::vector<int> ids(n), labels(n);
    std::vector<bool> flags(n);
    for (std::size_t i = 0; i < n; ++i) {
      ids[i] = vocab.id(in.tokens[i]);
      labels[i] = in.labels[i];
      flags[i] = in.flags[i];
    }
    b.token_ids.push_back(std::move(ids));
    b.labels.push_back(std::move(labels));
    b.flags.push_back(std::move(flags));
  }
  return b;
}

namespace {

constexpr double kLnEps = 1e-5;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
  const double phi = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  const double pdf =
      std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
  return phi + x * pdf;
}

// Row-wise layer norm; keeps the pre-norm input for the backward pass.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gain,
                           const Eigen::MatrixXd& bias) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    out.row(i) = (((x.row(i).array() - mean) / std::sqrt(var + kLnEps)) *
                      gain.row(0).array() +
                  bias.row(0).array())
                     .matrix();
  }
  return out;
}

void layer_norm_backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gain,
                         const Eigen::MatrixXd& dy, Eigen::MatrixXd& dx,
                         Eigen::MatrixXd& dgain, Eigen::MatrixXd& dbias) {
  const auto w = static_cast<double>(x.cols());
  dx.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    const RowArray xhat = (x.row(i).array() - mean) * inv;
    const RowArray dyg = dy.row(i).array() * gain.row(0).array();
    dgain.row(0).array() += dy.row(i).array() * xhat;
    dbias.row(0) += dy.row(i);
    const double mean_dyg = dyg.sum() / w;
    const double mean_dyg_xhat = (dyg * xhat).sum() / w;
    dx.row(i) = ((dyg - mean_dyg - xhat * mean_dyg_xhat) * inv).matrix();
  }
}

struct LayerCache {
  Eigen::MatrixXd x_in;          // layer input
  Eigen::MatrixXd qc, kc, vc;    // full-width projections
  Eigen::MatrixXd m, qm, km;     // indicator rows and projections
  std::vector<Eigen::MatrixXd> head_weights;  // softmax per head
  Eigen::MatrixXd pre_ln1;       // x_in + attention output
  Eigen::MatrixXd x1;            // ln1 result
  Eigen::MatrixXd z1;            // x1 * ff1 + b1
  Eigen::MatrixXd pre_ln2;       // x1 + feed-forward output
};

struct SequenceCache {
  Eigen::MatrixXd x0;            // embedding rows
  std::vector<LayerCache> layers;
  Eigen::MatrixXd x_final;
};

// Per-layer position projections are shared by every sequence in the batch.
struct PositionCache {
  std::vector<Eigen::MatrixXd> pq, pk;  // per layer, 2k x width
};

SequenceCache forward_sequence(const std::vector<int>& ids,
                               const std::vector<bool>& flags,
                               const EncoderParams& params,
                               const PositionCache& pos) {
  const ModelConfig& cfg = params.cfg;
  const int n = static_cast<int>(ids.size());
  const int w = cfg.width();
  const int terms = attention_terms(cfg.mode);
  const Eigen::MatrixXi delta = delta_matrix(n, cfg.k_rel);

  SequenceCache cache;
  cache.x0.resize(n, w);
  for (int i = 0; i < n; ++i) {
    if (ids[i] < 0 || ids[i] >= static_cast<int>(params.vocab.size())) {
      throw std::invalid_argument("token id out of vocabulary range");
    }
    cache.x0.row(i) = params.token_embedding.row(ids[i]);
  }

  Eigen::MatrixXd x = cache.x0;
  for (int l = 0; l < cfg.layers; ++l) {
    const LayerParams& lp = params.layers[static_cast<std::size_t>(l)];
    LayerCache lc;
    lc.x_in = x;
    lc.qc = x * lp.wq;
    lc.kc = x * lp.wk;
    lc.vc = x * lp.wv;
    if (uses_indicators(cfg.mode)) {
      lc.m.resize(n, w);
      for (int i = 0; i < n; ++i) {
        lc.m.row(i) = flags[static_cast<std::size_t>(i)] ? params.m_plus.row(0)
                                                         : params.m_minus.row(0);
      }
      lc.qm = lc.m * lp.wqm;
      lc.km = lc.m * lp.wkm;
    }
    Eigen::MatrixXd attn_out(n, w);
    for (int h = 0; h < cfg.heads; ++h) {
      const int off = h * cfg.d;
      AttentionInputs in;
      in.qc = lc.qc.middleCols(off, cfg.d);
      in.kc = lc.kc.middleCols(off, cfg.d);
      in.vc = lc.vc.middleCols(off, cfg.d);
      in.delta = delta;
      if (uses_positions(cfg.mode)) {
        in.pq = pos.pq[static_cast<std::size_t>(l)].middleCols(off, cfg.d);
        in.pk = pos.pk[static_cast<std::size_t>(l)].middleCols(off, cfg.d);
      }
      if (uses_indicators(cfg.mode)) {
        in.qm = lc.qm.middleCols(off, cfg.d);
        in.km = lc.km.middleCols(off, cfg.d);
      }
      AttentionResult r = attention_core(in, terms);
      attn_out.middleCols(off, cfg.d) = r.output;
      lc.head_weights.push_back(std::move(r.weights));
    }
    lc.pre_ln1 = x + attn_out;
    lc.x1 = layer_norm(lc.pre_ln1, lp.ln1_g, lp.ln1_b);
    lc.z1 = (lc.x1 * lp.ff1).rowwise() + lp.ff1_b.row(0);
    const Eigen::MatrixXd g = lc.z1.unaryExpr([](double v) { return gelu(v); });
    lc.pre_ln2 = lc.x1 + ((g * lp.ff2).rowwise() + lp.ff2_b.row(0));
    x = layer_norm(lc.pre_ln2, lp.ln2_g, lp.ln2_b);
    cache.layers.push_back(std::move(lc));
  }
  cache.x_final = x;
  return cache;
}

PositionCache project_positions(const EncoderParams& params) {
  PositionCache pos;
  if (!uses_positions(params.cfg.mode)) return pos;
  for (const LayerParams& lp : params.layers) {
    pos.pq.push_back(params.position_embedding * lp.wqp);
    pos.pk.push_back(params.position_embedding * lp.wkp);
  }
  return pos;
}

void check_batch(const Batch& batch, const EncoderParams& params) {
  if (batch.token_ids.size() != batch.labels.size() ||
      batch.token_ids.size() != batch.flags.size()) {
    throw std::invalid_argument("batch rows disagree");
  }
  for (std::size_t b = 0; b < batch.token_ids.size(); ++b) {
    const std::size_t n = batch.token_ids[b].size();
    if (n == 0) throw std::invalid_argument("batch contains an empty row");
    if (n > static_cast<std::size_t>(params.cfg.max_len)) {
      throw std::invalid_argument("sequence exceeds max_len; truncate first");
    }
    if (batch.labels[b].size() != n || batch.flags[b].size() != n) {
      throw std::invalid_argument("batch row arrays disagree");
    }
  }
}

}  // namespace

double forward_loss(const Batch& batch, const EncoderParams& params,
                    std::vector<Eigen::MatrixXd>* logits_out) {
  check_batch(batch, params);
  const PositionCache pos = project_positions(params);
  if (logits_out) logits_out->clear();
  double total = 0.0;
  std::size_t scoring = 0;
  for (std::size_t b = 0; b < batch.token_ids.size(); ++b) {
    const SequenceCache cache =
        forward_sequence(batch.token_ids[b], batch.flags[b], params, pos);
    const Eigen::MatrixXd logits =
        (cache.x_final * params.head_w).rowwise() + params.head_b.row(0);
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const int label = batch.labels[b][static_cast<std::size_t>(i)];
      if (label < 0) continue;
      const double m = logits.row(i).maxCoeff();
      const double lse =
          m + std::log((logits.row(i).array() - m).exp().sum());
      total += lse - logits(i, label);
      ++scoring;
    }
    if (logits_out) logits_out->push_back(logits);
  }
  if (scoring == 0) {
    if (logits_out) return 0.0;
    throw std::invalid_argument("no scoring positions in batch");
  }
  return total / static_cast<double>(scoring);
}

EncoderParams loss_grad(const Batch& batch, const EncoderParams& params,
                        double* loss_out) {
  check_batch(batch, params);
  const ModelConfig& cfg = params.cfg;
  const int w = cfg.width();
  const int terms = attention_terms(cfg.mode);
  const double temperature = 1.0 / std::sqrt(static_cast<double>(terms * cfg.d));
  const PositionCache pos = project_positions(params);

  std::size_t scoring = 0;
  for (const auto& row : batch.labels) {
    for (const int label : row) scoring += label >= 0 ? 1 : 0;
  }
  if (scoring == 0) throw std::invalid_argument("no scoring positions in batch");
  const double inv_count = 1.0 / static_cast<double>(scoring);

  EncoderParams grads = EncoderParams::zeros_like(params);
  // dPq/dPk accumulate across sequences; folded into wqp/wkp/position at the end.
  std::vector<Eigen::MatrixXd> dpq(params.layers.size()),
      dpk(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    if (uses_positions(cfg.mode)) {
      dpq[l] = Eigen::MatrixXd::Zero(2 * cfg.k_rel, w);
      dpk[l] = Eigen::MatrixXd::Zero(2 * cfg.k_rel, w);
    }
  }

  double total = 0.0;
  for (std::size_t b = 0; b < batch.token_ids.size(); ++b) {
    const std::vector<int>& ids = batch.token_ids[b];
    const std::vector<bool>& flags = batch.flags[b];
    const int n = static_cast<int>(ids.size());
    const SequenceCache cache = forward_sequence(ids, flags, params, pos);
    const Eigen::MatrixXi delta = delta_matrix(n, cfg.k_rel);

    const Eigen::MatrixXd logits =
        (cache.x_final * params.head_w).rowwise() + params.head_b.row(0);
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(n, cfg.num_labels);
    for (int i = 0; i < n; ++i) {
      const int label = batch.labels[b][static_cast<std::size_t>(i)];
      if (label < 0) continue;
      const double m = logits.row(i).maxCoeff();
      const RowArray e = (logits.row(i).array() - m).exp();
      const RowArray p = e / e.sum();
      total += -std::log(p(label));
      dlogits.row(i) = (p * inv_count).matrix();
      dlogits(i, label) -= inv_count;
    }

    grads.head_w += cache.x_final.transpose() * dlogits;
    grads.head_b.row(0) += dlogits.colwise().sum();
    Eigen::MatrixXd dx = dlogits * params.head_w.transpose();

    for (int l = cfg.layers - 1; l >= 0; --l) {
      const auto li = static_cast<std::size_t>(l);
      const LayerParams& lp = params.layers[li];
      LayerParams& gl = grads.layers[li];
      const LayerCache& lc = cache.layers[li];

      // x = ln2(pre_ln2)
      Eigen::MatrixXd d_pre_ln2;
      layer_norm_backward(lc.pre_ln2, lp.ln2_g, dx, d_pre_ln2, gl.ln2_g,
                          gl.ln2_b);
      // pre_ln2 = x1 + gelu(z1) * ff2 + b2
      Eigen::MatrixXd dx1 = d_pre_ln2;
      const Eigen::MatrixXd g =
          lc.z1.unaryExpr([](double v) { return gelu(v); });
      gl.ff2 += g.transpose() * d_pre_ln2;
      gl.ff2_b.row(0) += d_pre_ln2.colwise().sum();
      Eigen::MatrixXd dz1 =
          (d_pre_ln2 * lp.ff2.transpose()).array() *
          lc.z1.unaryExpr([](double v) { return gelu_grad(v); }).array();
      gl.ff1 += lc.x1.transpose() * dz1;
      gl.ff1_b.row(0) += dz1.colwise().sum();
      dx1 += dz1 * lp.ff1.transpose();
      // x1 = ln1(pre_ln1)
      Eigen::MatrixXd d_pre_ln1;
      layer_norm_backward(lc.pre_ln1, lp.ln1_g, dx1, d_pre_ln1, gl.ln1_g,
                          gl.ln1_b);
      // pre_ln1 = x_in + attention(x_in)
      Eigen::MatrixXd dx_in = d_pre_ln1;
      Eigen::MatrixXd dqc = Eigen::MatrixXd::Zero(n, w);
      Eigen::MatrixXd dkc = Eigen::MatrixXd::Zero(n, w);
      Eigen::MatrixXd dvc = Eigen::MatrixXd::Zero(n, w);
      Eigen::MatrixXd dqm, dkm;
      if (uses_indicators(cfg.mode)) {
        dqm = Eigen::MatrixXd::Zero(n, w);
        dkm = Eigen::MatrixXd::Zero(n, w);
      }
      for (int h = 0; h < cfg.heads; ++h) {
        const int off = h * cfg.d;
        const Eigen::MatrixXd& s = lc.head_weights[static_cast<std::size_t>(h)];
        const Eigen::MatrixXd dh = d_pre_ln1.middleCols(off, cfg.d);
        const Eigen::MatrixXd qc = lc.qc.middleCols(off, cfg.d);
        const Eigen::MatrixXd kc = lc.kc.middleCols(off, cfg.d);
        const Eigen::MatrixXd vc = lc.vc.middleCols(off, cfg.d);

        const Eigen::MatrixXd ds = dh * vc.transpose();
        dvc.middleCols(off, cfg.d) += s.transpose() * dh;
        // softmax backward at temperature
        Eigen::MatrixXd dscores(n, n);
        for (int i = 0; i < n; ++i) {
          const double dot = ds.row(i).dot(s.row(i));
          dscores.row(i) =
              (s.row(i).array() * (ds.row(i).array() - dot)).matrix() *
              temperature;
        }
        // c2c
        dqc.middleCols(off, cfg.d) += dscores * kc;
        dkc.middleCols(off, cfg.d) += dscores.transpose() * qc;
        if (uses_positions(cfg.mode)) {
          const Eigen::MatrixXd pqh = pos.pq[li].middleCols(off, cfg.d);
          const Eigen::MatrixXd pkh = pos.pk[li].middleCols(off, cfg.d);
          auto dqch = dqc.middleCols(off, cfg.d);
          auto dkch = dkc.middleCols(off, cfg.d);
          auto dpqh = dpq[li].middleCols(off, cfg.d);
          auto dpkh = dpk[li].middleCols(off, cfg.d);
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              const double gij = dscores(i, j);
              if (gij == 0.0) continue;
              const int fwd = delta(i, j), rev = delta(j, i);
              dqch.row(i) += gij * pkh.row(fwd);
              dpkh.row(fwd) += gij * qc.row(i);
              dkch.row(j) += gij * pqh.row(rev);
              dpqh.row(rev) += gij * kc.row(j);
            }
          }
        }
        if (uses_indicators(cfg.mode)) {
          const Eigen::MatrixXd qmh = lc.qm.middleCols(off, cfg.d);
          const Eigen::MatrixXd kmh = lc.km.middleCols(off, cfg.d);
          dqc.middleCols(off, cfg.d) += dscores * kmh;
          dkm.middleCols(off, cfg.d) += dscores.transpose() * qc;
          dqm.middleCols(off, cfg.d) += dscores * kc;
          dkc.middleCols(off, cfg.d) += dscores.transpose() * qmh;
        }
      }
      gl.wq += lc.x_in.transpose() * dqc;
      gl.wk += lc.x_in.transpose() * dkc;
      gl.wv += lc.x_in.transpose() * dvc;
      dx_in += dqc * lp.wq.transpose() + dkc * lp.wk.transpose() +
               dvc * lp.wv.transpose();
      if (uses_indicators(cfg.mode)) {
        gl.wqm += lc.m.transpose() * dqm;
        gl.wkm += lc.m.transpose() * dkm;
        const Eigen::MatrixXd dm =
            dqm * lp.wqm.transpose() + dkm * lp.wkm.transpose();
        for (int i = 0; i < n; ++i) {
          if (flags[static_cast<std::size_t>(i)]) {
            grads.m_plus.row(0) += dm.row(i);
          } else {
            grads.m_minus.row(0) += dm.row(i);
          }
        }
      }
      dx = dx_in;
    }
    for (int i = 0; i < n; ++i) {
      grads.token_embedding.row(ids[static_cast<std::size_t>(i)]) += dx.row(i);
    }
  }

  if (uses_positions(cfg.mode)) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      grads.layers[l].wqp += params.position_embedding.transpose() * dpq[l];
      grads.layers[l].wkp += params.position_embedding.transpose() * dpk[l];
      grads.position_embedding += dpq[l] * params.layers[l].wqp.transpose() +
                                  dpk[l] * params.layers[l].wkp.transpose();
    }
  }
  if (loss_out) *loss_out = total * inv_count;
  return grads;
}

GradientCheckReport gradient_check(const EncoderParams& params,
                                   const Batch& batch) {
  const EncoderParams analytic = loss_grad(batch, params);
  EncoderParams probe = params;
  auto probe_tensors = probe.tensors();
  const auto analytic_tensors = analytic.tensors();

  GradientCheckReport report;
  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    const std::string& name = probe_tensors[t].first;
    Eigen::MatrixXd& tensor = *probe_tensors[t].second;
    const Eigen::MatrixXd& grad = *analytic_tensors[t].second;
    double tensor_worst = 0.0;
    for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
        const double saved = tensor(r, c);
        const double step = 1e-5 * std::max(1.0, std::abs(saved));
        tensor(r, c) = saved + step;
        const double up = forward_loss(batch, probe);
        tensor(r, c) = saved - step;
        const double down = forward_loss(batch, probe);
        tensor(r, c) = saved;
        const double fd = (up - down) / (2.0 * step);
        const double an = grad(r, c);
        const double rel =
            std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
        tensor_worst = std::max(tensor_worst, rel);
      }
    }
    report.per_tensor.emplace_back(name, tensor_worst);
    if (tensor_worst > report.max_rel_error) {
      report.max_rel_error = tensor_worst;
      report.worst_tensor = name;
    }
  }
  return report;
}

std::vector<std::vector<BioLabel>> predict(const std::vector<ModelInput>& inputs,
                                           const EncoderParams& params) {
  std::vector<std::vector<BioLabel>> out;
  constexpr std::size_t kChunk = 64;
  for (std::size_t begin = 0; begin < inputs.size(); begin += kChunk) {
    const std::size_t end = std::min(inputs.size(), begin + kChunk);
    const std::vector<ModelInput> slice(inputs.begin() + begin,
                                        inputs.begin() + end);
    const Batch batch = make_batch(slice, params.vocab, params.cfg);
    std::vector<Eigen::MatrixXd> logits;
    forward_loss(batch, params, &logits);
    for (std::size_t s = 0; s < slice.size(); ++s) {
      std::vector<BioLabel> labels(slice[s].original_len, BioLabel::N);
      for (Eigen::Index i = 0; i < logits[s].rows(); ++i) {
        const int origin = slice[s].origin[static_cast<std::size_t>(i)];
        if (origin < 0) continue;
        Eigen::Index best = 0;
        logits[s].row(i).maxCoeff(&best);
        labels[static_cast<std::size_t>(origin)] =
            static_cast<BioLabel>(static_cast<int>(best));
      }
      out.push_back(std::move(labels));
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> hidden_states(const std::vector<ModelInput>& inputs,
                                           const EncoderParams& params) {
  const PositionCache pos = project_positions(params);
  std::vector<Eigen::MatrixXd> out;
  for (const ModelInput& in : inputs) {
    const Batch batch = make_batch({in}, params.vocab, params.cfg);
    check_batch(batch, params);
    const SequenceCache cache =
        forward_sequence(batch.token_ids[0], batch.flags[0], params, pos);
    Eigen::MatrixXd aligned =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(in.original_len),
                              params.cfg.width());
    for (Eigen::Index i = 0; i < cache.x_final.rows(); ++i) {
      const int origin = in.origin[static_cast<std::size_t>(i)];
      if (origin >= 0) aligned.row(origin) = cache.x_final.row(i);
    }
    out.push_back(std::move(aligned));
  }
  return out;
}

}  // namespace akg
