#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "akg/io_util.hpp"
#include "akg/model.hpp"
#include "akg/rng.hpp"
#include "json.hpp"

namespace akg {
namespace {

// Exact-boundary span F1 over aspect runs; duplicated spans cannot arise
// because spans from one sentence are distinct by construction.
double validation_span_f1(const std::vector<std::vector<BioLabel>>& pred,
                          const std::vector<std::vector<BioLabel>>& gold) {
  std::size_t tp = 0, pred_total = 0, gold_total = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto p = aspect_spans(pred[s]);
    const auto g = aspect_spans(gold[s]);
    pred_total += p.size();
    gold_total += g.size();
    const std::set<std::pair<std::size_t, std::size_t>> gold_set = [&] {
      std::set<std::pair<std::size_t, std::size_t>> out;
      for (const TokenSpan& span : g) out.emplace(span.start, span.end);
      return out;
    }();
    for (const TokenSpan& span : p) tp += gold_set.count({span.start, span.end});
  }
  if (pred_total == 0 || gold_total == 0 || tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(pred_total);
  const double recall = static_cast<double>(tp) / static_cast<double>(gold_total);
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<BioLabel> gold_of(const ModelInput& input) {
  std::vector<BioLabel> gold(input.original_len, BioLabel::N);
  for (std::size_t i = 0; i < input.tokens.size(); ++i) {
    if (input.origin[i] < 0) continue;
    if (input.labels[i] < 0) {
      throw std::invalid_argument("validation input lacks gold labels");
    }
    gold[static_cast<std::size_t>(input.origin[i])] =
        static_cast<BioLabel>(input.labels[i]);
  }
  return gold;
}

struct AdamW {
  EncoderParams m, v;
  long step = 0;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  explicit AdamW(const EncoderParams& params)
      : m(EncoderParams::zeros_like(params)),
        v(EncoderParams::zeros_like(params)) {}

  void update(EncoderParams& params, const EncoderParams& grads, double lr,
              double weight_decay) {
    ++step;
    const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    auto p_list = params.tensors();
    const auto g_list = grads.tensors();
    auto m_list = m.tensors();
    auto v_list = v.tensors();
    for (std::size_t t = 0; t < p_list.size(); ++t) {
      Eigen::MatrixXd& theta = *p_list[t].second;
      const Eigen::MatrixXd& g = *g_list[t].second;
      Eigen::MatrixXd& mt = *m_list[t].second;
      Eigen::MatrixXd& vt = *v_list[t].second;
      mt = kBeta1 * mt + (1.0 - kBeta1) * g;
      vt = (kBeta2 * vt.array() + (1.0 - kBeta2) * g.array().square()).matrix();
      const Eigen::ArrayXXd m_hat = mt.array() / bias1;
      const Eigen::ArrayXXd v_hat = vt.array() / bias2;
      Eigen::ArrayXXd update = m_hat / (v_hat.sqrt() + kEps);
      if (decays(p_list[t].first)) update += weight_decay * theta.array();
      theta.array() -= lr * update;
    }
  }
};

}  // namespace

TrainResult train(const std::vector<ModelInput>& train_inputs,
                  const std::vector<ModelInput>& val_inputs,
                  const EncoderParams& initial, const TrainConfig& tc) {
  if (train_inputs.empty()) {
    throw std::invalid_argument("training set is empty");
  }
  if (tc.batch_size < 1 || tc.max_epochs < 1 || tc.patience < 1) {
    throw std::invalid_argument("train config out of range");
  }

  std::vector<std::vector<BioLabel>> val_gold;
  val_gold.reserve(val_inputs.size());
  for (const ModelInput& input : val_inputs) val_gold.push_back(gold_of(input));

  TrainResult result;
  result.params = initial;
  EncoderParams best = initial;
  AdamW optimizer(initial);
  int epochs_without_gain = 0;

  std::vector<std::size_t> order(train_inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < tc.max_epochs; ++epoch) {
    Rng shuffle_rng =
        Rng::substream(tc.seed, 0x45504F43ULL + static_cast<uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(tc.batch_size));
      std::vector<ModelInput> slice;
      slice.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        slice.push_back(train_inputs[order[i]]);
      }
      const Batch batch =
          make_batch(slice, result.params.vocab, result.params.cfg);
      double loss = 0.0;
      const EncoderParams grads = loss_grad(batch, result.params, &loss);
      optimizer.update(result.params, grads, tc.lr, tc.weight_decay);
      epoch_loss += loss;
      ++batches;
    }
    result.epoch_train_loss.push_back(epoch_loss /
                                      static_cast<double>(batches));
    result.epochs_run = epoch + 1;

    if (val_inputs.empty()) {
      best = result.params;
      result.best_epoch = epoch;
      continue;
    }
    const double f1 =
        validation_span_f1(predict(val_inputs, result.params), val_gold);
    result.epoch_val_f1.push_back(f1);
    if (result.best_epoch < 0 || f1 > result.best_val_f1) {
      result.best_val_f1 = f1;
      result.best_epoch = epoch;
      best = result.params;
      epochs_without_gain = 0;
    } else if (++epochs_without_gain >= tc.patience) {
      break;
    }
  }
  result.params = std::move(best);
  return result;
}

namespace {

constexpr const char* kCheckpointMagic = "akg-checkpoint 1";

}  // namespace

void save_checkpoint(const EncoderParams& params, const std::string& path) {
  nlohmann::ordered_json header;
  header["config"] = {{"d", params.cfg.d},
                      {"heads", params.cfg.heads},
                      {"layers", params.cfg.layers},
                      {"k_rel", params.cfg.k_rel},
                      {"num_labels", params.cfg.num_labels},
                      {"max_len", params.cfg.max_len},
                      {"mode", to_string(params.cfg.mode)}};
  header["vocab"] = params.vocab.id_to_token;

  std::ostringstream out;
  out << kCheckpointMagic << '\n' << header.dump() << '\n';
  out << std::setprecision(17);
  for (const auto& [name, tensor] : params.tensors()) {
    out << "tensor " << name << ' ' << tensor->rows() << ' ' << tensor->cols()
        << '\n';
    for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
        if (c > 0) out << ' ';
        out << (*tensor)(r, c);
      }
      out << '\n';
    }
  }
  out << "end\n";
  write_file(path, out.str());
}

EncoderParams load_checkpoint(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  const auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) {
      throw ParseError(path, line_no, "unexpected end of checkpoint");
    }
    ++line_no;
    return line;
  };

  if (next_line() != kCheckpointMagic) {
    throw ParseError(path, line_no, "not a checkpoint file");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(next_line());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, line_no, std::string("bad header: ") + e.what());
  }

  ModelConfig cfg;
  Vocab vocab;
  try {
    const auto& c = header.at("config");
    cfg.d = c.at("d").get<int>();
    cfg.heads = c.at("heads").get<int>();
    cfg.layers = c.at("layers").get<int>();
    cfg.k_rel = c.at("k_rel").get<int>();
    cfg.num_labels = c.at("num_labels").get<int>();
    cfg.max_len = c.at("max_len").get<int>();
    cfg.mode = parse_attention_mode(c.at("mode").get<std::string>());
    vocab.id_to_token = header.at("vocab").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, line_no, std::string("bad header: ") + e.what());
  }
  for (std::size_t i = 0; i < vocab.id_to_token.size(); ++i) {
    vocab.token_to_id[vocab.id_to_token[i]] = static_cast<int>(i);
  }

  EncoderParams params = EncoderParams::allocate(cfg, std::move(vocab));
  for (auto& [name, tensor] : params.tensors()) {
    std::istringstream spec_line(next_line());
    std::string keyword, got_name;
    Eigen::Index rows = 0, cols = 0;
    if (!(spec_line >> keyword >> got_name >> rows >> cols) ||
        keyword != "tensor") {
      throw ParseError(path, line_no, "expected a tensor header");
    }
    if (got_name != name || rows != tensor->rows() || cols != tensor->cols()) {
      throw ParseError(path, line_no,
                       "tensor " + got_name + " does not match expected " +
                           name + " shape");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::istringstream row_line(next_line());
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(row_line >> (*tensor)(r, c))) {
          throw ParseError(path, line_no, "short tensor row");
        }
      }
      double extra = 0.0;
      if (row_line >> extra) {
        throw ParseError(path, line_no, "excess values in tensor row");
      }
    }
  }
  if (next_line() != "end") {
    throw ParseError(path, line_no, "missing end marker");
  }
  return params;
}

}  // namespace akg
