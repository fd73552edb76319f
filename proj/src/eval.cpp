#include "akg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "akg/annotate.hpp"
#include "akg/inject.hpp"
#include "akg/io_util.hpp"

namespace akg {

namespace {

double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) {
  return (p > 0.0 && r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

EvalReport exact_match_f1(const std::vector<std::vector<BioLabel>>& pred,
                          const std::vector<std::vector<BioLabel>>& gold) {
  if (pred.size() != gold.size()) {
    throw std::invalid_argument("prediction/gold sentence counts differ");
  }
  EvalReport report;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].size() != gold[s].size()) {
      throw std::invalid_argument("prediction/gold lengths differ at sentence " +
                                  std::to_string(s));
    }
    const std::vector<TokenSpan> p_spans = aspect_spans(pred[s]);
    const std::vector<TokenSpan> g_spans = aspect_spans(gold[s]);
    report.predicted_spans += p_spans.size();
    report.gold_spans += g_spans.size();
    for (const TokenSpan& span : p_spans) {
      if (std::find(g_spans.begin(), g_spans.end(), span) != g_spans.end()) {
        ++report.true_positives;
      }
    }
    for (std::size_t i = 0; i < pred[s].size(); ++i) {
      const bool p = is_aspect(pred[s][i]);
      const bool g = is_aspect(gold[s][i]);
      report.token_tp += (p && g) ? 1 : 0;
      report.token_fp += (p && !g) ? 1 : 0;
      report.token_fn += (!p && g) ? 1 : 0;
    }
  }
  report.precision = safe_ratio(report.true_positives, report.predicted_spans);
  report.recall = safe_ratio(report.true_positives, report.gold_spans);
  report.f1 = harmonic(report.precision, report.recall);
  report.token_precision =
      safe_ratio(report.token_tp, report.token_tp + report.token_fp);
  report.token_recall =
      safe_ratio(report.token_tp, report.token_tp + report.token_fn);
  return report;
}

std::vector<std::vector<BioLabel>> kg_only_tagger(const Corpus& corpus,
                                                  const DomainKG& kg) {
  std::vector<std::vector<BioLabel>> out;
  out.reserve(corpus.sentences.size());
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const TaggedSentence& sentence = corpus.sentences[s];
    const EnrichedSequence seq =
        insert_pivots(sentence, plan_injections(sentence, kg, s));
    std::vector<BioLabel> labels(sentence.size(), BioLabel::N);
    for (std::size_t i = 0; i + 1 < seq.tokens.size(); ++i) {
      if (!seq.origin[i] || !seq.pivot_kinds[i + 1]) continue;
      labels[*seq.origin[i]] = *seq.pivot_kinds[i + 1] == PivotKind::b
                                   ? BioLabel::BA
                                   : BioLabel::IA;
    }
    out.push_back(std::move(labels));
  }
  return out;
}

ConsistencyReport aspect_consistency(const Corpus& corpus) {
  // Per lowercased token: total occurrences and aspect-labeled occurrences.
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const TaggedSentence& sentence : corpus.sentences) {
    if (!sentence.labels) {
      throw std::invalid_argument("aspect_consistency requires gold labels");
    }
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      auto& c = counts[to_lower_ascii(sentence.tokens[i])];
      ++c.first;
      c.second += is_aspect((*sentence.labels)[i]) ? 1 : 0;
    }
  }
  ConsistencyReport report;
  double sum = 0.0;
  for (const auto& [token, c] : counts) {
    if (c.second == 0) continue;
    ++report.cardinality;
    sum += static_cast<double>(c.second) / static_cast<double>(c.first);
  }
  if (report.cardinality == 0) {
    report.no_aspects = true;
    return report;
  }
  report.consistency = sum / static_cast<double>(report.cardinality);
  return report;
}

KClosestReport k_closest_distance(const std::vector<Eigen::VectorXd>& a,
                                  const std::vector<Eigen::VectorXd>& b,
                                  std::size_t k, DistanceMetric metric,
                                  std::vector<std::string>* warnings) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("both embedding sets must be non-empty");
  }
  const Eigen::Index dim = a.front().size();
  for (const auto* set : {&a, &b}) {
    for (const Eigen::VectorXd& v : *set) {
      if (v.size() != dim) {
        throw std::invalid_argument("embedding dimensions disagree");
      }
    }
  }

  KClosestReport report;
  const auto distance = [metric](const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) {
    if (metric == DistanceMetric::euclidean) return (x - y).norm();
    const double denom = x.norm() * y.norm();
    // Zero vectors have no direction; treat them as maximally distant.
    if (denom == 0.0) return 2.0;
    return 1.0 - x.dot(y) / denom;
  };
  const auto one_way = [&](const std::vector<Eigen::VectorXd>& from,
                           const std::vector<Eigen::VectorXd>& to,
                           const char* label) {
    std::size_t use_k = k;
    if (use_k > to.size()) {
      use_k = to.size();
      report.clamped = true;
      if (warnings) {
        warnings->push_back(std::string("k clamped to ") +
                            std::to_string(use_k) + " for " + label);
      }
    }
    double grand = 0.0;
    std::vector<double> dists(to.size());
    for (const Eigen::VectorXd& v : from) {
      for (std::size_t j = 0; j < to.size(); ++j) dists[j] = distance(v, to[j]);
      std::nth_element(dists.begin(), dists.begin() + (use_k - 1), dists.end());
      double sum = 0.0;
      for (std::size_t j = 0; j < use_k; ++j) sum += dists[j];
      grand += sum / static_cast<double>(use_k);
    }
    return grand / static_cast<double>(from.size());
  };
  report.a_to_b = one_way(a, b, "A->B");
  report.b_to_a = one_way(b, a, "B->A");
  return report;
}

TokenTally tp_fn_tally(const std::vector<std::vector<BioLabel>>& pred,
                       const std::vector<std::vector<BioLabel>>& gold,
                       const Corpus& corpus) {
  if (pred.size() != gold.size() || gold.size() != corpus.sentences.size()) {
    throw std::invalid_argument("tally inputs must align sentence-wise");
  }
  std::map<std::string, std::size_t> tp, fn;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const TaggedSentence& sentence = corpus.sentences[s];
    if (pred[s].size() != sentence.size() || gold[s].size() != sentence.size()) {
      throw std::invalid_argument("tally lengths differ at sentence " +
                                  std::to_string(s));
    }
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (!is_aspect(gold[s][i])) continue;
      (is_aspect(pred[s][i]) ? tp : fn)[sentence.tokens[i]] += 1;
    }
  }
  const auto ranked = [](const std::map<std::string, std::size_t>& counts) {
    std::vector<std::pair<std::string, std::size_t>> rows(counts.begin(),
                                                          counts.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
      return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    return rows;
  };
  TokenTally tally;
  tally.true_positives = ranked(tp);
  tally.false_negatives = ranked(fn);
  return tally;
}

std::vector<EmbeddingRow> collect_aspect_embeddings(
    const Corpus& corpus, const std::vector<ModelInput>& inputs,
    const EncoderParams& params) {
  if (inputs.size() != corpus.sentences.size()) {
    throw std::invalid_argument("inputs must parallel corpus sentences");
  }
  const std::vector<Eigen::MatrixXd> states = hidden_states(inputs, params);
  std::vector<EmbeddingRow> rows;
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const TaggedSentence& sentence = corpus.sentences[s];
    if (!sentence.labels) {
      throw std::invalid_argument("embedding export requires gold labels");
    }
    if (states[s].rows() != static_cast<Eigen::Index>(sentence.size())) {
      throw std::invalid_argument("input/sentence alignment broken at sentence " +
                                  std::to_string(s));
    }
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (!is_aspect((*sentence.labels)[i])) continue;
      rows.push_back({corpus.domain_id, sentence.tokens[i],
                      states[s].row(static_cast<Eigen::Index>(i)).transpose()});
    }
  }
  return rows;
}

std::string serialize_embedding_rows(const std::vector<EmbeddingRow>& rows,
                                     Eigen::Index dim) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "DIM " << dim << "\n";
  for (const EmbeddingRow& row : rows) {
    if (row.vec.size() != dim) {
      throw std::invalid_argument("embedding row width differs from header");
    }
    out << row.domain << "\t" << row.token;
    for (Eigen::Index i = 0; i < dim; ++i) out << "\t" << row.vec(i);
    out << "\n";
  }
  return out.str();
}

std::vector<EmbeddingRow> parse_embedding_rows(const std::string& text,
                                               const std::string& file_label) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    throw ParseError(file_label, 1, "missing DIM header");
  }
  ++line_no;
  std::istringstream header(line);
  std::string word;
  long long dim = 0;
  if (!(header >> word >> dim) || word != "DIM" || dim < 1 ||
      (header >> word)) {
    throw ParseError(file_label, line_no, "malformed DIM header");
  }

  std::vector<EmbeddingRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != static_cast<std::size_t>(dim) + 2) {
      throw ParseError(file_label, line_no, "expected DOMAIN, TOKEN and " +
                                                std::to_string(dim) + " values");
    }
    EmbeddingRow row;
    row.domain = fields[0];
    row.token = fields[1];
    row.vec.resize(dim);
    for (long long i = 0; i < dim; ++i) {
      try {
        std::size_t used = 0;
        const std::string& field = fields[static_cast<std::size_t>(i) + 2];
        row.vec(i) = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError(file_label, line_no, "bad number: " +
                                                  fields[static_cast<std::size_t>(i) + 2]);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_embedding_rows(const std::vector<EmbeddingRow>& rows,
                         Eigen::Index dim, const std::string& path) {
  write_file(path, serialize_embedding_rows(rows, dim));
}

std::vector<EmbeddingRow> load_embedding_rows(const std::string& path) {
  return parse_embedding_rows(read_file(path), path);
}

DomainDiagnostics domain_diagnostics(const Corpus& corpus, const DomainKG& kg) {
  const ConsistencyReport consistency = aspect_consistency(corpus);
  DomainDiagnostics diag;
  diag.kg_size = kg.nodes.size();
  diag.aspect_cardinality = consistency.cardinality;
  diag.aspect_consistency = consistency.consistency;
  return diag;
}

}  // namespace akg
