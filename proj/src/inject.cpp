#include "akg/inject.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "akg/io_util.hpp"
#include "akg/rng.hpp"

namespace akg {

char to_char(PivotKind kind) { return kind == PivotKind::b ? 'B' : 'I'; }

const char* pivot_token(PivotKind kind) {
  return kind == PivotKind::b ? kPivotB : kPivotI;
}

std::size_t EnrichedSequence::original_size() const {
  std::size_t n = 0;
  for (const auto& o : origin) n += o.has_value() ? 1 : 0;
  return n;
}

void EnrichedSequence::validate() const {
  const std::size_t len = tokens.size();
  if (origin.size() != len || pivot_kinds.size() != len) {
    throw std::invalid_argument("enriched sequence: parallel arrays disagree");
  }
  if (labels && labels->size() != len) {
    throw std::invalid_argument("enriched sequence: label array disagrees");
  }
  std::size_t next_origin = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const bool is_original = origin[i].has_value();
    if (is_original == pivot_kinds[i].has_value()) {
      throw std::invalid_argument(
          "enriched sequence: position must be exactly one of original/pivot");
    }
    if (is_original) {
      if (*origin[i] != next_origin) {
        throw std::invalid_argument("enriched sequence: origin out of order");
      }
      ++next_origin;
    } else {
      if (i == 0 || !origin[i - 1].has_value()) {
        throw std::invalid_argument(
            "enriched sequence: pivot not directly after an original token");
      }
      if (tokens[i] != pivot_token(*pivot_kinds[i])) {
        throw std::invalid_argument(
            "enriched sequence: pivot surface form mismatch");
      }
      if (labels && (*labels)[i] != BioLabel::N) {
        throw std::invalid_argument("enriched sequence: pivot not labeled N");
      }
    }
  }
}

EnrichedSequence enrich_from_flags(
    const TaggedSentence& sentence,
    const std::vector<std::optional<PivotKind>>& pivot_after) {
  if (pivot_after.size() != sentence.tokens.size()) {
    throw std::invalid_argument("pivot flags do not match sentence length");
  }
  EnrichedSequence out;
  if (sentence.labels) out.labels.emplace();
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    out.tokens.push_back(sentence.tokens[i]);
    out.origin.push_back(i);
    out.pivot_kinds.push_back(std::nullopt);
    if (out.labels) out.labels->push_back((*sentence.labels)[i]);
    if (pivot_after[i]) {
      out.tokens.push_back(pivot_token(*pivot_after[i]));
      out.origin.push_back(std::nullopt);
      out.pivot_kinds.push_back(*pivot_after[i]);
      if (out.labels) out.labels->push_back(BioLabel::N);
    }
  }
  return out;
}

EnrichedSequence insert_pivots(const TaggedSentence& sentence,
                               const InjectionPlan& plan) {
  std::vector<std::optional<PivotKind>> flags(sentence.tokens.size());
  std::size_t previous_end = 0;
  for (std::size_t m = 0; m < plan.matches.size(); ++m) {
    const TokenSpan span = plan.matches[m].span;
    if (span.start >= span.end || span.end > sentence.tokens.size()) {
      throw std::invalid_argument("injection span out of sentence range");
    }
    if (m > 0 && span.start < previous_end) {
      throw std::invalid_argument("injection spans overlap or are unsorted");
    }
    previous_end = span.end;
    flags[span.start] = PivotKind::b;
    for (std::size_t t = span.start + 1; t < span.end; ++t) flags[t] = PivotKind::i;
  }
  return enrich_from_flags(sentence, flags);
}

StrippedSequence strip_pivots(const EnrichedSequence& seq) {
  seq.validate();
  StrippedSequence out;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (!seq.origin[i]) continue;
    out.tokens.push_back(seq.tokens[i]);
    const bool followed = i + 1 < seq.tokens.size() && seq.pivot_kinds[i + 1];
    out.pivot_after.push_back(followed ? seq.pivot_kinds[i + 1] : std::nullopt);
  }
  return out;
}

StochasticInsertion stochastic_train_insertion(const Corpus& corpus,
                                               const PivotPolicy& policy) {
  if (!(policy.precision_target > 0.0) || policy.precision_target > 1.0) {
    throw std::invalid_argument("precision target must be in (0, 1]");
  }
  if (policy.recall_target < 0.0 || policy.recall_target > 1.0) {
    throw std::invalid_argument("recall target must be in [0, 1]");
  }

  struct SpanRef {
    std::size_t sentence;
    TokenSpan span;
  };
  std::vector<SpanRef> spans;
  std::vector<std::pair<std::size_t, std::size_t>> n_tokens;
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const TaggedSentence& sent = corpus.sentences[s];
    if (!sent.labels) {
      throw std::invalid_argument("stochastic insertion needs gold labels");
    }
    for (const TokenSpan& span : aspect_spans(*sent.labels)) {
      spans.push_back({s, span});
    }
    for (std::size_t t = 0; t < sent.labels->size(); ++t) {
      if ((*sent.labels)[t] == BioLabel::N) n_tokens.emplace_back(s, t);
    }
  }

  StochasticInsertion result;
  result.gold_spans = spans.size();
  const auto t_count = static_cast<std::size_t>(
      std::llround(policy.recall_target * static_cast<double>(spans.size())));
  const std::size_t f_target =
      t_count == 0 ? 0
                   : static_cast<std::size_t>(std::llround(
                         static_cast<double>(t_count) *
                         (1.0 - policy.precision_target) / policy.precision_target));
  const std::size_t f_count = std::min(f_target, n_tokens.size());
  result.true_insertions = t_count;
  result.false_insertions = f_count;

  std::vector<std::vector<std::optional<PivotKind>>> flags(corpus.sentences.size());
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    flags[s].resize(corpus.sentences[s].tokens.size());
  }
  Rng span_rng = Rng::substream(policy.rng_seed, 1);
  for (const std::size_t idx : span_rng.sample(spans.size(), t_count)) {
    const SpanRef& ref = spans[idx];
    flags[ref.sentence][ref.span.start] = PivotKind::b;
    for (std::size_t t = ref.span.start + 1; t < ref.span.end; ++t) {
      flags[ref.sentence][t] = PivotKind::i;
    }
  }
  Rng false_rng = Rng::substream(policy.rng_seed, 2);
  for (const std::size_t idx : false_rng.sample(n_tokens.size(), f_count)) {
    const auto& [s, t] = n_tokens[idx];
    flags[s][t] = PivotKind::b;
  }

  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    result.sequences.push_back(enrich_from_flags(corpus.sentences[s], flags[s]));
  }
  const std::size_t placed = t_count + f_count;
  result.achieved_precision =
      placed == 0 ? 0.0 : static_cast<double>(t_count) / static_cast<double>(placed);
  result.achieved_recall =
      spans.empty() ? 0.0
                    : static_cast<double>(t_count) / static_cast<double>(spans.size());
  return result;
}

std::vector<EnrichedSequence> deterministic_train_insertion(
    const Corpus& corpus, const DomainKG& kg, const CandidateConfig& cfg) {
  std::vector<EnrichedSequence> out;
  out.reserve(corpus.sentences.size());
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    out.push_back(insert_pivots(corpus.sentences[s],
                                plan_injections(corpus.sentences[s], kg, s, cfg)));
  }
  return out;
}

PivotPr pivot_token_pr(const std::vector<EnrichedSequence>& sequences) {
  std::size_t pivoted = 0, pivoted_true = 0, aspect_tokens = 0;
  for (const EnrichedSequence& seq : sequences) {
    if (!seq.labels) {
      throw std::invalid_argument("pivot counting needs gold labels");
    }
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      if (!seq.origin[i]) continue;
      const bool gold_aspect = is_aspect((*seq.labels)[i]);
      if (gold_aspect) ++aspect_tokens;
      if (i + 1 < seq.tokens.size() && seq.pivot_kinds[i + 1]) {
        ++pivoted;
        if (gold_aspect) ++pivoted_true;
      }
    }
  }
  PivotPr pr;
  pr.no_pivots = pivoted == 0;
  pr.no_aspect_tokens = aspect_tokens == 0;
  pr.precision = pr.no_pivots
                     ? 0.0
                     : static_cast<double>(pivoted_true) / static_cast<double>(pivoted);
  pr.recall = pr.no_aspect_tokens ? 0.0
                                  : static_cast<double>(pivoted_true) /
                                        static_cast<double>(aspect_tokens);
  return pr;
}

PivotPr measure_pivot_pr(const Corpus& corpus, const DomainKG& kg,
                         const CandidateConfig& cfg) {
  return pivot_token_pr(deterministic_train_insertion(corpus, kg, cfg));
}

std::vector<EnrichedSequence> EnrichedCorpus::to_sequences() const {
  std::vector<EnrichedSequence> out;
  out.reserve(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    out.push_back(enrich_from_flags(sentences[s], pivot_after[s]));
  }
  return out;
}

EnrichedCorpus EnrichedCorpus::from_sequences(
    const Corpus& base, const std::vector<EnrichedSequence>& seqs) {
  if (base.sentences.size() != seqs.size()) {
    throw std::invalid_argument("enriched sequences do not match corpus size");
  }
  EnrichedCorpus out;
  out.domain_id = base.domain_id;
  out.sentences = base.sentences;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    StrippedSequence stripped = strip_pivots(seqs[s]);
    if (stripped.tokens != base.sentences[s].tokens) {
      throw std::invalid_argument("enriched sequence tokens diverge from corpus");
    }
    out.pivot_after.push_back(std::move(stripped.pivot_after));
  }
  return out;
}

std::string serialize_enriched(const EnrichedCorpus& corpus) {
  std::ostringstream out;
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    if (s > 0) out << '\n';
    const TaggedSentence& sent = corpus.sentences[s];
    const auto& flags = corpus.pivot_after[s];
    for (std::size_t t = 0; t < sent.tokens.size(); ++t) {
      out << sent.tokens[t] << '\t' << sent.pos[t] << '\t' << sent.dep_head[t]
          << '\t' << sent.dep_label[t] << '\t'
          << (sent.labels ? to_string((*sent.labels)[t]) : "-") << '\t'
          << (flags[t] ? std::string(1, to_char(*flags[t])) : "-") << '\n';
    }
  }
  return out.str();
}

EnrichedCorpus parse_enriched(const std::string& text,
                              const std::string& file_label,
                              std::string domain_id) {
  // Peel the PIVOT column off each row and delegate the first five columns to
  // the corpus parser so both formats share one validator.
  std::istringstream in(text);
  std::ostringstream base_text;
  std::vector<std::vector<std::optional<PivotKind>>> flag_blocks;
  std::vector<std::optional<PivotKind>> current;
  bool in_block = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in_block) {
        flag_blocks.push_back(std::move(current));
        current.clear();
        in_block = false;
      }
      base_text << '\n';
      continue;
    }
    const std::size_t cut = line.rfind('\t');
    if (cut == std::string::npos) {
      throw ParseError(file_label, line_no, "expected 6 tab-separated columns");
    }
    const std::string pivot = line.substr(cut + 1);
    if (pivot == "-") {
      current.push_back(std::nullopt);
    } else if (pivot == "B") {
      current.push_back(PivotKind::b);
    } else if (pivot == "I") {
      current.push_back(PivotKind::i);
    } else {
      throw ParseError(file_label, line_no, "PIVOT column must be -, B, or I");
    }
    in_block = true;
    base_text << line.substr(0, cut) << '\n';
  }
  if (in_block) flag_blocks.push_back(std::move(current));

  std::istringstream base_in(base_text.str());
  const Corpus base = parse_corpus(base_in, file_label, domain_id);
  EnrichedCorpus out;
  out.domain_id = base.domain_id;
  out.sentences = base.sentences;
  out.pivot_after = std::move(flag_blocks);
  if (out.pivot_after.size() != out.sentences.size()) {
    throw ParseError(file_label, line_no, "pivot blocks do not match sentences");
  }
  return out;
}

void save_enriched(const EnrichedCorpus& corpus, const std::string& path) {
  write_file(path, serialize_enriched(corpus));
}

EnrichedCorpus load_enriched(const std::string& path, std::string domain_id) {
  if (domain_id.empty()) domain_id = path_stem(path);
  return parse_enriched(read_file(path), path, std::move(domain_id));
}

}  // namespace akg
