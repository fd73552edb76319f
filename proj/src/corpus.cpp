#include "akg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "akg/io_util.hpp"
#include "akg/rng.hpp"

namespace akg {
namespace {

// IA needs an open aspect run, IO an open opinion run.
void check_transition(const std::string& file, std::size_t line,
                      const std::optional<BioLabel>& prev, BioLabel cur) {
  const bool aspect_open =
      prev.has_value() && (prev == BioLabel::BA || prev == BioLabel::IA);
  const bool opinion_open =
      prev.has_value() && (prev == BioLabel::BO || prev == BioLabel::IO);
  if (cur == BioLabel::IA && !aspect_open) {
    throw ParseError(file, line, "IA without preceding BA/IA");
  }
  if (cur == BioLabel::IO && !opinion_open) {
    throw ParseError(file, line, "IO without preceding BO/IO");
  }
}

struct PendingSentence {
  TaggedSentence sentence;
  std::vector<BioLabel> labels;
  std::size_t first_line = 0;
  bool saw_label = false;
  bool saw_dash = false;

  bool empty() const { return sentence.tokens.empty(); }
};

void flush(PendingSentence& pending, Corpus& corpus, const std::string& file) {
  if (pending.empty()) return;
  if (pending.saw_label && pending.saw_dash) {
    throw ParseError(file, pending.first_line,
                     "sentence mixes labeled and unlabeled tokens");
  }
  const int n = static_cast<int>(pending.sentence.size());
  for (std::size_t i = 0; i < pending.sentence.size(); ++i) {
    const int head = pending.sentence.dep_head[i];
    if (head < 0 || head >= n) {
      throw ParseError(file, pending.first_line + i,
                       "head index " + std::to_string(head) + " out of range");
    }
  }
  if (pending.saw_label) pending.sentence.labels = std::move(pending.labels);
  corpus.sentences.push_back(std::move(pending.sentence));
  pending = PendingSentence{};
}

}  // namespace

const char* to_string(BioLabel label) {
  switch (label) {
    case BioLabel::BA: return "BA";
    case BioLabel::IA: return "IA";
    case BioLabel::BO: return "BO";
    case BioLabel::IO: return "IO";
    case BioLabel::N: return "N";
  }
  return "?";
}

BioLabel parse_bio_label(const std::string& text) {
  if (text == "BA") return BioLabel::BA;
  if (text == "IA") return BioLabel::IA;
  if (text == "BO") return BioLabel::BO;
  if (text == "IO") return BioLabel::IO;
  if (text == "N") return BioLabel::N;
  throw std::invalid_argument("unknown BIO label '" + text + "'");
}

ParseError::ParseError(const std::string& file, std::size_t line,
                       const std::string& message)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
      line_(line) {}

Corpus parse_corpus(std::istream& in, const std::string& file_label,
                    const std::string& domain_id) {
  Corpus corpus;
  corpus.domain_id = domain_id;
  PendingSentence pending;
  std::string line;
  std::size_t line_no = 0;
  std::optional<BioLabel> prev_label;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush(pending, corpus, file_label);
      prev_label.reset();
      continue;
    }
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 5) {
      throw ParseError(file_label, line_no,
                       "expected 5 tab-separated columns, got " +
                           std::to_string(cols.size()));
    }
    if (cols[0].empty()) throw ParseError(file_label, line_no, "empty token");
    if (pending.empty()) pending.first_line = line_no;
    pending.sentence.tokens.push_back(cols[0]);
    pending.sentence.pos.push_back(cols[1]);
    try {
      std::size_t used = 0;
      const int head = std::stoi(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument(cols[2]);
      pending.sentence.dep_head.push_back(head);
    } catch (const std::exception&) {
      throw ParseError(file_label, line_no, "bad head index '" + cols[2] + "'");
    }
    pending.sentence.dep_label.push_back(cols[3]);
    if (cols[4] == "-") {
      pending.saw_dash = true;
      prev_label.reset();
    } else {
      BioLabel label;
      try {
        label = parse_bio_label(cols[4]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(file_label, line_no, e.what());
      }
      check_transition(file_label, line_no, prev_label, label);
      pending.labels.push_back(label);
      pending.saw_label = true;
      prev_label = label;
    }
  }
  flush(pending, corpus, file_label);
  if (corpus.sentences.empty()) {
    throw ParseError(file_label, line_no ? line_no : 1, "no sentences found");
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, const std::string& domain_id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path);
  return parse_corpus(in, path, domain_id.empty() ? path_stem(path) : domain_id);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  bool first = true;
  for (const TaggedSentence& s : corpus.sentences) {
    if (!first) out << "\n";
    first = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.tokens[i] << '\t' << s.pos[i] << '\t' << s.dep_head[i] << '\t'
          << s.dep_label[i] << '\t'
          << (s.labels ? to_string((*s.labels)[i]) : "-") << "\n";
    }
  }
  return out.str();
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  write_file(path, serialize_corpus(corpus));
}

PartitionSet make_partitions(const Corpus& corpus, uint64_t seed) {
  const std::size_t n = corpus.sentences.size();
  if (n < 5) {
    throw std::invalid_argument("corpus too small to split 3:1:1 (" +
                                std::to_string(n) + " sentences)");
  }
  // Largest-remainder allocation of n over the 3:1:1 ratio keeps every part
  // within one sentence of its exact share.
  const double exact_train = 3.0 * n / 5.0;
  const double exact_val = n / 5.0;
  std::array<std::size_t, 3> counts = {
      static_cast<std::size_t>(exact_train), static_cast<std::size_t>(exact_val),
      static_cast<std::size_t>(exact_val)};
  std::array<double, 3> remainders = {exact_train - counts[0],
                                      exact_val - counts[1],
                                      exact_val - counts[2]};
  std::size_t assigned = counts[0] + counts[1] + counts[2];
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i) {
      if (remainders[i] > remainders[best]) best = i;
    }
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }

  PartitionSet set;
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng = Rng::substream(seed, p);
    rng.shuffle(order);
    Split& split = set.partitions[p];
    split.train.assign(order.begin(), order.begin() + counts[0]);
    split.validation.assign(order.begin() + counts[0],
                            order.begin() + counts[0] + counts[1]);
    split.test.assign(order.begin() + counts[0] + counts[1], order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
  }
  return set;
}

Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& indices) {
  Corpus out;
  out.domain_id = corpus.domain_id;
  out.sentences.reserve(indices.size());
  for (std::size_t i : indices) out.sentences.push_back(corpus.sentences.at(i));
  return out;
}

std::vector<WorkerSelection> load_worker_selections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open selection file " + path);
  std::vector<WorkerSelection> selections;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 6) {
      throw ParseError(path, line_no, "expected 6 tab-separated columns, got " +
                                          std::to_string(cols.size()));
    }
    WorkerSelection sel;
    sel.worker_id = cols[0];
    try {
      sel.sentence_id = std::stoul(cols[1]);
      sel.span.start = std::stoul(cols[2]);
      sel.span.end = std::stoul(cols[3]);
    } catch (const std::exception&) {
      throw ParseError(path, line_no, "bad numeric field");
    }
    if (cols[4] != "aspect" && cols[4] != "opinion") {
      throw ParseError(path, line_no, "kind must be aspect or opinion");
    }
    sel.kind = cols[4];
    if (cols[5] != "-") sel.polarity = cols[5];
    if (sel.span.start >= sel.span.end) {
      throw ParseError(path, line_no, "empty or inverted span");
    }
    selections.push_back(std::move(sel));
  }
  return selections;
}

std::vector<TokenSpan> merge_crowd_annotations(const TaggedSentence& sentence,
                                               const std::vector<WorkerSelection>& selections,
                                               std::vector<TokenSpan> existing,
                                               int quorum, int panel) {
  if (quorum < 1 || panel < quorum) {
    throw std::invalid_argument("need 1 <= quorum <= panel");
  }
  const std::size_t n = sentence.size();
  std::vector<std::set<std::string>> voters(n);
  for (const WorkerSelection& sel : selections) {
    if (sel.span.end > n || sel.span.start >= sel.span.end) {
      throw std::invalid_argument("selection span outside sentence bounds");
    }
    for (std::size_t t = sel.span.start; t < sel.span.end; ++t) {
      voters[t].insert(sel.worker_id);
    }
  }

  std::vector<TokenSpan> fresh;
  std::size_t t = 0;
  while (t < n) {
    if (voters[t].size() < static_cast<std::size_t>(quorum)) {
      ++t;
      continue;
    }
    std::size_t end = t + 1;
    while (end < n && voters[end].size() >= static_cast<std::size_t>(quorum)) ++end;
    fresh.push_back({t, end});
    t = end;
  }

  // Each vote-backed span is judged against the original gold spans it
  // overlaps: it wins only when strictly longer than all of them (ties keep
  // the existing span), and every gold span it beats is dropped.  Decisions
  // are pairwise against the input set, so the outcome is order-independent.
  std::vector<bool> beaten(existing.size(), false);
  std::vector<TokenSpan> result;
  for (const TokenSpan& span : fresh) {
    bool wins = true;
    for (const TokenSpan& old : existing) {
      if (old.overlaps(span) && old.length() >= span.length()) {
        wins = false;
        break;
      }
    }
    if (!wins) continue;
    for (std::size_t i = 0; i < existing.size(); ++i) {
      if (existing[i].overlaps(span)) beaten[i] = true;
    }
    result.push_back(span);
  }
  for (std::size_t i = 0; i < existing.size(); ++i) {
    if (!beaten[i]) result.push_back(existing[i]);
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<TokenSpan> aspect_spans(const std::vector<BioLabel>& labels) {
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i] != BioLabel::BA) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < labels.size() && labels[end] == BioLabel::IA) ++end;
    spans.push_back({i, end});
    i = end;
  }
  return spans;
}

}  // namespace akg
