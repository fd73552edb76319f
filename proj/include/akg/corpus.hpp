#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace akg {

// Token tags: aspect begin/inside, opinion begin/inside, outside.
enum class BioLabel { BA, IA, BO, IO, N };

const char* to_string(BioLabel label);
BioLabel parse_bio_label(const std::string& text);
inline bool is_aspect(BioLabel l) { return l == BioLabel::BA || l == BioLabel::IA; }

// Malformed input file; carries the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Half-open token interval [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool overlaps(const TokenSpan& o) const { return start < o.end && o.start < end; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
  friend auto operator<=>(const TokenSpan&, const TokenSpan&) = default;
};

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> pos;
  std::vector<int> dep_head;  // 0-based, root points at itself
  std::vector<std::string> dep_label;
  std::optional<std::vector<BioLabel>> labels;

  std::size_t size() const { return tokens.size(); }
};

struct Corpus {
  std::string domain_id;
  std::vector<TaggedSentence> sentences;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Three independently shuffled 3:1:1 splits of one corpus.
struct PartitionSet {
  std::array<Split, 3> partitions;
};

struct WorkerSelection {
  std::string worker_id;
  std::size_t sentence_id = 0;
  TokenSpan span;
  std::string kind;                     // "aspect" or "opinion"
  std::optional<std::string> polarity;  // absent when the column holds "-"
};

// Tab-separated, one token per line (TOKEN POS HEAD DEP BIO), sentences
// separated by a blank line.  A "-" in the BIO column marks an unlabeled
// sentence; mixing labeled and unlabeled rows within one sentence is an error.
Corpus load_corpus(const std::string& path, const std::string& domain_id = "");
Corpus parse_corpus(std::istream& in, const std::string& file_label,
                    const std::string& domain_id);
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::string& path);

// Deterministic given (sentence count, seed); each partition uses its own
// shuffle and splits 3:1:1 with largest-remainder rounding.
PartitionSet make_partitions(const Corpus& corpus, uint64_t seed);

Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& indices);

std::vector<WorkerSelection> load_worker_selections(const std::string& path);

// Per-token quorum vote over one sentence's selections: emits each maximal run
// of tokens covered by at least `quorum` distinct workers, then merges with
// the existing gold spans, keeping the longer span on overlap (ties keep the
// existing one).  Result is sorted and non-overlapping.
std::vector<TokenSpan> merge_crowd_annotations(const TaggedSentence& sentence,
                                               const std::vector<WorkerSelection>& selections,
                                               std::vector<TokenSpan> existing,
                                               int quorum = 3, int panel = 5);

// Maximal BA (IA)* runs; stray IA tokens outside any run are ignored.
std::vector<TokenSpan> aspect_spans(const std::vector<BioLabel>& labels);

}  // namespace akg
