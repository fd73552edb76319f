#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "akg/corpus.hpp"
#include "akg/kg.hpp"

namespace akg {

struct CandidateConfig {
  std::set<std::string> noun_tags = {"NOUN", "PROPN"};
  std::set<std::string> chain_labels = {"amod", "compound"};
};

// A noun phrase span plus its normalized underscore-joined form.
struct CandidateSpan {
  TokenSpan span;
  std::string phrase;

  friend bool operator==(const CandidateSpan&, const CandidateSpan&) = default;
};

// Every noun token yields a span, extended leftward over the contiguous run of
// amod/compound tokens; spans are maximal and non-overlapping, so a noun
// already inside a longer span is not emitted alone.
std::vector<CandidateSpan> extract_candidates(const TaggedSentence& sentence,
                                              const CandidateConfig& cfg = {});

struct KgMatch {
  std::string node;         // graph node that matched
  std::size_t match_start;  // first sentence token of the matched suffix
};

// Tries the full normalized phrase, then drops the leftmost token until a
// single token remains; each attempt also retries a trailing-s singular form.
std::optional<KgMatch> match_kg(const CandidateSpan& candidate,
                                const TaggedSentence& sentence, const DomainKG& kg);

struct InjectionMatch {
  TokenSpan span;  // matched suffix [match_start, candidate end)
  std::string matched_node;
  std::size_t match_start = 0;

  friend bool operator==(const InjectionMatch&, const InjectionMatch&) = default;
};

struct InjectionPlan {
  std::size_t sentence_index = 0;
  std::vector<InjectionMatch> matches;  // sorted, non-overlapping
};

InjectionPlan plan_injections(const TaggedSentence& sentence, const DomainKG& kg,
                              std::size_t sentence_index = 0,
                              const CandidateConfig& cfg = {});

// SENTENCE_ID\tSTART\tEND\tMATCHED_NODE rows.
std::string serialize_plans(const std::vector<InjectionPlan>& plans);
void save_plans(const std::vector<InjectionPlan>& plans, const std::string& path);

}  // namespace akg
