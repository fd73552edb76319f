#include "akg/annotate.hpp"

#include <algorithm>
#include <sstream>

#include "akg/io_util.hpp"
#include "akg/triples.hpp"

namespace akg {
namespace {

std::string join_normalized(const TaggedSentence& sentence, std::size_t start,
                            std::size_t end) {
  std::string joined;
  for (std::size_t i = start; i < end; ++i) {
    if (!joined.empty()) joined.push_back('_');
    joined += sentence.tokens[i];
  }
  return normalize_concept(joined);
}

// Naive trailing-s singularization; intentionally crude ("glasses" -> "glasse").
std::optional<std::string> singular_form(const std::string& phrase) {
  if (phrase.size() >= 2 && phrase.back() == 's') {
    return phrase.substr(0, phrase.size() - 1);
  }
  return std::nullopt;
}

}  // namespace

std::vector<CandidateSpan> extract_candidates(const TaggedSentence& sentence,
                                              const CandidateConfig& cfg) {
  const std::size_t n = sentence.size();
  std::vector<CandidateSpan> reversed;
  std::size_t covered_from = n;  // lowest index already inside an emitted span
  // Right-to-left so the rightmost noun of a modifier chain claims the whole
  // span before the nouns inside it are considered.
  for (std::size_t i = n; i-- > 0;) {
    if (!cfg.noun_tags.count(sentence.pos[i])) continue;
    if (i >= covered_from) continue;
    std::size_t start = i;
    while (start > 0 && cfg.chain_labels.count(sentence.dep_label[start - 1])) {
      --start;
    }
    reversed.push_back({{start, i + 1}, join_normalized(sentence, start, i + 1)});
    covered_from = start;
  }
  return {reversed.rbegin(), reversed.rend()};
}

std::optional<KgMatch> match_kg(const CandidateSpan& candidate,
                                const TaggedSentence& sentence, const DomainKG& kg) {
  for (std::size_t start = candidate.span.start; start < candidate.span.end; ++start) {
    const std::string phrase = join_normalized(sentence, start, candidate.span.end);
    if (kg.contains_concept(phrase)) return KgMatch{phrase, start};
    if (const auto singular = singular_form(phrase)) {
      if (kg.contains_concept(*singular)) return KgMatch{*singular, start};
    }
  }
  return std::nullopt;
}

InjectionPlan plan_injections(const TaggedSentence& sentence, const DomainKG& kg,
                              std::size_t sentence_index, const CandidateConfig& cfg) {
  InjectionPlan plan;
  plan.sentence_index = sentence_index;
  for (const CandidateSpan& candidate : extract_candidates(sentence, cfg)) {
    const auto match = match_kg(candidate, sentence, kg);
    if (!match) continue;
    plan.matches.push_back(
        {{match->match_start, candidate.span.end}, match->node, match->match_start});
  }
  return plan;
}

std::string serialize_plans(const std::vector<InjectionPlan>& plans) {
  std::ostringstream out;
  for (const InjectionPlan& plan : plans) {
    for (const InjectionMatch& m : plan.matches) {
      out << plan.sentence_index << '\t' << m.span.start << '\t' << m.span.end
          << '\t' << m.matched_node << '\n';
    }
  }
  return out.str();
}

void save_plans(const std::vector<InjectionPlan>& plans, const std::string& path) {
  write_file(path, serialize_plans(plans));
}

}  // namespace akg
