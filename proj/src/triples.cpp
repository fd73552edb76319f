#include "akg/triples.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include "akg/corpus.hpp"
#include "akg/io_util.hpp"

namespace akg {

const char* to_string(TripleSource source) {
  return source == TripleSource::dump ? "dump" : "generated";
}

TripleSource parse_triple_source(const std::string& text) {
  if (text == "dump") return TripleSource::dump;
  if (text == "generated") return TripleSource::generated;
  throw std::invalid_argument("unknown triple source '" + text + "'");
}

std::string normalize_concept(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_gap = false;
  for (const char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '_') {
      if (!out.empty()) pending_gap = true;
      continue;
    }
    if (pending_gap) {
      out.push_back('_');
      pending_gap = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

TripleStore TripleStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open triple file " + path);
  TripleStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 3) {
      throw ParseError(path, line_no, "expected HEAD\\tRELATION\\tTAIL");
    }
    Triple t;
    t.head = normalize_concept(cols[0]);
    t.relation = cols[1];
    t.tail = normalize_concept(cols[2]);
    if (t.head.empty() || t.tail.empty()) {
      throw ParseError(path, line_no, "empty term");
    }
    store.add(std::move(t));
  }
  return store;
}

void TripleStore::add(Triple triple) {
  const std::size_t index = triples.size();
  incidence[triple.head].push_back(index);
  if (triple.tail != triple.head) incidence[triple.tail].push_back(index);
  triples.push_back(std::move(triple));
}

bool TripleStore::contains(const std::string& term) const {
  return incidence.count(term) > 0;
}

std::vector<std::string> TripleStore::neighbors(const std::string& term) const {
  std::vector<std::string> out;
  const auto it = incidence.find(term);
  if (it == incidence.end()) return out;
  out.reserve(it->second.size());
  for (const std::size_t index : it->second) {
    const Triple& t = triples[index];
    out.push_back(t.head == term ? t.tail : t.head);
  }
  return out;
}

}  // namespace akg
