#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace akg {

enum class TripleSource { dump, generated };

const char* to_string(TripleSource source);
TripleSource parse_triple_source(const std::string& text);

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;
  TripleSource source = TripleSource::dump;

  friend bool operator==(const Triple&, const Triple&) = default;
};

// Lowercase, internal whitespace collapsed to single underscores.
std::string normalize_concept(const std::string& raw);

// Edge list with an undirected incidence index; concepts are stored
// normalized.
struct TripleStore {
  std::vector<Triple> triples;
  std::unordered_map<std::string, std::vector<std::size_t>> incidence;

  // HEAD\tRELATION\tTAIL rows.
  static TripleStore load(const std::string& path);

  void add(Triple triple);
  bool contains(const std::string& term) const;

  // Endpoints opposite `term` across its incident edges, in insertion
  // order, duplicates preserved.
  std::vector<std::string> neighbors(const std::string& term) const;
};

}  // namespace akg
