#include "akg/kg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "akg/annotate.hpp"
#include "akg/io_util.hpp"
#include "akg/rng.hpp"
#include "json.hpp"

namespace akg {

void KgConfig::validate() const {
  if (k_seeds < 1) throw std::invalid_argument("k_seeds must be >= 1");
  if (max_hops < 1) throw std::invalid_argument("max_hops must be >= 1");
  if (min_path_relatedness < -1.0 || min_path_relatedness > 1.0) {
    throw std::invalid_argument("min_path_relatedness must lie in [-1, 1]");
  }
  if (generator_completions < 0) {
    throw std::invalid_argument("generator_completions must be >= 0");
  }
}

std::size_t DomainKG::non_seed_count() const {
  std::size_t seed_nodes = 0;
  for (const std::string& s : seeds) {
    if (nodes.count(s)) ++seed_nodes;
  }
  return nodes.size() - seed_nodes;
}

FileTripleGenerator::FileTripleGenerator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open generator file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 2) throw ParseError(path, line_no, "expected SEED\\tTAIL");
    const std::string seed = normalize_concept(cols[0]);
    const std::string tail = normalize_concept(cols[1]);
    if (seed.empty() || tail.empty()) throw ParseError(path, line_no, "empty term");
    auto& tails = tails_[seed];
    if (std::find(tails.begin(), tails.end(), tail) == tails.end()) {
      tails.push_back(tail);
    }
  }
}

std::optional<std::vector<std::string>> FileTripleGenerator::completions(
    const std::string& seed, int max_n) {
  const auto it = tails_.find(seed);
  if (it == tails_.end()) return std::nullopt;
  std::vector<std::string> out = it->second;
  if (static_cast<int>(out.size()) > max_n) out.resize(static_cast<std::size_t>(max_n));
  return out;
}

std::vector<std::string> select_seed_terms(const Corpus& corpus, int k) {
  if (k < 1) throw std::invalid_argument("seed count must be >= 1");
  std::map<std::string, double> total_tf;
  std::map<std::string, int> df;
  for (const TaggedSentence& sentence : corpus.sentences) {
    std::map<std::string, int> in_sentence;
    for (const CandidateSpan& candidate : extract_candidates(sentence)) {
      ++in_sentence[candidate.phrase];
    }
    for (const auto& [phrase, count] : in_sentence) {
      total_tf[phrase] += count;
      ++df[phrase];
    }
  }
  const double n_docs = static_cast<double>(corpus.sentences.size());
  std::vector<std::pair<std::string, double>> scored;
  scored.reserve(total_tf.size());
  for (const auto& [phrase, tf_sum] : total_tf) {
    const double idf = std::log((1.0 + n_docs) / (1.0 + df[phrase])) + 1.0;
    scored.emplace_back(phrase, tf_sum * idf);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> seeds;
  for (const auto& [phrase, score] : scored) {
    if (static_cast<int>(seeds.size()) == k) break;
    seeds.push_back(phrase);
  }
  return seeds;
}

double path_min_relatedness(const std::vector<std::string>& path_nodes,
                            const std::string& seed, const EmbeddingTable& table) {
  if (path_nodes.empty()) {
    throw std::invalid_argument("path must contain at least one node");
  }
  double lowest = 1.0;
  for (const std::string& node : path_nodes) {
    lowest = std::min(lowest, seed_relatedness(table, seed, node));
  }
  return lowest;
}

SeedExpansion expand_and_prune(const TripleStore& store, const std::string& raw_seed,
                               const EmbeddingTable& table, const KgConfig& cfg) {
  cfg.validate();
  SeedExpansion exp;
  exp.seed = normalize_concept(raw_seed);
  const bool in_store = store.contains(exp.seed);
  const bool in_table = table.resolve(exp.seed).has_value();
  exp.seed_found = in_store || in_table;
  if (!exp.seed_found) return exp;

  exp.retained[exp.seed] = {0, 1.0};
  std::vector<std::string> frontier = {exp.seed};
  for (int hop = 1; hop <= cfg.max_hops; ++hop) {
    // A neighbor joins when some already-retained predecessor gives it a path
    // bottleneck >= threshold; predecessors all carry bottlenecks >= threshold
    // themselves, so the test reduces to the neighbor's own seed relatedness.
    std::set<std::string> next;
    for (const std::string& u : frontier) {
      for (const std::string& v : store.neighbors(u)) {
        if (exp.retained.count(v) || next.count(v)) continue;
        const double r = seed_relatedness(table, exp.seed, v);
        if (r >= cfg.min_path_relatedness) next.insert(v);
      }
    }
    for (const std::string& v : next) {
      exp.retained[v] = {hop, seed_relatedness(table, exp.seed, v)};
    }
    frontier.assign(next.begin(), next.end());
    if (frontier.empty()) break;
  }
  return exp;
}

namespace {

void sort_edges(std::vector<Triple>& edges) {
  std::sort(edges.begin(), edges.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.head, a.relation, a.tail, a.source) <
           std::tie(b.head, b.relation, b.tail, b.source);
  });
}

}  // namespace

DomainKG build_domain_kg(const Corpus& corpus, const TripleStore& store,
                         const EmbeddingTable& table, TripleGenerator* generator,
                         const KgConfig& cfg) {
  cfg.validate();
  DomainKG kg;
  kg.domain_id = corpus.domain_id;
  kg.config = cfg;
  kg.seeds = select_seed_terms(corpus, cfg.k_seeds);

  for (const std::string& seed : kg.seeds) {
    const SeedExpansion exp = expand_and_prune(store, seed, table, cfg);
    if (!exp.seed_found) {
      kg.warnings.push_back("seed '" + seed +
                            "' absent from triple store and embedding table");
      continue;
    }
    for (const auto& [term, hop_score] : exp.retained) {
      auto [it, inserted] = kg.nodes.try_emplace(term);
      KgNode& node = it->second;
      if (inserted) {
        node.hop = hop_score.first;
      } else {
        node.hop = std::min(node.hop, hop_score.first);
      }
      node.source = TripleSource::dump;
      node.relatedness_by_seed[seed] = hop_score.second;
    }
  }

  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const Triple& t : store.triples) {
    if (!kg.nodes.count(t.head) || !kg.nodes.count(t.tail)) continue;
    if (!seen.emplace(t.head, t.relation, t.tail).second) continue;
    kg.edges.push_back(t);
  }
  sort_edges(kg.edges);

  if (generator) kg = augment_with_generator(std::move(kg), *generator, cfg);
  return kg;
}

DomainKG augment_with_generator(DomainKG kg, TripleGenerator& generator,
                                const KgConfig& cfg) {
  for (const std::string& seed : kg.seeds) {
    if (!kg.nodes.count(seed)) continue;  // seed never expanded, already warned
    const auto tails = generator.completions(seed, cfg.generator_completions);
    if (!tails) {
      kg.warnings.push_back("generator failed for seed '" + seed + "'");
      continue;
    }
    for (const std::string& raw_tail : *tails) {
      const std::string tail = normalize_concept(raw_tail);
      if (tail.empty() || kg.nodes.count(tail)) continue;
      KgNode node;
      node.hop = 1;
      node.source = TripleSource::generated;
      kg.nodes.emplace(tail, std::move(node));
      kg.edges.push_back({seed, "RelatedTo", tail, TripleSource::generated});
    }
  }
  sort_edges(kg.edges);
  return kg;
}

DomainKG sample_kg(const DomainKG& kg, double pct, uint64_t seed) {
  if (pct < 0.0 || pct > 100.0) {
    throw std::invalid_argument("sample percentage must lie in [0, 100]");
  }
  if (pct == 100.0) return kg;

  const std::set<std::string> seed_set(kg.seeds.begin(), kg.seeds.end());
  std::vector<std::string> non_seeds;
  for (const auto& [term, node] : kg.nodes) {
    if (!seed_set.count(term)) non_seeds.push_back(term);
  }
  const std::size_t keep = static_cast<std::size_t>(
      std::llround(pct / 100.0 * static_cast<double>(non_seeds.size())));

  Rng rng = Rng::substream(seed, 0x5A4D);
  const std::vector<std::size_t> picked = rng.sample(non_seeds.size(), keep);

  DomainKG out;
  out.domain_id = kg.domain_id;
  out.config = kg.config;
  out.seeds = kg.seeds;
  out.warnings = kg.warnings;
  for (const auto& [term, node] : kg.nodes) {
    if (seed_set.count(term)) out.nodes.emplace(term, node);
  }
  for (const std::size_t i : picked) {
    out.nodes.emplace(non_seeds[i], kg.nodes.at(non_seeds[i]));
  }
  for (const Triple& t : kg.edges) {
    if (out.nodes.count(t.head) && out.nodes.count(t.tail)) out.edges.push_back(t);
  }
  return out;
}

std::string serialize_kg(const DomainKG& kg) {
  nlohmann::ordered_json doc;
  doc["domain_id"] = kg.domain_id;
  doc["config"] = {{"k_seeds", kg.config.k_seeds},
                   {"max_hops", kg.config.max_hops},
                   {"min_path_relatedness", kg.config.min_path_relatedness},
                   {"generator_completions", kg.config.generator_completions}};
  doc["seeds"] = kg.seeds;
  doc["warnings"] = kg.warnings;
  nlohmann::ordered_json nodes = nlohmann::ordered_json::object();
  for (const auto& [term, node] : kg.nodes) {
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (const auto& [seed, value] : node.relatedness_by_seed) scores[seed] = value;
    nodes[term] = {{"hop", node.hop},
                      {"source", to_string(node.source)},
                      {"relatedness", std::move(scores)}};
  }
  doc["nodes"] = std::move(nodes);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const Triple& t : kg.edges) {
    edges.push_back({t.head, t.relation, t.tail, to_string(t.source)});
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

DomainKG parse_kg(const std::string& text, const std::string& file_label) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file_label, 1, std::string("invalid JSON: ") + e.what());
  }
  try {
    DomainKG kg;
    kg.domain_id = doc.at("domain_id").get<std::string>();
    const auto& cfg = doc.at("config");
    kg.config.k_seeds = cfg.at("k_seeds").get<int>();
    kg.config.max_hops = cfg.at("max_hops").get<int>();
    kg.config.min_path_relatedness = cfg.at("min_path_relatedness").get<double>();
    kg.config.generator_completions = cfg.at("generator_completions").get<int>();
    kg.seeds = doc.at("seeds").get<std::vector<std::string>>();
    kg.warnings = doc.at("warnings").get<std::vector<std::string>>();
    for (const auto& [term, body] : doc.at("nodes").items()) {
      KgNode node;
      node.hop = body.at("hop").get<int>();
      node.source = parse_triple_source(body.at("source").get<std::string>());
      for (const auto& [seed, value] : body.at("relatedness").items()) {
        node.relatedness_by_seed[seed] = value.get<double>();
      }
      kg.nodes.emplace(term, std::move(node));
    }
    for (const auto& edge : doc.at("edges")) {
      if (!edge.is_array() || edge.size() != 4) {
        throw std::invalid_argument("edge rows must be 4-element arrays");
      }
      kg.edges.push_back({edge[0].get<std::string>(), edge[1].get<std::string>(),
                          edge[2].get<std::string>(),
                          parse_triple_source(edge[3].get<std::string>())});
    }
    kg.config.validate();
    return kg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file_label, 1, std::string("bad graph document: ") + e.what());
  }
}

void save_kg(const DomainKG& kg, const std::string& path) {
  write_file(path, serialize_kg(kg));
}

DomainKG load_kg(const std::string& path) {
  return parse_kg(read_file(path), path);
}

}  // namespace akg
