#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "akg/corpus.hpp"
#include "akg/embedding.hpp"
#include "akg/triples.hpp"

namespace akg {

struct KgConfig {
  int k_seeds = 7;
  int max_hops = 2;
  double min_path_relatedness = 0.2;
  int generator_completions = 100;

  void validate() const;
};

struct KgNode {
  int hop = 0;
  TripleSource source = TripleSource::dump;
  // Seed -> cosine(seed, node) for every seed whose expansion retained it.
  std::map<std::string, double> relatedness_by_seed;
};

struct DomainKG {
  std::string domain_id;
  KgConfig config;
  std::vector<std::string> seeds;  // in selection (score) order
  std::map<std::string, KgNode> nodes;
  std::vector<Triple> edges;
  std::vector<std::string> warnings;

  bool contains_concept(const std::string& term) const {
    return nodes.count(term) > 0;
  }
  std::size_t non_seed_count() const;
};

// Supplies tail completions for (seed, "RelatedTo"); nullopt signals failure
// for that seed.
class TripleGenerator {
 public:
  virtual ~TripleGenerator() = default;
  virtual std::optional<std::vector<std::string>> completions(
      const std::string& seed, int max_n) = 0;
};

// TSV-backed generator: SEED\tTAIL rows, tails served in file order with
// per-seed duplicates removed.  Seeds absent from the file are failures.
class FileTripleGenerator : public TripleGenerator {
 public:
  explicit FileTripleGenerator(const std::string& path);
  std::optional<std::vector<std::string>> completions(const std::string& seed,
                                                      int max_n) override;

 private:
  std::map<std::string, std::vector<std::string>> tails_;
};

// Top-k noun phrases by summed tf-idf.  Documents are sentences, tf is the
// raw in-sentence count, idf = ln((1+N)/(1+df)) + 1; ties break
// lexicographically.
std::vector<std::string> select_seed_terms(const Corpus& corpus, int k);

// Minimum seed relatedness over the path's non-seed nodes.
double path_min_relatedness(const std::vector<std::string>& path_nodes,
                            const std::string& seed, const EmbeddingTable& table);

struct SeedExpansion {
  std::string seed;
  bool seed_found = false;
  // term -> (hop at first qualifying reach, cosine to the seed)
  std::map<std::string, std::pair<int, double>> retained;
};

// Hop-layered widest-path search: a node joins the expansion at the first hop
// where some retained predecessor gives it a path bottleneck at or above
// cfg.min_path_relatedness.  The seed itself sits at hop 0 with score 1.
SeedExpansion expand_and_prune(const TripleStore& store, const std::string& seed,
                               const EmbeddingTable& table, const KgConfig& cfg);

// Union of per-seed expansions over tf-idf seed terms; edges are the stored
// triples with both endpoints retained, plus generated completions.
DomainKG build_domain_kg(const Corpus& corpus, const TripleStore& store,
                         const EmbeddingTable& table, TripleGenerator* generator,
                         const KgConfig& cfg);

// Adds up to cfg.generator_completions novel tails per seed as
// (seed, RelatedTo, tail) edges; tails already in the graph are skipped and
// per-seed generator failures are recorded as warnings.
DomainKG augment_with_generator(DomainKG kg, TripleGenerator& generator,
                                const KgConfig& cfg);

// Keeps every seed plus a seeded sample of round(pct/100 * non-seed) nodes;
// edges with a dropped endpoint go with them.
DomainKG sample_kg(const DomainKG& kg, double pct, uint64_t seed);

std::string serialize_kg(const DomainKG& kg);
DomainKG parse_kg(const std::string& text, const std::string& file_label);
void save_kg(const DomainKG& kg, const std::string& path);
DomainKG load_kg(const std::string& path);

}  // namespace akg
