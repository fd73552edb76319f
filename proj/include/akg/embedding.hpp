#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_map>

namespace akg {

// Concept vector table.  File format: a "COUNT DIM" header line followed by
// COUNT rows of "CONCEPT v1 ... vDIM" separated by whitespace.
struct EmbeddingTable {
  int dimension = 0;
  std::unordered_map<std::string, Eigen::VectorXd> entries;

  static EmbeddingTable load(const std::string& path);

  // Exact lookup first; a multi-word term (underscore-joined) falls back to
  // the mean of its constituent token vectors.  Unknown constituents or a
  // zero-norm result make the term unresolvable.
  std::optional<Eigen::VectorXd> resolve(const std::string& term) const;
};

// Cosine similarity.  Dimension mismatch or a zero-norm operand is an error;
// callers that want "unrelated" semantics use seed_relatedness instead.
double relatedness(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Cosine between two concepts, 0.0 when either is unresolvable.
double seed_relatedness(const EmbeddingTable& table, const std::string& seed,
                        const std::string& term);

}  // namespace akg
