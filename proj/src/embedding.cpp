#include "akg/embedding.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "akg/corpus.hpp"

namespace akg {

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path);

  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  long long count = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    if (count < 0) {
      if (!(row >> count >> table.dimension) || count <= 0 || table.dimension <= 0) {
        throw ParseError(path, line_no, "expected 'COUNT DIM' header");
      }
      continue;
    }
    std::string term;
    if (!(row >> term)) throw ParseError(path, line_no, "missing term");
    Eigen::VectorXd vec(table.dimension);
    for (int d = 0; d < table.dimension; ++d) {
      if (!(row >> vec[d])) {
        throw ParseError(path, line_no,
                         "expected " + std::to_string(table.dimension) + " values");
      }
    }
    double trailing;
    if (row >> trailing) throw ParseError(path, line_no, "too many values");
    table.entries[term] = std::move(vec);
  }
  if (count < 0) throw ParseError(path, 1, "empty embedding file");
  if (static_cast<long long>(table.entries.size()) != count) {
    throw ParseError(path, line_no,
                     "header promised " + std::to_string(count) + " rows, found " +
                         std::to_string(table.entries.size()));
  }
  return table;
}

std::optional<Eigen::VectorXd> EmbeddingTable::resolve(const std::string& term) const {
  const auto hit = entries.find(term);
  if (hit != entries.end()) {
    if (hit->second.norm() == 0.0) return std::nullopt;
    return hit->second;
  }
  if (term.find('_') == std::string::npos) return std::nullopt;

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dimension);
  int parts = 0;
  std::size_t begin = 0;
  while (begin <= term.size()) {
    const std::size_t us = term.find('_', begin);
    const std::string part =
        term.substr(begin, us == std::string::npos ? std::string::npos : us - begin);
    if (!part.empty()) {
      const auto it = entries.find(part);
      if (it == entries.end()) return std::nullopt;
      sum += it->second;
      ++parts;
    }
    if (us == std::string::npos) break;
    begin = us + 1;
  }
  if (parts == 0) return std::nullopt;
  sum /= static_cast<double>(parts);
  if (sum.norm() == 0.0) return std::nullopt;
  return sum;
}

double relatedness(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("embedding dimension mismatch: " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("cosine relatedness undefined for zero vector");
  }
  return a.dot(b) / (na * nb);
}

double seed_relatedness(const EmbeddingTable& table, const std::string& seed,
                        const std::string& term) {
  const auto a = table.resolve(seed);
  if (!a) return 0.0;
  const auto b = table.resolve(term);
  if (!b) return 0.0;
  return relatedness(*a, *b);
}

}  // namespace akg
