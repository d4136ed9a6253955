#pragma once

#include "msp_dst/common/error.hpp"
#include "msp_dst/common/tensor.hpp"
#include "msp_dst/encoder/vocabulary.hpp"

#include <string>
#include <vector>

namespace msp {

// Read-only view of a token embedding matrix (one row per vocabulary id).
template <class S>
struct EmbeddingTable {
  const Vocabulary* vocab = nullptr;
  const Mat<S>* vectors = nullptr;
  bool frozen = true;

  int dim() const { return static_cast<int>(vectors->cols()); }
  auto row(int id) const { return vectors->row(id); }
};

// Mean of the token vectors. Tokens outside the vocabulary use the unknown
// bucket.
template <class S>
Vec<S> embed_text(const std::vector<std::string>& tokens, const EmbeddingTable<S>& table) {
  if (tokens.empty()) throw std::invalid_argument("embed_text: empty token list");
  Vec<S> out = Vec<S>::Zero(table.dim());
  for (const auto& t : tokens) out += table.row(table.vocab->id(t)).transpose();
  out /= static_cast<S>(tokens.size());
  return out;
}

}  // namespace msp
