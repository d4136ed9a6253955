#pragma once

#include "msp_dst/corpus/dialogue.hpp"
#include "msp_dst/encoder/tokenize.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace msp {

// Closed token inventory with an unknown-token bucket. Ids are assigned in
// first-seen order, special tokens first.
class Vocabulary {
 public:
  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& tokens);

  // Adds every token of the dialogues, slot names, ontology values and the
  // state-string tokens.
  static Vocabulary build(const std::vector<Dialogue>& dialogues, const Schema& schema);

  int add(const std::string& token);
  int id(const std::string& token) const;  // unknown -> unk id
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  int cls_id() const { return 0; }
  int unk_id() const { return 1; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Fills ctx.ids (classification token at 0).
  void encode(TokenizedContext& ctx) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace msp
