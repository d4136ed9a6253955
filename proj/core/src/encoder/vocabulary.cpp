#include "msp_dst/encoder/vocabulary.hpp"

namespace msp {

Vocabulary::Vocabulary() {
  for (const char* t : {kClsToken, kUnkToken, kAgentSep, kUserSep, kStateSep, "=", ";"}) add(t);
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) add(t);
}

int Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, static_cast<int>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? unk_id() : it->second;
}

Vocabulary Vocabulary::build(const std::vector<Dialogue>& dialogues, const Schema& schema) {
  Vocabulary v;
  for (const auto& s : schema.slots()) {
    v.add(s.name);
    for (const auto& t : split_slot_name(s.name)) v.add(t);
    for (const auto& value : s.ontology) {
      for (const auto& t : tokenize(value)) v.add(t);
    }
  }
  for (const auto& d : dialogues) {
    for (const auto& turn : d.turns) {
      for (const auto& t : turn.agent_tokens) v.add(t);
      for (const auto& t : turn.user_tokens) v.add(t);
      for (const auto& value : turn.gold.values) {
        if (value.is_concrete()) {
          for (const auto& t : tokenize(value.text())) v.add(t);
        }
      }
    }
  }
  return v;
}

void Vocabulary::encode(TokenizedContext& ctx) const {
  ctx.ids.clear();
  ctx.ids.reserve(ctx.tokens.size() + 1);
  ctx.ids.push_back(cls_id());
  for (const auto& t : ctx.tokens) ctx.ids.push_back(id(t));
}

}  // namespace msp
