#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace msp {

// Lowercased whitespace tokenization with leading/trailing punctuation split
// into separate tokens. Internal punctuation survives, so "19:45" and
// "don't" stay single tokens while "19:45." yields {"19:45", "."}.
std::vector<std::string> tokenize(std::string_view text);

// Slot names split on '-', '_' and whitespace: "restaurant-book_day" ->
// {"restaurant", "book", "day"}.
std::vector<std::string> split_slot_name(std::string_view name);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

// Value normalization: lowercase, punctuation strip, optional synonym table
// mapping a surface variant to its canonical form.
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(std::map<std::string, std::string> synonyms);

  // Normalized single token; may be empty for punctuation-only tokens.
  std::string token(std::string_view tok) const;
  // Normalized token sequence of a full value string (empties dropped).
  std::vector<std::string> value_tokens(std::string_view value) const;
  std::string value(std::string_view value) const;

  bool same(std::string_view a, std::string_view b) const { return value(a) == value(b); }

  const std::map<std::string, std::string>& synonyms() const { return synonyms_; }

 private:
  std::string lookup(const std::string& s) const;
  std::map<std::string, std::string> synonyms_;
};

}  // namespace msp
