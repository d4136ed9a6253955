#include "msp_dst/corpus/text.hpp"

#include <cctype>

namespace msp {

namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j == i) break;
    std::string_view chunk = text.substr(i, j - i);
    std::size_t lo = 0;
    std::size_t hi = chunk.size();
    while (lo < hi && is_punct(chunk[lo])) {
      out.emplace_back(1, chunk[lo]);
      ++lo;
    }
    std::vector<std::string> trailing;
    while (hi > lo && is_punct(chunk[hi - 1])) {
      trailing.emplace_back(1, chunk[hi - 1]);
      --hi;
    }
    if (hi > lo) out.push_back(lower(chunk.substr(lo, hi - lo)));
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
    i = j;
  }
  return out;
}

std::vector<std::string> split_slot_name(std::string_view name) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : name) {
    if (c == '-' || c == '_' || is_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

Normalizer::Normalizer(std::map<std::string, std::string> synonyms) {
  // Keys and targets are stored normalized so lookups are symmetric.
  for (auto& [variant, canonical] : synonyms) {
    Normalizer plain;
    synonyms_[plain.value(variant)] = plain.value(canonical);
  }
}

std::string Normalizer::lookup(const std::string& s) const {
  auto it = synonyms_.find(s);
  return it == synonyms_.end() ? s : it->second;
}

std::string Normalizer::token(std::string_view tok) const {
  std::string out;
  for (char c : tok) {
    if (!is_punct(c) && !is_space(c)) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return lookup(out);
}

std::vector<std::string> Normalizer::value_tokens(std::string_view value) const {
  std::vector<std::string> out;
  for (const auto& t : tokenize(value)) {
    std::string n = token(t);
    if (!n.empty()) out.push_back(std::move(n));
  }
  return out;
}

std::string Normalizer::value(std::string_view value) const {
  return lookup(join(value_tokens(value)));
}

}  // namespace msp
