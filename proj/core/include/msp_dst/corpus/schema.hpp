#pragma once

#include "msp_dst/corpus/text.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace msp {

enum class SlotKind { categorical, span };

inline constexpr std::size_t kMaxRelevantSlots = 3;

struct SlotDef {
  std::string name;
  std::string domain;
  SlotKind kind = SlotKind::span;
  std::vector<std::string> ontology;        // categorical only
  std::vector<std::string> relevant_slots;  // at most kMaxRelevantSlots

  bool categorical() const { return kind == SlotKind::categorical; }
};

// Slot inventory plus the relevant-slot dictionary and value synonyms.
// Slots keep file order; that order is "schema order" everywhere else.
class Schema {
 public:
  Schema() = default;
  // Validates and throws ConfigError on any violated invariant.
  Schema(std::vector<SlotDef> slots, std::map<std::string, std::string> synonyms = {});

  const std::vector<SlotDef>& slots() const { return slots_; }
  const SlotDef& slot(std::size_t i) const { return slots_.at(i); }
  std::size_t size() const { return slots_.size(); }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws ConfigError

  // Relevant slots of slot i as indices, in schema order.
  const std::vector<std::size_t>& relevant(std::size_t i) const { return relevant_.at(i); }

  std::vector<std::string> domains() const;  // first-appearance order

  // Ontology index of a value after normalization, if present.
  std::optional<int> ontology_index(std::size_t slot, std::string_view value) const;

  const Normalizer& normalizer() const { return normalizer_; }
  const std::map<std::string, std::string>& synonyms() const { return synonyms_; }

  // Stable hash over names, kinds, ontologies and relevant-slot lists.
  std::string fingerprint() const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& j);

 private:
  std::vector<SlotDef> slots_;
  std::map<std::string, std::string> synonyms_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::vector<std::vector<std::size_t>> relevant_;
  Normalizer normalizer_;
};

Schema parse_schema(const std::filesystem::path& path);
void write_schema(const Schema& schema, const std::filesystem::path& path);

std::string to_string(SlotKind kind);

}  // namespace msp
