#include "msp_dst/corpus/schema.hpp"

#include "msp_dst/common/error.hpp"
#include "msp_dst/common/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

namespace msp {

std::string to_string(SlotKind kind) {
  return kind == SlotKind::categorical ? "categorical" : "span";
}

Schema::Schema(std::vector<SlotDef> slots, std::map<std::string, std::string> synonyms)
    : slots_(std::move(slots)), synonyms_(std::move(synonyms)), normalizer_(synonyms_) {
  if (slots_.empty()) throw ConfigError("empty schema");
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const auto& s = slots_[i];
    if (s.name.empty()) throw ConfigError("slot " + std::to_string(i) + " has no name");
    if (!by_name_.emplace(s.name, i).second) throw ConfigError("duplicate slot name: " + s.name);
    if (s.categorical() && s.ontology.empty()) {
      throw ConfigError("categorical slot " + s.name + " has an empty ontology");
    }
    if (!s.categorical() && !s.ontology.empty()) {
      throw ConfigError("span slot " + s.name + " must not declare an ontology");
    }
    if (s.relevant_slots.size() > kMaxRelevantSlots) {
      throw ConfigError("slot " + s.name + " lists " + std::to_string(s.relevant_slots.size()) +
                        " relevant slots (at most 3 allowed)");
    }
  }
  relevant_.resize(slots_.size());
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    std::set<std::size_t> seen;
    for (const auto& r : slots_[i].relevant_slots) {
      auto it = by_name_.find(r);
      if (it == by_name_.end()) {
        throw ConfigError("slot " + slots_[i].name + " references unknown relevant slot " + r);
      }
      if (it->second == i) throw ConfigError("slot " + slots_[i].name + " lists itself as relevant");
      seen.insert(it->second);
    }
    relevant_[i].assign(seen.begin(), seen.end());
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t Schema::index_of(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw ConfigError("unknown slot: " + std::string(name));
  return *idx;
}

std::vector<std::string> Schema::domains() const {
  std::vector<std::string> out;
  for (const auto& s : slots_) {
    if (std::find(out.begin(), out.end(), s.domain) == out.end()) out.push_back(s.domain);
  }
  return out;
}

std::optional<int> Schema::ontology_index(std::size_t slot, std::string_view value) const {
  const auto& onto = slots_.at(slot).ontology;
  const std::string v = normalizer_.value(value);
  for (std::size_t i = 0; i < onto.size(); ++i) {
    if (normalizer_.value(onto[i]) == v) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::string Schema::fingerprint() const {
  std::string canon;
  for (const auto& s : slots_) {
    canon += s.name + '\x1f' + s.domain + '\x1f' + to_string(s.kind) + '\x1f';
    for (const auto& v : s.ontology) canon += v + '\x1e';
    canon += '\x1f';
    for (const auto& r : s.relevant_slots) canon += r + '\x1e';
    canon += '\x1d';
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
  return buf;
}

nlohmann::json Schema::to_json() const {
  nlohmann::json slots = nlohmann::json::array();
  for (const auto& s : slots_) {
    nlohmann::json j{{"name", s.name}, {"domain", s.domain}, {"kind", to_string(s.kind)},
                     {"relevant_slots", s.relevant_slots}};
    if (s.categorical()) j["ontology"] = s.ontology;
    slots.push_back(std::move(j));
  }
  return {{"slots", slots}, {"synonyms", synonyms_}};
}

Schema Schema::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("slots") || !j["slots"].is_array()) {
    throw ConfigError("schema must be an object with a \"slots\" array");
  }
  std::vector<SlotDef> slots;
  for (const auto& js : j["slots"]) {
    SlotDef s;
    try {
      s.name = js.at("name").get<std::string>();
      s.domain = js.value("domain", std::string{});
      if (s.domain.empty()) s.domain = s.name.substr(0, s.name.find('-'));
      const std::string kind = js.value("kind", std::string("span"));
      if (kind == "categorical") {
        s.kind = SlotKind::categorical;
      } else if (kind == "span") {
        s.kind = SlotKind::span;
      } else {
        throw ConfigError("slot " + s.name + " has unknown kind " + kind);
      }
      if (js.contains("ontology") && !js["ontology"].is_null()) {
        s.ontology = js["ontology"].get<std::vector<std::string>>();
      }
      if (js.contains("relevant_slots")) {
        s.relevant_slots = js["relevant_slots"].get<std::vector<std::string>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed slot entry: ") + e.what());
    }
    slots.push_back(std::move(s));
  }
  std::map<std::string, std::string> synonyms;
  if (j.contains("synonyms")) {
    try {
      synonyms = j["synonyms"].get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed synonyms table: ") + e.what());
    }
  }
  return Schema(std::move(slots), std::move(synonyms));
}

Schema parse_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed schema file " + path.string() + ": " + e.what());
  }
  return Schema::from_json(j);
}

void write_schema(const Schema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << schema.to_json().dump(2) << '\n';
}

}  // namespace msp
