#include "msp_dst/corpus/dialogue.hpp"

#include "msp_dst/common/error.hpp"

#include <fstream>
#include <sstream>

namespace msp {

SlotValue SlotValue::parse(std::string_view text) {
  if (text.empty() || text == "none") return none();
  if (text == "dontcare" || text == "dont care" || text == "do not care") return dontcare();
  return SlotValue(Kind::concrete, std::string(text));
}

bool SlotValue::matches(const SlotValue& other, const Normalizer& norm) const {
  if (kind_ != other.kind_) return false;
  if (kind_ != Kind::concrete) return true;
  return norm.same(text_, other.text_);
}

bool DialogueState::empty_state() const {
  for (const auto& v : values) {
    if (!v.is_none()) return false;
  }
  return true;
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::indirect:
      return "indirect";
    case EventKind::correction:
      return "correction";
    case EventKind::distractor:
      return "distractor";
  }
  return "indirect";
}

EventKind parse_event_kind(std::string_view s) {
  if (s == "indirect") return EventKind::indirect;
  if (s == "correction") return EventKind::correction;
  if (s == "distractor") return EventKind::distractor;
  throw ConfigError("unknown event kind: " + std::string(s));
}

void compute_last_updated(Dialogue& dialogue) {
  std::vector<int> last;
  const DialogueState* prev = nullptr;
  for (std::size_t t = 0; t < dialogue.turns.size(); ++t) {
    auto& st = dialogue.turns[t].gold;
    if (last.empty()) last.assign(st.size(), 0);
    for (std::size_t s = 0; s < st.size(); ++s) {
      const SlotValue before = prev ? prev->values[s] : SlotValue::none();
      if (!(st.values[s] == before)) last[s] = static_cast<int>(t) + 1;
    }
    st.last_updated = last;
    prev = &st;
  }
}

Dialogue dialogue_from_json(const nlohmann::json& j, const Schema& schema) {
  Dialogue d;
  try {
    d.id = j.at("id").get<std::string>();
    const auto& turns = j.at("turns");
    if (!turns.is_array() || turns.empty()) throw ConfigError("dialogue " + d.id + " is empty");
    for (const auto& jt : turns) {
      Turn t;
      t.agent = jt.value("agent", std::string{});
      t.user = jt.value("user", std::string{});
      t.agent_tokens = tokenize(t.agent);
      t.user_tokens = tokenize(t.user);
      t.gold = DialogueState(schema.size());
      if (jt.contains("state")) {
        for (const auto& [name, value] : jt["state"].items()) {
          auto idx = schema.find(name);
          if (!idx) {
            throw ConfigError("dialogue " + d.id + " names slot outside schema: " + name);
          }
          t.gold.values[*idx] =
              value.is_null() ? SlotValue::none() : SlotValue::parse(value.get<std::string>());
        }
      }
      d.turns.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed dialogue record: ") + e.what());
  }
  compute_last_updated(d);
  return d;
}

nlohmann::json dialogue_to_json(const Dialogue& d, const Schema& schema) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : d.turns) {
    nlohmann::json state = nlohmann::json::object();
    for (std::size_t s = 0; s < schema.size(); ++s) {
      if (!t.gold.values[s].is_none()) state[schema.slot(s).name] = t.gold.values[s].str();
    }
    turns.push_back({{"agent", t.agent}, {"user", t.user}, {"state", state}});
  }
  return {{"id", d.id}, {"turns", turns}};
}

std::vector<Dialogue> read_dialogues(std::istream& in, const Schema& schema) {
  std::vector<Dialogue> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(dialogue_from_json(j, schema));
  }
  return out;
}

std::vector<Dialogue> parse_dialogues(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dialogue file " + path.string());
  return read_dialogues(in, schema);
}

void write_dialogues(const std::vector<Dialogue>& dialogues, const Schema& schema,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& d : dialogues) out << dialogue_to_json(d, schema).dump() << '\n';
}

std::vector<PhenomenonEvent> parse_events(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open events file " + path.string());
  std::vector<PhenomenonEvent> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({j.at("dialogue_id").get<std::string>(), j.at("turn").get<int>(),
                     j.at("slot").get<std::string>(),
                     parse_event_kind(j.at("event").get<std::string>()),
                     j.value("source_slot", std::string())});
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed event record: " + std::string(e.what()));
    }
  }
  return out;
}

void write_events(const std::vector<PhenomenonEvent>& events, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& e : events) {
    nlohmann::json j{{"dialogue_id", e.dialogue_id},
                     {"turn", e.turn},
                     {"slot", e.slot},
                     {"event", to_string(e.kind)}};
    if (!e.source.empty()) j["source_slot"] = e.source;
    out << j.dump() << '\n';
  }
}

}  // namespace msp
