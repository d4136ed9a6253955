#pragma once

#include "msp_dst/corpus/schema.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace msp {

// A slot value: none, dontcare, or a concrete string.
class SlotValue {
 public:
  enum class Kind { none, dontcare, concrete };

  SlotValue() = default;
  static SlotValue none() { return {}; }
  static SlotValue dontcare() { return SlotValue(Kind::dontcare, "dontcare"); }
  // "none"/"" map to none and "dontcare" maps to dontcare.
  static SlotValue parse(std::string_view text);

  Kind kind() const { return kind_; }
  bool is_none() const { return kind_ == Kind::none; }
  bool is_dontcare() const { return kind_ == Kind::dontcare; }
  bool is_concrete() const { return kind_ == Kind::concrete; }
  const std::string& text() const { return text_; }
  std::string str() const { return is_none() ? "none" : text_; }

  // Exact equality; use matches() for normalized comparison.
  bool operator==(const SlotValue& other) const = default;
  bool matches(const SlotValue& other, const Normalizer& norm) const;

 private:
  SlotValue(Kind kind, std::string text) : kind_(kind), text_(std::move(text)) {}
  Kind kind_ = Kind::none;
  std::string text_;
};

// Values of every schema slot, indexed in schema order, plus the turn at which
// each slot last changed (0 = never).
struct DialogueState {
  std::vector<SlotValue> values;
  std::vector<int> last_updated;

  DialogueState() = default;
  explicit DialogueState(std::size_t slots) : values(slots), last_updated(slots, 0) {}

  std::size_t size() const { return values.size(); }
  bool empty_state() const;
  bool operator==(const DialogueState& other) const = default;
};

struct Turn {
  std::string agent;  // raw text
  std::string user;
  std::vector<std::string> agent_tokens;
  std::vector<std::string> user_tokens;
  DialogueState gold;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;  // turn t (1-based) is turns[t-1]
};

enum class EventKind { indirect, correction, distractor };

struct PhenomenonEvent {
  std::string dialogue_id;
  int turn = 0;
  std::string slot;
  EventKind kind = EventKind::indirect;
  std::string source;  // indirect events: the slot the value came from

  bool operator==(const PhenomenonEvent&) const = default;
};

std::string to_string(EventKind kind);
EventKind parse_event_kind(std::string_view s);

// Fills last_updated by scanning turns in order.
void compute_last_updated(Dialogue& dialogue);

Dialogue dialogue_from_json(const nlohmann::json& j, const Schema& schema);
nlohmann::json dialogue_to_json(const Dialogue& d, const Schema& schema);

std::vector<Dialogue> parse_dialogues(const std::filesystem::path& path, const Schema& schema);
std::vector<Dialogue> read_dialogues(std::istream& in, const Schema& schema);
void write_dialogues(const std::vector<Dialogue>& dialogues, const Schema& schema,
                     const std::filesystem::path& path);

std::vector<PhenomenonEvent> parse_events(const std::filesystem::path& path);
void write_events(const std::vector<PhenomenonEvent>& events, const std::filesystem::path& path);

}  // namespace msp
