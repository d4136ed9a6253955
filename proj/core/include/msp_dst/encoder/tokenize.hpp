#pragma once

#include "msp_dst/corpus/dialogue.hpp"

#include <span>
#include <string>
#include <vector>

namespace msp {

enum class Speaker { agent, user, state };

inline constexpr const char* kClsToken = "[cls]";
inline constexpr const char* kUnkToken = "[unk]";
inline constexpr const char* kAgentSep = "[sys]";
inline constexpr const char* kUserSep = "[usr]";
inline constexpr const char* kStateSep = "[state]";

// Segment ids fed to the encoder alongside token ids.
enum Segment : int { kSegCls = 0, kSegAgent = 1, kSegUser = 2, kSegState = 3, kNumSegments = 4 };

struct Utterance {
  Speaker speaker = Speaker::user;
  int turn = 0;
  std::vector<std::string> tokens;
};

// Half-open range [begin, end) over TokenizedContext::tokens (which excludes
// the classification token).
struct TurnBoundary {
  int turn = 0;
  Speaker speaker = Speaker::user;
  int begin = 0;
  int end = 0;
};

struct TokenizedContext {
  std::vector<std::string> tokens;  // token text, classification token excluded
  std::vector<int> segments;        // per token, classification token excluded
  std::vector<TurnBoundary> boundaries;
  std::vector<int> ids;  // filled by Vocabulary::encode; ids[0] is the classification token

  // Length including the classification token.
  int size() const { return static_cast<int>(tokens.size()) + 1; }
  // Token range of a given turn (agent + user); empty range when truncated away.
  std::pair<int, int> turn_range(int turn) const;
};

// Joins utterances with speaker separators. Over budget, the oldest context
// tokens are dropped so that max_len - 1 tokens remain, then the
// classification token is prepended. Tokens of protected_suffix are appended
// after the context and only truncated once the context is gone.
TokenizedContext tokenize_context(std::span<const Utterance> context, int max_len,
                                  std::span<const Utterance> protected_suffix = {});

// Utterances of turns 1..t of a dialogue.
std::vector<Utterance> context_utterances(const Dialogue& dialogue, int t);

// "slot = value ;" pairs in schema order, none slots omitted.
std::vector<std::string> serialize_state_string(const DialogueState& state, const Schema& schema);

}  // namespace msp
