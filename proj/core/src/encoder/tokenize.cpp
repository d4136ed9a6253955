#include "msp_dst/encoder/tokenize.hpp"

#include "msp_dst/common/error.hpp"

#include <algorithm>

namespace msp {

namespace {

const char* separator(Speaker s) {
  switch (s) {
    case Speaker::agent:
      return kAgentSep;
    case Speaker::user:
      return kUserSep;
    case Speaker::state:
      return kStateSep;
  }
  return kUserSep;
}

int segment_of(Speaker s) {
  switch (s) {
    case Speaker::agent:
      return kSegAgent;
    case Speaker::user:
      return kSegUser;
    case Speaker::state:
      return kSegState;
  }
  return kSegUser;
}

void append(std::span<const Utterance> utts, TokenizedContext& out) {
  for (const auto& u : utts) {
    TurnBoundary b{u.turn, u.speaker, static_cast<int>(out.tokens.size()), 0};
    out.tokens.emplace_back(separator(u.speaker));
    out.tokens.insert(out.tokens.end(), u.tokens.begin(), u.tokens.end());
    out.segments.insert(out.segments.end(), u.tokens.size() + 1, segment_of(u.speaker));
    b.end = static_cast<int>(out.tokens.size());
    out.boundaries.push_back(b);
  }
}

}  // namespace

std::pair<int, int> TokenizedContext::turn_range(int turn) const {
  int lo = -1;
  int hi = -1;
  for (const auto& b : boundaries) {
    if (b.turn != turn || b.speaker == Speaker::state) continue;
    if (lo < 0 || b.begin < lo) lo = b.begin;
    if (b.end > hi) hi = b.end;
  }
  if (lo < 0) return {0, 0};
  return {lo, hi};
}

TokenizedContext tokenize_context(std::span<const Utterance> context, int max_len,
                                  std::span<const Utterance> protected_suffix) {
  if (max_len < 2) throw ConfigError("max_len must be at least 2");
  if (context.empty() && protected_suffix.empty()) throw ConfigError("empty context");

  TokenizedContext full;
  append(context, full);
  append(protected_suffix, full);

  const int budget = max_len - 1;
  const int total = static_cast<int>(full.tokens.size());
  if (total <= budget) return full;

  // Contiguous suffix of the token stream; the state suffix sits at the end so
  // the context is consumed first.
  const int drop = total - budget;
  TokenizedContext out;
  out.tokens.assign(full.tokens.begin() + drop, full.tokens.end());
  out.segments.assign(full.segments.begin() + drop, full.segments.end());
  for (auto b : full.boundaries) {
    if (b.end <= drop) continue;
    b.begin = std::max(b.begin, drop) - drop;
    b.end -= drop;
    out.boundaries.push_back(b);
  }
  return out;
}

std::vector<Utterance> context_utterances(const Dialogue& dialogue, int t) {
  std::vector<Utterance> out;
  out.reserve(static_cast<std::size_t>(2 * t));
  for (int i = 1; i <= t; ++i) {
    const Turn& turn = dialogue.turns.at(static_cast<std::size_t>(i - 1));
    out.push_back({Speaker::agent, i, turn.agent_tokens});
    out.push_back({Speaker::user, i, turn.user_tokens});
  }
  return out;
}

std::vector<std::string> serialize_state_string(const DialogueState& state, const Schema& schema) {
  std::vector<std::string> out;
  for (std::size_t s = 0; s < schema.size(); ++s) {
    const auto& v = state.values[s];
    if (v.is_none()) continue;
    if (!out.empty()) out.emplace_back(";");
    out.push_back(schema.slot(s).name);
    out.emplace_back("=");
    for (auto& tok : tokenize(v.text())) out.push_back(std::move(tok));
  }
  return out;
}

}  // namespace msp
