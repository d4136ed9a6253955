#include "msp_dst/encoder/encoder.hpp"

namespace msp {

void EncoderConfig::validate() const {
  if (dim < 1 || heads < 1 || layers < 0 || ffn < 1) throw ConfigError("encoder sizes must be positive");
  if (dim % heads != 0) throw ConfigError("encoder dim must be divisible by heads");
  if (max_len < 2) throw ConfigError("max_len must be at least 2");
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"dim", dim}, {"heads", heads}, {"layers", layers}, {"ffn", ffn}, {"max_len", max_len}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.dim = j.value("dim", c.dim);
  c.heads = j.value("heads", c.heads);
  c.layers = j.value("layers", c.layers);
  c.ffn = j.value("ffn", c.ffn);
  c.max_len = j.value("max_len", c.max_len);
  return c;
}

std::vector<int> encoder_segments(const TokenizedContext& ctx) {
  std::vector<int> out(static_cast<std::size_t>(ctx.size()), kEncUserEarlier);
  out[0] = kEncCls;
  int latest = 0;
  for (const auto& b : ctx.boundaries) {
    if (b.speaker != Speaker::state) latest = std::max(latest, b.turn);
  }
  for (const auto& b : ctx.boundaries) {
    int seg = kEncState;
    if (b.speaker == Speaker::agent) seg = b.turn == latest ? kEncAgentLatest : kEncAgentEarlier;
    if (b.speaker == Speaker::user) seg = b.turn == latest ? kEncUserLatest : kEncUserEarlier;
    for (int i = b.begin; i < b.end; ++i) out[static_cast<std::size_t>(i + 1)] = seg;
  }
  return out;
}

std::vector<int> encoder_positions(int length, int max_len) {
  if (length > max_len) throw DimensionError("sequence longer than the positional table");
  std::vector<int> out(static_cast<std::size_t>(length));
  if (length == 0) return out;
  out[0] = max_len - 1;
  for (int i = 1; i < length; ++i) out[static_cast<std::size_t>(i)] = length - 1 - i;
  return out;
}

}  // namespace msp
