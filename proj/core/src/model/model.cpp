#include "msp_dst/model/model.hpp"

namespace msp {

nlohmann::json ModelConfig::to_json() const {
  return {{"encoder", encoder.to_json()},
          {"strategy", to_string(strategy)},
          {"pool_capacity", pool_capacity},
          {"pool_mode", to_string(pool_mode)},
          {"categorical_heads", categorical_heads},
          {"zero_heads", zero_heads}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  if (j.contains("encoder")) c.encoder = EncoderConfig::from_json(j.at("encoder"));
  if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  c.pool_capacity = j.value("pool_capacity", c.pool_capacity);
  if (j.contains("pool_mode")) c.pool_mode = parse_pool_mode(j.at("pool_mode").get<std::string>());
  c.categorical_heads = j.value("categorical_heads", c.categorical_heads);
  c.zero_heads = j.value("zero_heads", c.zero_heads);
  return c;
}

template class Model<float>;
template class Model<double>;

}  // namespace msp
