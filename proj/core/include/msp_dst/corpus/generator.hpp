#pragma once

#include "msp_dst/corpus/dialogue.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace msp {

// Templated two-to-three domain booking dialogues with controlled phenomena.
// Rates are per-dialogue probabilities.
struct GeneratorConfig {
  int dialogues = 2000;
  double correction_rate = 0.2;  // user replaces an earlier value
  double indirect_rate = 0.3;    // value referred from another domain's slot
  double distractor_rate = 0.3;  // agent mentions an alternative that is not taken
  double restate_rate = 0.3;     // an earlier value is repeated verbatim later
  double dontcare_rate = 0.1;
  double filler_rate = 0.3;  // a turn with no state change
  double train_fraction = 0.8;
  double dev_fraction = 0.1;
  std::vector<std::string> domains = {"train", "restaurant"};

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
  // Missing fields keep their defaults.
  static GeneratorConfig from_json(const nlohmann::json& j);
};

struct GeneratedCorpus {
  Schema schema;
  std::vector<Dialogue> train;
  std::vector<Dialogue> dev;
  std::vector<Dialogue> test;
  std::vector<PhenomenonEvent> events;
};

// Domains available to the generator.
const std::vector<std::string>& known_domains();

Schema synthetic_schema(const std::vector<std::string>& domains);

// Deterministic given (config, seed); each dialogue draws from its own stream.
GeneratedCorpus generate_synthetic_corpus(const GeneratorConfig& config, std::uint64_t seed);

// schema.json, train.jsonl, dev.jsonl, test.jsonl, events.jsonl
void write_corpus(const GeneratedCorpus& corpus, const std::filesystem::path& dir);

}  // namespace msp
