#pragma once

#include "msp_dst/model/model.hpp"
#include "msp_dst/tracker/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace msp {

struct TrainConfig {
  ModelConfig model;
  LossWeights weights;
  double lr = 1e-3;  // desk scale; the "paper" preset uses 1e-5
  int epochs = 20;
  double warmup = 0.1;
  int patience = 3;  // epochs without dev improvement; 0 disables early stopping
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
  // Flat field names, shared with the command line flags.
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base);
  static TrainConfig from_json(const nlohmann::json& j) { return from_json(j, TrainConfig()); }
  // "desk" (defaults), "toy" (the comparison-matrix model) or "paper"
  // (learning rate 1e-5, 512 tokens).
  static TrainConfig preset(std::string_view name);
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;  // mean joint loss per dialogue
  double dev_jga = 0;
  double lr = 0;  // rate used by the last step of the epoch

  nlohmann::json to_json() const;
};

struct TrainResult {
  Model<float> model;  // best dev snapshot
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_dev_jga = 0;
  bool early_stopped = false;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Teacher-forced training, one dialogue per Adam step, early stopping on dev
// JGA. Throws TrainingError on a non-finite loss.
TrainResult train_model(const TrainConfig& cfg, const Schema& schema, const std::vector<Dialogue>& train,
                        const std::vector<Dialogue>& dev, const EpochCallback& on_epoch = {});

// Teacher-forced examples for a model, ids encoded.
std::vector<LabeledTurn> prepare_dialogue(const Model<float>& model, const Dialogue& dialogue);

// JGA of tracking `dialogues` with the model's own strategy.
double evaluate_jga(const Model<float>& model, const std::vector<Dialogue>& dialogues);

void write_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

}  // namespace msp
