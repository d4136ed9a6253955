#include "msp_dst/training/trainer.hpp"

#include "msp_dst/common/error.hpp"
#include "msp_dst/common/rng.hpp"
#include "msp_dst/eval/metrics.hpp"
#include "msp_dst/training/schedule.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

namespace msp {

void TrainConfig::validate() const {
  model.encoder.validate();
  if (weights.alpha < 0 || weights.beta < 0 || weights.gamma < 0) throw ConfigError("loss weights must be >= 0");
  if (!(warmup >= 0.0 && warmup < 1.0)) throw ConfigError("warmup must lie in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (model.pool_capacity < 1) throw ConfigError("pool_capacity must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"strategy", to_string(model.strategy)},
          {"max_len", model.encoder.max_len},
          {"pool_mode", to_string(model.pool_mode)},
          {"pool_capacity", model.pool_capacity},
          {"categorical_heads", model.categorical_heads},
          {"zero_heads", model.zero_heads},
          {"dim", model.encoder.dim},
          {"heads", model.encoder.heads},
          {"layers", model.encoder.layers},
          {"ffn", model.encoder.ffn},
          {"alpha", weights.alpha},
          {"beta", weights.beta},
          {"gamma", weights.gamma},
          {"lr", lr},
          {"epochs", epochs},
          {"warmup", warmup},
          {"patience", patience},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, TrainConfig c) {
  try {
    if (j.contains("preset")) c = preset(j.at("preset").get<std::string>());
    if (j.contains("strategy")) c.model.strategy = parse_strategy(j.at("strategy").get<std::string>());
    if (j.contains("pool_mode")) c.model.pool_mode = parse_pool_mode(j.at("pool_mode").get<std::string>());
    c.model.encoder.max_len = j.value("max_len", c.model.encoder.max_len);
    c.model.pool_capacity = j.value("pool_capacity", c.model.pool_capacity);
    c.model.categorical_heads = j.value("categorical_heads", c.model.categorical_heads);
    c.model.zero_heads = j.value("zero_heads", c.model.zero_heads);
    c.model.encoder.dim = j.value("dim", c.model.encoder.dim);
    c.model.encoder.heads = j.value("heads", c.model.encoder.heads);
    c.model.encoder.layers = j.value("layers", c.model.encoder.layers);
    c.model.encoder.ffn = j.value("ffn", c.model.encoder.ffn);
    c.weights.alpha = j.value("alpha", c.weights.alpha);
    c.weights.beta = j.value("beta", c.weights.beta);
    c.weights.gamma = j.value("gamma", c.weights.gamma);
    c.lr = j.value("lr", c.lr);
    c.epochs = j.value("epochs", c.epochs);
    c.warmup = j.value("warmup", c.warmup);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed training config: ") + e.what());
  }
  return c;
}

TrainConfig TrainConfig::preset(std::string_view name) {
  TrainConfig c;
  if (name == "desk") return c;
  if (name == "toy") {
    // Small enough that a 12-run strategy comparison fits in minutes on one core.
    c.model.encoder = {32, 2, 1, 64, 64};
    c.epochs = 40;
    c.lr = 2e-3;
    return c;
  }
  if (name == "paper") {
    c.lr = 1e-5;
    c.model.encoder.max_len = 512;
    return c;
  }
  throw ConfigError("unknown preset: " + std::string(name));
}

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch}, {"train_loss", train_loss}, {"dev_jga", dev_jga}, {"lr", lr}};
}

std::vector<LabeledTurn> prepare_dialogue(const Model<float>& model, const Dialogue& dialogue) {
  auto turns = label_dialogue(dialogue, model.schema(), model.config().label_options());
  for (auto& t : turns) model.encode_ids(t.context);
  return turns;
}

double evaluate_jga(const Model<float>& model, const std::vector<Dialogue>& dialogues) {
  ModelPredictor predictor(model);
  TrackOptions opts;
  opts.strategy = model.strategy();
  std::vector<DialogueState> preds;
  for (const auto& d : dialogues) {
    auto r = track_dialogue(predictor, d, model.schema(), opts);
    preds.insert(preds.end(), r.states.begin(), r.states.end());
  }
  return joint_goal_accuracy(preds, gold_states(dialogues), model.schema().normalizer());
}

TrainResult train_model(const TrainConfig& cfg, const Schema& schema, const std::vector<Dialogue>& train,
                        const std::vector<Dialogue>& dev, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw ConfigError("training split is empty");

  Model<float> model(cfg.model, schema, Vocabulary::build(train, schema));
  model.init(mix_seed(cfg.seed, 0x6d6f64656cULL));

  std::vector<std::vector<LabeledTurn>> data;
  data.reserve(train.size());
  for (const auto& d : train) data.push_back(prepare_dialogue(model, d));

  Adam<float> adam(model.params());
  const long total = static_cast<long>(cfg.epochs) * static_cast<long>(data.size());
  long step = 0;

  TrainResult result;
  std::vector<Mat<float>> best;
  int since_best = 0;
  std::vector<std::size_t> order(data.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double sum = 0;
    double lr = 0;
    for (std::size_t idx : order) {
      model.params().zero_grad();
      LossParts parts;
      for (const auto& turn : data[idx]) parts += model.turn_loss(turn, cfg.weights, true);
      const double loss = parts.joint(cfg.weights);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss " + std::to_string(loss) + " at epoch " + std::to_string(epoch) +
                            ", dialogue " + train[idx].id + " (type " + std::to_string(parts.type) + ", mention " +
                            std::to_string(parts.mention) + ", hit " + std::to_string(parts.hit) + ")");
      }
      ++step;
      lr = lr_at(step, total, cfg.lr, cfg.warmup);
      adam.step(model.params(), lr);
      sum += loss;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = sum / static_cast<double>(data.size());
    rec.dev_jga = dev.empty() ? 0.0 : evaluate_jga(model, dev);
    rec.lr = lr;
    result.history.push_back(rec);
    spdlog::info("epoch {} loss {:.4f} dev_jga {:.4f} lr {:.2e}", epoch, rec.train_loss, rec.dev_jga, rec.lr);
    if (on_epoch) on_epoch(rec);

    if (epoch == 1 || rec.dev_jga > result.best_dev_jga) {
      result.best_dev_jga = rec.dev_jga;
      result.best_epoch = epoch;
      best.clear();
      for (const auto& p : model.params()) best.push_back(p.value);
      since_best = 0;
    } else if (!dev.empty() && cfg.patience > 0 && ++since_best >= cfg.patience) {
      result.early_stopped = true;
      break;
    }
  }

  if (!dev.empty()) {
    std::size_t i = 0;
    for (auto& p : model.params()) p.value = best[i++];
  }
  result.model = std::move(model);
  return result;
}

void write_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : history) out << r.to_json().dump() << '\n';
}

}  // namespace msp
