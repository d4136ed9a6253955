#include "msp_dst/training/checkpoint.hpp"

#include "msp_dst/common/error.hpp"

#include <fstream>

namespace msp {

nlohmann::json checkpoint_to_json(const Model<float>& model, const nlohmann::json& extra) {
  const Schema& schema = model.schema();
  const Strategy st = model.strategy();
  nlohmann::json classes = nlohmann::json::array();
  for (int c = 0; c < num_type_classes(st); ++c) classes.push_back(to_string(type_from_class(c, st)));
  nlohmann::json values = nlohmann::json::object();
  for (const auto& s : schema.slots()) {
    if (s.categorical()) values[s.name] = s.ontology;
  }
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& p : model.params()) {
    std::vector<float> data(p.value.data(), p.value.data() + p.value.size());
    tensors.push_back({{"name", p.name},
                       {"rows", p.value.rows()},
                       {"cols", p.value.cols()},
                       {"frozen", p.frozen},
                       {"data", std::move(data)}});
  }
  return {{"format", "msp-dst-checkpoint"},
          {"version", kCheckpointVersion},
          {"schema_fingerprint", schema.fingerprint()},
          {"schema", schema.to_json()},
          {"config", model.config().to_json()},
          {"train_config", extra},
          {"vocabulary", model.vocab().tokens()},
          {"type_classes", classes},
          {"value_orderings", values},
          {"parameters", tensors}};
}

Model<float> checkpoint_from_json(const nlohmann::json& j, const Schema* expected) {
  try {
    if (j.value("format", "") != "msp-dst-checkpoint") throw ConfigError("not a checkpoint file");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ConfigError("unsupported checkpoint version " + j.at("version").dump());
    }
    Schema schema = Schema::from_json(j.at("schema"));
    const std::string fp = j.at("schema_fingerprint").get<std::string>();
    if (fp != schema.fingerprint()) throw ConfigError("checkpoint schema is inconsistent with its fingerprint");
    if (expected && expected->fingerprint() != fp) {
      throw ConfigError("checkpoint schema fingerprint " + fp + " does not match schema " + expected->fingerprint());
    }
    const ModelConfig cfg = ModelConfig::from_json(j.at("config"));
    Model<float> model(cfg, schema, Vocabulary(j.at("vocabulary").get<std::vector<std::string>>()));
    const auto& tensors = j.at("parameters");
    if (tensors.size() != model.params().size()) throw ConfigError("checkpoint parameter count mismatch");
    for (const auto& t : tensors) {
      auto& p = model.params()[model.params().handle(t.at("name").get<std::string>())];
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      if (rows != p.value.rows() || cols != p.value.cols()) throw ConfigError("shape mismatch for " + p.name);
      const auto data = t.at("data").get<std::vector<float>>();
      if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ConfigError("data size mismatch for " + p.name);
      std::copy(data.begin(), data.end(), p.value.data());
    }
    model.refresh_constants();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path, const nlohmann::json& extra) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(model, extra).dump() << '\n';
}

Model<float> load_checkpoint(const std::filesystem::path& path, const Schema* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j, expected);
}

}  // namespace msp
