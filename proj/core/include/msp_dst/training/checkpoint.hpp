#pragma once

#include "msp_dst/model/model.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

namespace msp {

inline constexpr int kCheckpointVersion = 1;

// JSON container: version, schema (and its fingerprint), model config,
// vocabulary, class and value orderings, and every parameter tensor as
// row-major data with declared dimensions. `extra` is stored under
// "train_config".
nlohmann::json checkpoint_to_json(const Model<float>& model, const nlohmann::json& extra = {});

// Throws ConfigError on a malformed container, a version mismatch, or (when
// `expected` is given) a schema fingerprint mismatch.
Model<float> checkpoint_from_json(const nlohmann::json& j, const Schema* expected = nullptr);

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path, const nlohmann::json& extra = {});
Model<float> load_checkpoint(const std::filesystem::path& path, const Schema* expected = nullptr);

}  // namespace msp
