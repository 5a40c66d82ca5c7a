#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "medie/pipeline.hpp"

namespace medie {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON object with optional sections; missing keys keep their defaults and
// unknown keys are rejected.
//   {"entity": {TrainConfig fields}, "span": {...}, "features": {...},
//    "threshold": 0.5, "window": 150}
PipelineTrainConfig parse_train_config(std::string_view json_text, const std::string& origin = "<config>");
PipelineTrainConfig load_train_config(const std::filesystem::path& path);

// Full snapshot with every field spelled out, in the same layout.
std::string train_config_json(const PipelineTrainConfig& config);

}  // namespace medie
