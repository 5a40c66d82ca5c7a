#include "medie/train_config.hpp"

#include "json.hpp"
#include "medie/standoff.hpp"

namespace medie {

namespace {

using nlohmann::ordered_json;

template <typename T>
void take(const ordered_json& obj, const char* key, T& field) {
  if (auto it = obj.find(key); it != obj.end()) field = it->get<T>();
}

void reject_unknown(const ordered_json& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

TrainConfig train_from(const ordered_json& j, TrainConfig c, const std::string& where) {
  reject_unknown(j,
                 {"learning_rate", "batch_size", "max_epochs", "grad_clip_l2", "l2_penalty", "patience", "beta1", "beta2",
                  "epsilon"},
                 where);
  take(j, "learning_rate", c.learning_rate);
  take(j, "batch_size", c.batch_size);
  take(j, "max_epochs", c.max_epochs);
  take(j, "grad_clip_l2", c.grad_clip_l2);
  take(j, "l2_penalty", c.l2_penalty);
  take(j, "patience", c.patience);
  take(j, "beta1", c.beta1);
  take(j, "beta2", c.beta2);
  take(j, "epsilon", c.epsilon);
  return c;
}

ordered_json train_to(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"max_epochs", c.max_epochs},
          {"grad_clip_l2", c.grad_clip_l2},   {"l2_penalty", c.l2_penalty}, {"patience", c.patience},
          {"beta1", c.beta1},                 {"beta2", c.beta2},           {"epsilon", c.epsilon}};
}

}  // namespace

PipelineTrainConfig parse_train_config(std::string_view json_text, const std::string& origin) {
  PipelineTrainConfig c;
  try {
    const auto j = ordered_json::parse(json_text);
    reject_unknown(j, {"entity", "span", "features", "threshold", "window"}, origin);
    if (j.contains("entity")) c.entity = train_from(j["entity"], c.entity, origin + ": entity");
    if (j.contains("span")) c.span = train_from(j["span"], c.span, origin + ": span");
    if (j.contains("features")) {
      const auto& f = j["features"];
      reject_unknown(f, {"window", "hash_dim", "unigrams", "bigrams", "char_classes"}, origin + ": features");
      take(f, "window", c.features.window);
      take(f, "hash_dim", c.features.hash_dim);
      take(f, "unigrams", c.features.unigrams);
      take(f, "bigrams", c.features.bigrams);
      take(f, "char_classes", c.features.char_classes);
    }
    take(j, "threshold", c.threshold);
    take(j, "window", c.window);
    c.entity.check();
    c.span.check();
    c.features.check();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!(c.threshold > 0 && c.threshold < 1)) throw ConfigError(origin + ": threshold must lie in (0, 1)");
  if (c.window < 0) throw ConfigError(origin + ": window must be non-negative");
  return c;
}

PipelineTrainConfig load_train_config(const std::filesystem::path& path) {
  return parse_train_config(read_file(path), path.string());
}

std::string train_config_json(const PipelineTrainConfig& c) {
  ordered_json j;
  j["entity"] = train_to(c.entity);
  j["span"] = train_to(c.span);
  j["features"] = {{"window", c.features.window},
                   {"hash_dim", c.features.hash_dim},
                   {"unigrams", c.features.unigrams},
                   {"bigrams", c.features.bigrams},
                   {"char_classes", c.features.char_classes}};
  j["threshold"] = c.threshold;
  j["window"] = c.window;
  return j.dump(2);
}

}  // namespace medie
