#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "medie/crf.hpp"
#include "medie/pipeline.hpp"
#include "medie/span_models.hpp"

namespace medie {

// Binary container, little-endian:
//   "MEDIECKPT" | u8 version | u32 header length | JSON header | arrays
// The header names the model kind, its configuration and the arrays that
// follow (name, dtype u32/f64, element count) in order. See
// docs/checkpoint.md.
inline constexpr std::uint8_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string save_crf(const CrfModel& model);
CrfModel load_crf(std::string_view bytes);

std::string save_attribute_model(const AttributeModel& model);
AttributeModel load_attribute_model(std::string_view bytes);

std::string save_relation_model(const RelationModel& model);
RelationModel load_relation_model(std::string_view bytes);

// Attribute and relation models in one file ("span" kind).
std::string save_span_models(const AttributeModel& attr, const RelationModel& rel);
std::pair<AttributeModel, RelationModel> load_span_models(std::string_view bytes);

// All three models plus the scheme source they were trained against.
std::string save_bundle(const PipelineBundle& bundle);
PipelineBundle load_bundle(std::string_view bytes);

// Returns the kind tag ("crf", "attribute", "relation", "span", "pipeline").
std::string checkpoint_kind(std::string_view bytes);

}  // namespace medie
