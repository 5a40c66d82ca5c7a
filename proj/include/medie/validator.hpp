#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medie/annotation.hpp"
#include "medie/scheme.hpp"

namespace medie {

enum class ViolationKind : std::uint8_t {
  Overlap,
  RelationHeadType,
  RelationTailType,
  AttributeApplicability,
  SelfRelation,
  DanglingReference,
  SpanOutOfRange,
};

std::string_view to_string(ViolationKind kind);

// Overlap and SpanOutOfRange populate `entities`; relation checks populate
// `relation`; attribute checks populate `attribute`. A DanglingReference
// carries whichever of relation/attribute holds the missing entity.
struct Violation {
  ViolationKind kind;
  std::vector<Entity> entities;
  std::optional<Relation> relation;
  std::optional<Attribute> attribute;
  std::string message;
};

// Violations are data, not failures. Output order depends only on the set
// contents: entity checks, then relations, then attributes, each in set order.
std::vector<Violation> validate(const AnnotationSet& ann, std::size_t text_length, const Scheme& scheme);

bool is_candidate_pair(const Entity& head, const Entity& tail, RelationTypeId type, const Scheme& scheme);

std::string describe(const Entity& e, const Scheme& scheme);

}  // namespace medie
