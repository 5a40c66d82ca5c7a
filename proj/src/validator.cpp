#include "medie/validator.hpp"

#include <vector>

namespace medie {

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Overlap:
      return "Overlap";
    case ViolationKind::RelationHeadType:
      return "RelationHeadType";
    case ViolationKind::RelationTailType:
      return "RelationTailType";
    case ViolationKind::AttributeApplicability:
      return "AttributeApplicability";
    case ViolationKind::SelfRelation:
      return "SelfRelation";
    case ViolationKind::DanglingReference:
      return "DanglingReference";
    case ViolationKind::SpanOutOfRange:
      return "SpanOutOfRange";
  }
  return "?";
}

std::string describe(const Entity& e, const Scheme& scheme) {
  std::string name = e.type.index() < scheme.num_entity_types() ? scheme.entity(e.type).name : "<unknown type>";
  return "(" + name + ", " + std::to_string(e.start) + ", " + std::to_string(e.end) + ")";
}

bool is_candidate_pair(const Entity& head, const Entity& tail, RelationTypeId type, const Scheme& scheme) {
  return head != tail && scheme.relation_allows(type, head.type, tail.type);
}

std::vector<Violation> validate(const AnnotationSet& ann, std::size_t text_length, const Scheme& scheme) {
  std::vector<Violation> out;
  const auto length = static_cast<std::int64_t>(text_length);
  auto known_type = [&](const Entity& e) { return e.type.index() < scheme.num_entity_types(); };

  for (const auto& e : ann.entities) {
    if (e.start < 0 || e.end <= e.start || e.end > length || !known_type(e)) {
      out.push_back({ViolationKind::SpanOutOfRange, {e}, std::nullopt, std::nullopt,
                     "entity " + describe(e, scheme) + " is not a valid span of a text of length " +
                         std::to_string(text_length)});
    }
  }

  // Entities are ordered by start, so each one only needs checking against
  // the following entities that begin before it ends.
  std::vector<Entity> sorted(ann.entities.begin(), ann.entities.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size() && sorted[j].start < sorted[i].end; ++j) {
      if (entities_overlap(sorted[i], sorted[j])) {
        out.push_back({ViolationKind::Overlap, {sorted[i], sorted[j]}, std::nullopt, std::nullopt,
                       "entities " + describe(sorted[i], scheme) + " and " + describe(sorted[j], scheme) + " overlap"});
      }
    }
  }

  for (const auto& r : ann.relations) {
    const std::string rel_name =
        r.type.index() < scheme.num_relation_types() ? scheme.relation(r.type).name : "<unknown relation>";
    auto add = [&](ViolationKind kind, std::string message) {
      out.push_back({kind, {}, r, std::nullopt, std::move(message)});
    };
    if (!ann.entities.count(r.head)) {
      add(ViolationKind::DanglingReference, rel_name + " head " + describe(r.head, scheme) + " is not an annotated entity");
    }
    if (!ann.entities.count(r.tail)) {
      add(ViolationKind::DanglingReference, rel_name + " tail " + describe(r.tail, scheme) + " is not an annotated entity");
    }
    if (r.head == r.tail) {
      add(ViolationKind::SelfRelation, rel_name + " relates " + describe(r.head, scheme) + " to itself");
    }
    if (r.type.index() >= scheme.num_relation_types()) {
      add(ViolationKind::RelationHeadType, "relation type id " + std::to_string(r.type.index()) + " not in scheme");
      continue;
    }
    const auto& info = scheme.relation(r.type);
    if (!known_type(r.head) || !info.heads[r.head.type.index()]) {
      add(ViolationKind::RelationHeadType, rel_name + " does not admit head " + describe(r.head, scheme));
    }
    if (!known_type(r.tail) || !info.tails[r.tail.type.index()]) {
      add(ViolationKind::RelationTailType, rel_name + " does not admit tail " + describe(r.tail, scheme));
    }
  }

  for (const auto& a : ann.attributes) {
    const std::string attr_name =
        a.type.index() < scheme.num_attribute_types() ? scheme.attribute(a.type).name : "<unknown attribute>";
    if (!ann.entities.count(a.entity)) {
      out.push_back({ViolationKind::DanglingReference, {}, std::nullopt, a,
                     attr_name + " refers to " + describe(a.entity, scheme) + " which is not an annotated entity"});
    }
    if (a.type.index() >= scheme.num_attribute_types() || !known_type(a.entity) ||
        !scheme.attribute_applies(a.type, a.entity.type)) {
      out.push_back({ViolationKind::AttributeApplicability, {}, std::nullopt, a,
                     attr_name + " is not applicable to " + describe(a.entity, scheme)});
    }
  }
  return out;
}

}  // namespace medie
