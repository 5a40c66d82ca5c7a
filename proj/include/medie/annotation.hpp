#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <tuple>

#include "medie/scheme.hpp"

namespace medie {

struct Document {
  std::string doc_id;
  std::u32string text;
  std::string section;
  std::string department;
  std::string record_id;

  std::size_t length() const { return text.size(); }
};

// A typed span [start, end) over the owning document's code points.
struct Entity {
  EntityTypeId type;
  std::int32_t start = 0;
  std::int32_t end = 0;

  bool operator==(const Entity&) const = default;
  std::strong_ordering operator<=>(const Entity& o) const {
    return std::tie(start, end, type) <=> std::tie(o.start, o.end, o.type);
  }
  std::int32_t length() const { return end - start; }
};

bool entities_overlap(const Entity& a, const Entity& b);

struct Relation {
  RelationTypeId type;
  Entity head;
  Entity tail;
  // Optional outcome qualifier (e.g. Improve/Worsen on Modify); metadata
  // only, never part of tuple matching.
  std::string qualifier;

  bool operator==(const Relation&) const = default;
  std::strong_ordering operator<=>(const Relation& o) const {
    if (auto c = std::tie(head, tail, type) <=> std::tie(o.head, o.tail, o.type); c != 0) return c;
    return qualifier.compare(o.qualifier) <=> 0;
  }
};

struct Attribute {
  AttributeTypeId type;
  Entity entity;

  bool operator==(const Attribute&) const = default;
  std::strong_ordering operator<=>(const Attribute& o) const {
    return std::tie(entity, type) <=> std::tie(o.entity, o.type);
  }
};

struct AnnotationSet {
  std::set<Entity> entities;
  std::set<Relation> relations;
  std::set<Attribute> attributes;

  bool empty() const { return entities.empty() && relations.empty() && attributes.empty(); }
  bool operator==(const AnnotationSet&) const = default;

  // Removes the entity together with every relation/attribute that refers
  // to it.
  void remove_entity(const Entity& e);
};

}  // namespace medie
