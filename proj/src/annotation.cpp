#include "medie/annotation.hpp"

#include <algorithm>

namespace medie {

bool entities_overlap(const Entity& a, const Entity& b) {
  return std::max(a.start, b.start) < std::min(a.end, b.end);
}

void AnnotationSet::remove_entity(const Entity& e) {
  entities.erase(e);
  std::erase_if(relations, [&](const Relation& r) { return r.head == e || r.tail == e; });
  std::erase_if(attributes, [&](const Attribute& a) { return a.entity == e; });
}

}  // namespace medie
