#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace medie {

template <typename Tag>
struct TypeId {
  std::uint16_t value = 0;
  constexpr TypeId() = default;
  constexpr explicit TypeId(std::uint16_t v) : value(v) {}
  constexpr explicit TypeId(std::size_t v) : value(static_cast<std::uint16_t>(v)) {}
  constexpr explicit TypeId(int v) : value(static_cast<std::uint16_t>(v)) {}
  constexpr std::size_t index() const { return value; }
  constexpr auto operator<=>(const TypeId&) const = default;
};

using EntityTypeId = TypeId<struct EntityTypeTag>;
using RelationTypeId = TypeId<struct RelationTypeTag>;
using AttributeTypeId = TypeId<struct AttributeTypeTag>;

enum class Role : std::uint8_t { Status = 1, Information = 2, Intervention = 4 };

std::string_view to_string(Role r);

class SchemeError : public std::runtime_error {
 public:
  SchemeError(const std::string& origin, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Entity types are identified at subtype granularity; the super type is a
// label on each subtype.
struct EntityTypeInfo {
  std::string name;
  std::string file_name;
  std::string super_type;
  std::uint8_t roles = 0;
};

struct RelationTypeInfo {
  std::string name;
  std::string file_name;
  std::vector<bool> heads;  // indexed by EntityTypeId
  std::vector<bool> tails;
  std::vector<std::string> qualifiers;
};

struct AttributeTypeInfo {
  std::string name;
  std::string file_name;
  std::vector<bool> applicable;  // indexed by EntityTypeId
};

class Scheme {
 public:
  static Scheme parse(std::string_view text, const std::string& origin = "<scheme>");
  static Scheme load(const std::filesystem::path& path);

  std::size_t num_entity_types() const { return entities_.size(); }
  std::size_t num_relation_types() const { return relations_.size(); }
  std::size_t num_attribute_types() const { return attributes_.size(); }

  const EntityTypeInfo& entity(EntityTypeId id) const { return entities_.at(id.index()); }
  const RelationTypeInfo& relation(RelationTypeId id) const { return relations_.at(id.index()); }
  const AttributeTypeInfo& attribute(AttributeTypeId id) const { return attributes_.at(id.index()); }

  // Lookups accept the display name ("Self-Reported Abnormality"), the file
  // name ("Self-Reported-Abnormality"), or a "--" spelling of dashed names.
  std::optional<EntityTypeId> find_entity(std::string_view name) const;
  std::optional<RelationTypeId> find_relation(std::string_view name) const;
  std::optional<AttributeTypeId> find_attribute(std::string_view name) const;

  // Throwing variants (std::out_of_range).
  EntityTypeId entity_id(std::string_view name) const;
  RelationTypeId relation_id(std::string_view name) const;
  AttributeTypeId attribute_id(std::string_view name) const;

  // A super-type name expands to all its subtypes; a subtype name to itself.
  std::vector<EntityTypeId> expand(std::string_view name) const;
  std::vector<std::string> super_types() const;

  bool has_role(EntityTypeId type, Role role) const;
  bool relation_allows(RelationTypeId rel, EntityTypeId head, EntityTypeId tail) const;
  bool attribute_applies(AttributeTypeId attr, EntityTypeId type) const;
  // Relation types permitted for the ordered type pair, in scheme order.
  std::vector<RelationTypeId> allowed_relations(EntityTypeId head, EntityTypeId tail) const;

  const std::string& source_text() const { return source_; }

 private:
  std::vector<EntityTypeInfo> entities_;
  std::vector<RelationTypeInfo> relations_;
  std::vector<AttributeTypeInfo> attributes_;
  std::map<std::string, std::vector<EntityTypeId>, std::less<>> super_members_;
  std::vector<std::string> super_order_;
  std::map<std::string, std::size_t, std::less<>> entity_names_;
  std::map<std::string, std::size_t, std::less<>> relation_names_;
  std::map<std::string, std::size_t, std::less<>> attribute_names_;
  std::string source_;
};

// The bundled medical scheme (data/medical.scheme compiled in).
const Scheme& builtin_scheme();
std::string_view builtin_scheme_text();

// Default file-name derivation: spaces and dashes become '-'.
std::string file_name_for(std::string_view display_name);

}  // namespace medie
