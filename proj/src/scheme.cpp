#include "medie/scheme.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "medie/text.hpp"

namespace medie {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Status:
      return "Status";
    case Role::Information:
      return "Information";
    case Role::Intervention:
      return "Intervention";
  }
  return "?";
}

SchemeError::SchemeError(const std::string& origin, std::size_t line, const std::string& what)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::string file_name_for(std::string_view display_name) {
  std::string out;
  const std::u32string chars = utf8_decode(display_name);
  for (char32_t c : chars) {
    const bool dash = c == U' ' || c == U'-' || c == U'\u2013' || c == U'\u2014' || c == U'_';
    if (dash) {
      if (out.empty() || out.back() != '-') out.push_back('-');
    } else {
      out += utf8_encode(c);
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

namespace {

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  for (const auto& part : split(s, sep)) {
    auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

template <typename Map>
std::optional<std::size_t> lookup(const Map& names, std::string_view name) {
  if (auto it = names.find(name); it != names.end()) return it->second;
  if (auto it = names.find(file_name_for(name)); it != names.end()) return it->second;
  return std::nullopt;
}

}  // namespace

Scheme Scheme::parse(std::string_view text, const std::string& origin) {
  Scheme s;
  s.source_ = std::string(text);
  std::size_t line_no = 0;

  auto fail = [&](const std::string& what) -> SchemeError { return {origin, line_no, what}; };

  auto register_name = [&](auto& names, const std::string& key, std::size_t index) {
    auto [it, inserted] = names.emplace(key, index);
    if (!inserted && it->second != index) throw fail("duplicate name '" + key + "'");
  };

  auto resolve_types = [&](std::string_view list) {
    std::vector<bool> mask(s.entities_.size(), false);
    for (const auto& name : split_list(list, ',')) {
      auto ids = s.expand(name);
      if (ids.empty()) throw fail("unknown entity type '" + name + "'");
      for (auto id : ids) mask[id.index()] = true;
    }
    return mask;
  };

  bool types_closed = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    std::string_view line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;

    auto space = line.find(' ');
    if (space == std::string_view::npos) throw fail("expected '<keyword> <declaration>'");
    std::string_view keyword = line.substr(0, space);
    std::string_view rest = trim(line.substr(space + 1));

    if (keyword == "alias") {
      auto eq = rest.find('=');
      if (eq == std::string_view::npos) throw fail("alias needs '='");
      std::string name(trim(rest.substr(0, eq)));
      std::string file(trim(rest.substr(eq + 1)));
      if (file.empty() || file.find_first_of(" \t") != std::string::npos) {
        throw fail("alias file name must be a non-empty token");
      }
      if (auto e = s.entity_names_.find(name); e != s.entity_names_.end()) {
        s.entities_[e->second].file_name = file;
        register_name(s.entity_names_, file, e->second);
      } else if (auto r = s.relation_names_.find(name); r != s.relation_names_.end()) {
        s.relations_[r->second].file_name = file;
        register_name(s.relation_names_, file, r->second);
      } else if (auto a = s.attribute_names_.find(name); a != s.attribute_names_.end()) {
        s.attributes_[a->second].file_name = file;
        register_name(s.attribute_names_, file, a->second);
      } else {
        throw fail("alias for unknown type '" + name + "'");
      }
      continue;
    }

    auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw fail("expected ':' in declaration");
    std::string head(trim(rest.substr(0, colon)));
    std::string_view body = trim(rest.substr(colon + 1));
    if (head.empty()) throw fail("empty name");

    if (keyword == "entity") {
      if (types_closed) throw fail("entity declarations must precede roles, relations and attributes");
      if (s.super_members_.count(head)) throw fail("duplicate super type '" + head + "'");
      auto subs = split_list(body, '|');
      if (subs.empty()) throw fail("super type '" + head + "' has no subtypes");
      auto& members = s.super_members_[head];
      s.super_order_.push_back(head);
      for (const auto& sub : subs) {
        if (s.entity_names_.count(sub)) throw fail("duplicate subtype '" + sub + "'");
        const std::size_t index = s.entities_.size();
        s.entities_.push_back({sub, file_name_for(sub), head, 0});
        register_name(s.entity_names_, sub, index);
        register_name(s.entity_names_, s.entities_.back().file_name, index);
        members.push_back(EntityTypeId(index));
      }
    } else if (keyword == "role") {
      types_closed = true;
      Role role;
      if (head == "Status") {
        role = Role::Status;
      } else if (head == "Information") {
        role = Role::Information;
      } else if (head == "Intervention") {
        role = Role::Intervention;
      } else {
        throw fail("unknown role '" + head + "'");
      }
      auto mask = resolve_types(body);
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) s.entities_[i].roles |= static_cast<std::uint8_t>(role);
      }
    } else if (keyword == "relation") {
      types_closed = true;
      if (s.relation_names_.count(head)) throw fail("duplicate relation '" + head + "'");
      auto arrow = body.find("->");
      if (arrow == std::string_view::npos) throw fail("relation needs '<heads> -> <tails>'");
      RelationTypeInfo info{head, file_name_for(head), resolve_types(body.substr(0, arrow)),
                            resolve_types(body.substr(arrow + 2)), {}};
      const std::size_t index = s.relations_.size();
      s.relations_.push_back(std::move(info));
      register_name(s.relation_names_, head, index);
      register_name(s.relation_names_, s.relations_.back().file_name, index);
    } else if (keyword == "qualifier") {
      auto it = s.relation_names_.find(head);
      if (it == s.relation_names_.end()) throw fail("qualifier for unknown relation '" + head + "'");
      auto values = split_list(body, '|');
      if (values.empty()) throw fail("qualifier list is empty");
      s.relations_[it->second].qualifiers = std::move(values);
    } else if (keyword == "attribute") {
      types_closed = true;
      if (s.attribute_names_.count(head)) throw fail("duplicate attribute '" + head + "'");
      const std::size_t index = s.attributes_.size();
      s.attributes_.push_back({head, file_name_for(head), resolve_types(body)});
      register_name(s.attribute_names_, head, index);
      register_name(s.attribute_names_, s.attributes_.back().file_name, index);
    } else {
      throw fail("unknown keyword '" + std::string(keyword) + "'");
    }
  }
  if (s.entities_.empty()) throw SchemeError(origin, line_no, "scheme declares no entity types");
  return s;
}

Scheme Scheme::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemeError(path.string(), 0, "cannot open scheme file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<EntityTypeId> Scheme::find_entity(std::string_view name) const {
  if (auto i = lookup(entity_names_, name)) return EntityTypeId(*i);
  return std::nullopt;
}

std::optional<RelationTypeId> Scheme::find_relation(std::string_view name) const {
  if (auto i = lookup(relation_names_, name)) return RelationTypeId(*i);
  return std::nullopt;
}

std::optional<AttributeTypeId> Scheme::find_attribute(std::string_view name) const {
  if (auto i = lookup(attribute_names_, name)) return AttributeTypeId(*i);
  return std::nullopt;
}

EntityTypeId Scheme::entity_id(std::string_view name) const {
  if (auto id = find_entity(name)) return *id;
  throw std::out_of_range("unknown entity type '" + std::string(name) + "'");
}

RelationTypeId Scheme::relation_id(std::string_view name) const {
  if (auto id = find_relation(name)) return *id;
  throw std::out_of_range("unknown relation type '" + std::string(name) + "'");
}

AttributeTypeId Scheme::attribute_id(std::string_view name) const {
  if (auto id = find_attribute(name)) return *id;
  throw std::out_of_range("unknown attribute type '" + std::string(name) + "'");
}

std::vector<EntityTypeId> Scheme::expand(std::string_view name) const {
  if (auto it = super_members_.find(name); it != super_members_.end()) return it->second;
  for (const auto& [super, members] : super_members_) {
    if (file_name_for(super) == file_name_for(name)) return members;
  }
  if (auto id = find_entity(name)) return {*id};
  return {};
}

std::vector<std::string> Scheme::super_types() const { return super_order_; }

bool Scheme::has_role(EntityTypeId type, Role role) const {
  return (entity(type).roles & static_cast<std::uint8_t>(role)) != 0;
}

bool Scheme::relation_allows(RelationTypeId rel, EntityTypeId head, EntityTypeId tail) const {
  const auto& r = relation(rel);
  return head.index() < r.heads.size() && tail.index() < r.tails.size() && r.heads[head.index()] &&
         r.tails[tail.index()];
}

bool Scheme::attribute_applies(AttributeTypeId attr, EntityTypeId type) const {
  const auto& a = attribute(attr);
  return type.index() < a.applicable.size() && a.applicable[type.index()];
}

std::vector<RelationTypeId> Scheme::allowed_relations(EntityTypeId head, EntityTypeId tail) const {
  std::vector<RelationTypeId> out;
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    if (relation_allows(RelationTypeId(r), head, tail)) out.push_back(RelationTypeId(r));
  }
  return out;
}

const Scheme& builtin_scheme() {
  static const Scheme scheme = Scheme::parse(builtin_scheme_text(), "<builtin medical.scheme>");
  return scheme;
}

}  // namespace medie
