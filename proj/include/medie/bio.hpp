#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "medie/annotation.hpp"
#include "medie/scheme.hpp"

namespace medie {

using Tag = std::uint16_t;
using TagSequence = std::vector<Tag>;

// Tag layout over n entity types: O = 0, B-k = 1 + 2k, I-k = 2 + 2k.
class TagSet {
 public:
  explicit TagSet(std::size_t num_entity_types) : num_types_(num_entity_types) {}

  std::size_t size() const { return 2 * num_types_ + 1; }
  std::size_t num_entity_types() const { return num_types_; }

  static constexpr Tag outside() { return 0; }
  static Tag begin(EntityTypeId t) { return static_cast<Tag>(1 + 2 * t.index()); }
  static Tag inside(EntityTypeId t) { return static_cast<Tag>(2 + 2 * t.index()); }
  static bool is_begin(Tag t) { return t != 0 && t % 2 == 1; }
  static bool is_inside(Tag t) { return t != 0 && t % 2 == 0; }
  static EntityTypeId type_of(Tag t) { return EntityTypeId(static_cast<std::size_t>((t - 1) / 2)); }

  std::string name(Tag t, const Scheme& scheme) const;
  Tag parse(std::string_view name, const Scheme& scheme) const;

 private:
  std::size_t num_types_;
};

class BioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws BioError on overlapping entities or spans outside [0, length].
TagSequence bio_encode(const std::set<Entity>& entities, std::size_t length);

// Total over any tag sequence. An I-k tag not preceded by B-k/I-k opens a
// new entity, as does any B tag.
std::set<Entity> bio_decode(std::span<const Tag> tags);

// Column dump: one "<char>\t<tag>" line per character, blank line between
// sequences. Whitespace characters are written as their escapes (\n, \t,
// \s for space) so every line keeps two columns.
void write_bio_columns(std::ostream& out, std::u32string_view text, std::span<const Tag> tags, const Scheme& scheme);

struct TaggedSequence {
  std::u32string text;
  TagSequence tags;
};
std::vector<TaggedSequence> read_bio_columns(std::istream& in, const Scheme& scheme);

}  // namespace medie
