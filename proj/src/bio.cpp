#include "medie/bio.hpp"

#include <istream>
#include <ostream>

#include "medie/text.hpp"

namespace medie {

std::string TagSet::name(Tag t, const Scheme& scheme) const {
  if (t == outside()) return "O";
  if (t >= size()) throw BioError("tag index " + std::to_string(t) + " out of range");
  return (is_begin(t) ? "B-" : "I-") + scheme.entity(type_of(t)).file_name;
}

Tag TagSet::parse(std::string_view name, const Scheme& scheme) const {
  if (name == "O") return outside();
  if (name.size() > 2 && (name.substr(0, 2) == "B-" || name.substr(0, 2) == "I-")) {
    if (auto type = scheme.find_entity(name.substr(2)); type && type->index() < num_types_) {
      return name[0] == 'B' ? begin(*type) : inside(*type);
    }
  }
  throw BioError("unknown tag '" + std::string(name) + "'");
}

TagSequence bio_encode(const std::set<Entity>& entities, std::size_t length) {
  TagSequence tags(length, TagSet::outside());
  std::int32_t last_end = 0;
  for (const auto& e : entities) {
    if (e.start < 0 || e.end <= e.start || static_cast<std::size_t>(e.end) > length) {
      throw BioError("entity span [" + std::to_string(e.start) + ", " + std::to_string(e.end) +
                     ") out of range for length " + std::to_string(length));
    }
    // Set order is by start, so an overlap always shows up against the
    // furthest end seen so far.
    if (e.start < last_end) {
      throw BioError("overlapping entities at [" + std::to_string(e.start) + ", " + std::to_string(e.end) + ")");
    }
    tags[e.start] = TagSet::begin(e.type);
    for (auto i = e.start + 1; i < e.end; ++i) tags[i] = TagSet::inside(e.type);
    last_end = e.end;
  }
  return tags;
}

std::set<Entity> bio_decode(std::span<const Tag> tags) {
  std::set<Entity> out;
  bool open = false;
  Entity current;
  auto close = [&](std::int32_t end) {
    if (open) {
      current.end = end;
      out.insert(current);
      open = false;
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const Tag t = tags[i];
    const auto pos = static_cast<std::int32_t>(i);
    if (t == TagSet::outside()) {
      close(pos);
    } else if (TagSet::is_inside(t) && open && current.type == TagSet::type_of(t)) {
      continue;
    } else {
      close(pos);
      current = Entity{TagSet::type_of(t), pos, pos + 1};
      open = true;
    }
  }
  close(static_cast<std::int32_t>(tags.size()));
  return out;
}

namespace {

std::string escape_char(char32_t c) {
  switch (c) {
    case U'\n':
      return "\\n";
    case U'\t':
      return "\\t";
    case U' ':
      return "\\s";
    case U'\r':
      return "\\r";
    case U'\\':
      return "\\\\";
    default:
      return utf8_encode(c);
  }
}

char32_t unescape_char(std::string_view s) {
  if (s == "\\n") return U'\n';
  if (s == "\\t") return U'\t';
  if (s == "\\s") return U' ';
  if (s == "\\r") return U'\r';
  if (s == "\\\\") return U'\\';
  auto chars = utf8_decode(s);
  if (chars.size() != 1) throw BioError("column line must hold exactly one character, got '" + std::string(s) + "'");
  return chars[0];
}

}  // namespace

void write_bio_columns(std::ostream& out, std::u32string_view text, std::span<const Tag> tags, const Scheme& scheme) {
  if (text.size() != tags.size()) throw BioError("text and tag sequence lengths differ");
  TagSet tagset(scheme.num_entity_types());
  for (std::size_t i = 0; i < text.size(); ++i) {
    out << escape_char(text[i]) << '\t' << tagset.name(tags[i], scheme) << '\n';
  }
  out << '\n';
}

std::vector<TaggedSequence> read_bio_columns(std::istream& in, const Scheme& scheme) {
  TagSet tagset(scheme.num_entity_types());
  std::vector<TaggedSequence> out;
  TaggedSequence current;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.text.empty()) out.push_back(std::move(current));
    current = {};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw BioError("line " + std::to_string(line_no) + ": expected '<char>\\t<tag>'");
    try {
      current.text.push_back(unescape_char(std::string_view(line).substr(0, tab)));
      current.tags.push_back(tagset.parse(std::string_view(line).substr(tab + 1), scheme));
    } catch (const std::exception& e) {
      throw BioError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  flush();
  return out;
}

}  // namespace medie
