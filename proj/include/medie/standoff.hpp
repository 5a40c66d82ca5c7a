#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "medie/annotation.hpp"
#include "medie/scheme.hpp"

namespace medie {

// Reports the 1-based line of the offending annotation line (0 when the
// error is not tied to one line).
class StandoffError : public std::runtime_error {
 public:
  StandoffError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct EntityGroup {
  std::string group_id;
  std::vector<Entity> members;
};

struct GroupRelation {
  RelationTypeId type;
  EntityGroup head;
  EntityGroup tail;
};

struct ParsedStandoff {
  AnnotationSet annotations;
  std::vector<EntityGroup> groups;
};

// Line kinds:
//   T<n>\t<Type> <start> <end>\t<surface>
//   R<n>\t<Type> Arg1:<id> Arg2:<id>       (ids may name T or G lines)
//   A<n>\t<Type> T<n>
//   A<n>\tOutcome R<n> <value>             (relation qualifier)
//   *\tGroup G<n> T<a> T<b> ...
// Relations on groups are expanded to entity-level relations.
ParsedStandoff parse_standoff(std::u32string_view text, std::string_view ann, const Scheme& scheme);

// Canonical form: T lines by (start, end, type), then R lines by (head, tail,
// type), then A lines by (entity, type), then qualifier lines; identifiers
// are renumbered from 1 in that order.
std::string serialize_standoff(const AnnotationSet& ann, std::u32string_view text, const Scheme& scheme);

std::set<Relation> expand_groups(std::span<const GroupRelation> relations);

// Internal corpus format: <dir>/manifest.jsonl plus <doc_id>.txt and
// <doc_id>.ann per document.
struct CorpusEntry {
  Document doc;
  AnnotationSet gold;
  std::string split;
};

struct Corpus {
  std::vector<CorpusEntry> entries;

  std::vector<const CorpusEntry*> with_split(std::string_view split) const;
  std::vector<std::string> record_ids() const;  // sorted, unique
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Corpus read_corpus(const std::filesystem::path& dir, const Scheme& scheme);
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus, const Scheme& scheme);

// Plain standoff directory (<name>.txt/<name>.ann pairs, no manifest); each
// document becomes its own record.
Corpus read_standoff_dir(const std::filesystem::path& dir, const Scheme& scheme);
void write_standoff_dir(const std::filesystem::path& dir, const Corpus& corpus, const Scheme& scheme);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

bool valid_doc_id(std::string_view id);

}  // namespace medie
