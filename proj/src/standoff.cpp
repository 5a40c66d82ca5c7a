#include "medie/standoff.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "medie/text.hpp"

namespace medie {

StandoffError::StandoffError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

constexpr std::string_view kOutcome = "Outcome";

std::int64_t parse_int(std::string_view s, std::size_t line, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw StandoffError(line, std::string("malformed ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

struct PendingRelation {
  std::size_t line;
  std::string id;
  RelationTypeId type;
  std::string head;
  std::string tail;
};

struct PendingQualifier {
  std::size_t line;
  std::string relation_id;
  std::string value;
};

}  // namespace

ParsedStandoff parse_standoff(std::u32string_view text, std::string_view ann, const Scheme& scheme) {
  ParsedStandoff out;
  std::map<std::string, Entity, std::less<>> entity_ids;
  std::map<std::string, std::size_t, std::less<>> group_ids;
  std::set<std::string, std::less<>> seen_ids;
  std::vector<PendingRelation> relations;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> groups_raw;
  std::vector<std::tuple<std::size_t, AttributeTypeId, std::string>> attrs_raw;
  std::vector<PendingQualifier> qualifiers;

  auto claim_id = [&](const std::string& id, std::size_t line) {
    if (!seen_ids.insert(id).second) throw StandoffError(line, "duplicate identifier '" + id + "'");
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < ann.size()) {
    auto nl = ann.find('\n', pos);
    std::string_view line = ann.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? ann.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    const auto fields = split(line, '\t');
    const std::string& id = fields[0];
    if (id.empty()) throw StandoffError(line_no, "missing identifier");
    const char kind = id[0];
    if (kind == '#') continue;  // annotator notes carry no structure
    if (fields.size() < 2) throw StandoffError(line_no, "malformed line: expected a tab after the identifier");
    const auto toks = tokens(fields[1]);
    if (toks.empty()) throw StandoffError(line_no, "malformed line: empty annotation field");

    switch (kind) {
      case 'T': {
        claim_id(id, line_no);
        if (fields.size() < 3) throw StandoffError(line_no, "malformed T line: expected '<Type> <start> <end>\\t<surface>'");
        if (toks.size() != 3) {
          throw StandoffError(line_no, "malformed T line: expected '<Type> <start> <end>' (discontinuous spans unsupported)");
        }
        auto type = scheme.find_entity(toks[0]);
        if (!type) throw StandoffError(line_no, "entity type '" + std::string(toks[0]) + "' not in scheme");
        auto start = parse_int(toks[1], line_no, "start offset");
        auto end = parse_int(toks[2], line_no, "end offset");
        if (start < 0 || end <= start || end > static_cast<std::int64_t>(text.size())) {
          throw StandoffError(line_no, "offset out of range: [" + std::string(toks[1]) + ", " + std::string(toks[2]) +
                                           ") for text of length " + std::to_string(text.size()));
        }
        Entity e{*type, static_cast<std::int32_t>(start), static_cast<std::int32_t>(end)};
        entity_ids.emplace(id, e);
        out.annotations.entities.insert(e);
        break;
      }
      case 'R': {
        claim_id(id, line_no);
        if (toks.size() != 3) throw StandoffError(line_no, "malformed R line: expected '<Type> Arg1:<id> Arg2:<id>'");
        auto type = scheme.find_relation(toks[0]);
        if (!type) throw StandoffError(line_no, "relation type '" + std::string(toks[0]) + "' not in scheme");
        auto arg = [&](std::string_view tok) {
          auto colon = tok.find(':');
          if (colon == std::string_view::npos || colon + 1 == tok.size()) {
            throw StandoffError(line_no, "malformed relation argument '" + std::string(tok) + "'");
          }
          return std::string(tok.substr(colon + 1));
        };
        relations.push_back({line_no, id, *type, arg(toks[1]), arg(toks[2])});
        break;
      }
      case 'A': {
        claim_id(id, line_no);
        if (toks[0] == kOutcome) {
          if (toks.size() != 3) throw StandoffError(line_no, "malformed Outcome line: expected 'Outcome R<n> <value>'");
          qualifiers.push_back({line_no, std::string(toks[1]), std::string(toks[2])});
          break;
        }
        if (toks.size() != 2) throw StandoffError(line_no, "malformed A line: expected '<Type> T<n>'");
        auto type = scheme.find_attribute(toks[0]);
        if (!type) throw StandoffError(line_no, "attribute type '" + std::string(toks[0]) + "' not in scheme");
        attrs_raw.emplace_back(line_no, *type, std::string(toks[1]));
        break;
      }
      case '*': {
        if (toks.size() < 3 || toks[0] != "Group") {
          throw StandoffError(line_no, "malformed group line: expected 'Group G<n> T<a> ...'");
        }
        std::string gid(toks[1]);
        claim_id(gid, line_no);
        std::vector<std::string> members(toks.begin() + 2, toks.end());
        groups_raw.emplace_back(line_no, std::move(members));
        group_ids.emplace(gid, groups_raw.size() - 1);
        out.groups.push_back({gid, {}});
        break;
      }
      default:
        throw StandoffError(line_no, "unsupported line kind '" + std::string(1, kind) + "'");
    }
  }

  auto resolve_entity = [&](const std::string& ref, std::size_t line) {
    auto it = entity_ids.find(ref);
    if (it == entity_ids.end()) throw StandoffError(line, "unresolvable reference '" + ref + "'");
    return it->second;
  };

  for (std::size_t g = 0; g < groups_raw.size(); ++g) {
    auto& [line, members] = groups_raw[g];
    std::set<Entity> uniq;
    for (const auto& m : members) uniq.insert(resolve_entity(m, line));
    out.groups[g].members.assign(uniq.begin(), uniq.end());
  }

  auto resolve_group = [&](const std::string& ref, std::size_t line) -> EntityGroup {
    if (auto g = group_ids.find(ref); g != group_ids.end()) return out.groups[g->second];
    return {ref, {resolve_entity(ref, line)}};
  };

  std::map<std::string, std::vector<Relation>, std::less<>> by_relation_id;
  for (const auto& r : relations) {
    GroupRelation gr{r.type, resolve_group(r.head, r.line), resolve_group(r.tail, r.line)};
    auto expanded = expand_groups(std::span<const GroupRelation>(&gr, 1));
    auto& list = by_relation_id[r.id];
    list.assign(expanded.begin(), expanded.end());
  }
  for (const auto& q : qualifiers) {
    auto it = by_relation_id.find(q.relation_id);
    if (it == by_relation_id.end()) throw StandoffError(q.line, "unresolvable reference '" + q.relation_id + "'");
    for (auto& rel : it->second) {
      const auto& allowed = scheme.relation(rel.type).qualifiers;
      if (std::find(allowed.begin(), allowed.end(), q.value) == allowed.end()) {
        throw StandoffError(q.line, "qualifier '" + q.value + "' not defined for relation '" +
                                        scheme.relation(rel.type).name + "'");
      }
      rel.qualifier = q.value;
    }
  }
  for (auto& [id, list] : by_relation_id) {
    out.annotations.relations.insert(list.begin(), list.end());
  }
  for (const auto& [line, type, ref] : attrs_raw) {
    out.annotations.attributes.insert({type, resolve_entity(ref, line)});
  }
  return out;
}

std::string serialize_standoff(const AnnotationSet& ann, std::u32string_view text, const Scheme& scheme) {
  std::string out;
  std::map<Entity, std::string> ids;
  std::size_t n = 0;
  for (const auto& e : ann.entities) {
    std::string id = "T" + std::to_string(++n);
    ids.emplace(e, id);
    std::u32string surface;
    if (e.start >= 0 && e.end <= static_cast<std::int32_t>(text.size()) && e.start < e.end) {
      surface = text.substr(e.start, e.end - e.start);
    }
    for (auto& c : surface) {
      if (c == U'\n' || c == U'\r' || c == U'\t') c = U' ';
    }
    out += id + '\t' + scheme.entity(e.type).file_name + ' ' + std::to_string(e.start) + ' ' +
           std::to_string(e.end) + '\t' + utf8_encode(surface) + '\n';
  }
  auto ref = [&](const Entity& e) -> const std::string& {
    auto it = ids.find(e);
    if (it == ids.end()) throw std::invalid_argument("serialize_standoff: relation or attribute references a missing entity");
    return it->second;
  };
  n = 0;
  std::vector<std::pair<std::string, const Relation*>> qualified;
  for (const auto& r : ann.relations) {
    std::string id = "R" + std::to_string(++n);
    out += id + '\t' + scheme.relation(r.type).file_name + " Arg1:" + ref(r.head) + " Arg2:" + ref(r.tail) + '\n';
    if (!r.qualifier.empty()) qualified.emplace_back(id, &r);
  }
  n = 0;
  for (const auto& a : ann.attributes) {
    out += "A" + std::to_string(++n) + '\t' + scheme.attribute(a.type).file_name + ' ' + ref(a.entity) + '\n';
  }
  for (const auto& [rid, r] : qualified) {
    out += "A" + std::to_string(++n) + '\t' + std::string(kOutcome) + ' ' + rid + ' ' + r->qualifier + '\n';
  }
  return out;
}

std::set<Relation> expand_groups(std::span<const GroupRelation> relations) {
  std::set<Relation> out;
  for (const auto& gr : relations) {
    for (const auto& h : gr.head.members) {
      for (const auto& t : gr.tail.members) {
        if (h == t) continue;
        out.insert({gr.type, h, t, {}});
      }
    }
  }
  return out;
}

std::vector<const CorpusEntry*> Corpus::with_split(std::string_view split) const {
  std::vector<const CorpusEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

std::vector<std::string> Corpus::record_ids() const {
  std::set<std::string> ids;
  for (const auto& e : entries) ids.insert(e.doc.record_id);
  return {ids.begin(), ids.end()};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CorpusError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw CorpusError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

bool valid_doc_id(std::string_view id) {
  if (id.empty() || id == "." || id == ".." || id == "manifest") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

namespace {

CorpusEntry load_entry(const std::filesystem::path& dir, Document doc, std::string split, const Scheme& scheme) {
  const auto txt = dir / (doc.doc_id + ".txt");
  const auto ann_path = dir / (doc.doc_id + ".ann");
  try {
    doc.text = utf8_decode(read_file(txt));
  } catch (const Utf8Error& e) {
    throw CorpusError(txt.string() + ": " + e.what());
  }
  std::string ann = std::filesystem::exists(ann_path) ? read_file(ann_path) : std::string();
  try {
    auto parsed = parse_standoff(doc.text, ann, scheme);
    return {std::move(doc), std::move(parsed.annotations), std::move(split)};
  } catch (const StandoffError& e) {
    throw CorpusError(ann_path.string() + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

}  // namespace

Corpus read_corpus(const std::filesystem::path& dir, const Scheme& scheme) {
  const auto manifest = dir / "manifest.jsonl";
  if (!std::filesystem::exists(manifest)) throw CorpusError("missing manifest '" + manifest.string() + "'");
  Corpus corpus;
  std::istringstream in(read_file(manifest));
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError(manifest.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    auto field = [&](const char* key, bool required) -> std::string {
      if (!rec.contains(key)) {
        if (required) {
          throw CorpusError(manifest.string() + ":" + std::to_string(line_no) + ": missing field '" + key + "'");
        }
        return {};
      }
      return rec.at(key).get<std::string>();
    };
    Document doc;
    doc.doc_id = field("doc_id", true);
    doc.record_id = field("record_id", true);
    doc.department = field("department", false);
    doc.section = field("section", false);
    if (!valid_doc_id(doc.doc_id)) {
      throw CorpusError(manifest.string() + ":" + std::to_string(line_no) + ": invalid doc_id '" + doc.doc_id + "'");
    }
    if (doc.record_id.empty()) {
      throw CorpusError(manifest.string() + ":" + std::to_string(line_no) + ": empty record_id");
    }
    if (!seen.insert(doc.doc_id).second) {
      throw CorpusError(manifest.string() + ":" + std::to_string(line_no) + ": duplicate doc_id '" + doc.doc_id + "'");
    }
    corpus.entries.push_back(load_entry(dir, std::move(doc), field("split", false), scheme));
  }
  return corpus;
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus, const Scheme& scheme) {
  std::filesystem::create_directories(dir);
  std::string manifest;
  for (const auto& e : corpus.entries) {
    if (!valid_doc_id(e.doc.doc_id)) throw CorpusError("invalid doc_id '" + e.doc.doc_id + "'");
    nlohmann::ordered_json rec;
    rec["doc_id"] = e.doc.doc_id;
    rec["record_id"] = e.doc.record_id;
    rec["department"] = e.doc.department;
    rec["section"] = e.doc.section;
    rec["split"] = e.split;
    manifest += rec.dump() + '\n';
    write_file_atomic(dir / (e.doc.doc_id + ".txt"), utf8_encode(e.doc.text));
    write_file_atomic(dir / (e.doc.doc_id + ".ann"), serialize_standoff(e.gold, e.doc.text, scheme));
  }
  write_file_atomic(dir / "manifest.jsonl", manifest);
}

Corpus read_standoff_dir(const std::filesystem::path& dir, const Scheme& scheme) {
  if (!std::filesystem::is_directory(dir)) throw CorpusError("not a directory: '" + dir.string() + "'");
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      names.push_back(entry.path().stem().string());
    }
  }
  std::sort(names.begin(), names.end());
  Corpus corpus;
  for (const auto& name : names) {
    if (!valid_doc_id(name)) throw CorpusError("unsupported document name '" + name + "'");
    Document doc;
    doc.doc_id = name;
    doc.record_id = name;
    corpus.entries.push_back(load_entry(dir, std::move(doc), {}, scheme));
  }
  return corpus;
}

void write_standoff_dir(const std::filesystem::path& dir, const Corpus& corpus, const Scheme& scheme) {
  std::filesystem::create_directories(dir);
  for (const auto& e : corpus.entries) {
    write_file_atomic(dir / (e.doc.doc_id + ".txt"), utf8_encode(e.doc.text));
    write_file_atomic(dir / (e.doc.doc_id + ".ann"), serialize_standoff(e.gold, e.doc.text, scheme));
  }
}

}  // namespace medie
