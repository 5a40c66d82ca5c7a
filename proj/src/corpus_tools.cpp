#include "medie/corpus_tools.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "json.hpp"
#include "medie/parallel.hpp"
#include "medie/random.hpp"
#include "medie/text.hpp"

namespace medie {

// ---- stratified sampling ----

void SamplingConfig::check() const {
  if (cap < 1) throw std::invalid_argument("sampling cap must be >= 1");
  for (const auto& [dept, q] : quotas) {
    if (q < 1) throw std::invalid_argument("quota for department '" + dept + "' must be >= 1");
  }
  if (default_quota && *default_quota < 1) throw std::invalid_argument("default quota must be >= 1");
}

std::vector<std::string> stratified_sample(std::span<const SampleRecord> records, const SamplingConfig& config) {
  config.check();
  std::vector<SampleRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), [](const SampleRecord& a, const SampleRecord& b) {
    return std::tie(a.record_id, a.department, a.condition) < std::tie(b.record_id, b.department, b.condition);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].record_id == sorted[i - 1].record_id) {
      throw std::invalid_argument("duplicate record id '" + sorted[i].record_id + "' in sampling input");
    }
  }
  std::map<std::string, std::vector<const SampleRecord*>> by_dept;
  for (const auto& r : sorted) by_dept[r.department].push_back(&r);

  std::vector<std::string> out;
  for (auto& [dept, members] : by_dept) {
    std::size_t quota = 0;
    if (auto it = config.quotas.find(dept); it != config.quotas.end()) {
      quota = it->second;
    } else if (config.default_quota) {
      quota = *config.default_quota;
    } else {
      continue;
    }
    Rng rng(derive_seed(config.seed, dept));
    rng.shuffle(members);
    std::map<std::string, std::size_t> per_condition;
    std::size_t taken = 0;
    for (const auto* r : members) {
      if (taken == quota) break;
      auto& n = per_condition[r->condition];
      if (n >= config.cap) continue;
      ++n;
      ++taken;
      out.push_back(r->record_id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SampleRecord> sample_records(const Corpus& corpus, EntityTypeId condition_type) {
  std::map<std::string, SampleRecord> by_record;
  for (const auto& e : corpus.entries) {
    auto [it, inserted] = by_record.try_emplace(e.doc.record_id, SampleRecord{e.doc.record_id, e.doc.department, "-"});
    if (it->second.condition != "-") continue;
    for (const auto& ent : e.gold.entities) {
      if (ent.type == condition_type) {
        it->second.condition = utf8_encode(std::u32string_view(e.doc.text).substr(ent.start, ent.end - ent.start));
        break;
      }
    }
  }
  std::vector<SampleRecord> out;
  for (auto& [id, r] : by_record) out.push_back(std::move(r));
  return out;
}

// ---- splitting ----

SplitSpec SplitSpec::defaults(std::size_t num_records) {
  SplitSpec s;
  if (num_records == 500) {
    s.counts = std::array<std::size_t, 3>{300, 100, 100};
  } else {
    s.ratios = std::array<double, 3>{0.6, 0.2, 0.2};
  }
  return s;
}

std::array<std::size_t, 3> SplitSpec::resolve(std::size_t n) const {
  if (counts && ratios) throw SplitError("give either split counts or split ratios, not both");
  if (counts) {
    const auto& c = *counts;
    if (c[0] + c[1] + c[2] > n) {
      throw SplitError("insufficient records: split needs " + std::to_string(c[0] + c[1] + c[2]) + ", corpus has " +
                       std::to_string(n));
    }
    return c;
  }
  if (!ratios) return defaults(n).resolve(n);
  const auto& r = *ratios;
  double sum = 0.0;
  for (double x : r) {
    if (!(x >= 0.0)) throw SplitError("split ratios must be non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw SplitError("split ratios must sum to 1");
  std::array<std::size_t, 3> out{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = r[i] * static_cast<double>(n);
    out[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::array<int, 3> idx{0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int k = 0; assigned < n && k < 3; ++k, ++assigned) ++out[idx[k]];
  return out;
}

SplitResult split_records(std::vector<std::string> ids, const SplitSpec& spec, std::uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const auto sizes = spec.resolve(ids.size());
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(ids);
  SplitResult r;
  auto take = [&](std::vector<std::string>& dst, std::size_t from, std::size_t n) {
    dst.assign(ids.begin() + static_cast<std::ptrdiff_t>(from), ids.begin() + static_cast<std::ptrdiff_t>(from + n));
    std::sort(dst.begin(), dst.end());
  };
  take(r.train, 0, sizes[0]);
  take(r.dev, sizes[0], sizes[1]);
  take(r.test, sizes[0] + sizes[1], sizes[2]);
  return r;
}

void assign_splits(Corpus& corpus, const SplitResult& split) {
  std::map<std::string, std::string> of;
  for (const auto& id : split.train) of[id] = "train";
  for (const auto& id : split.dev) of[id] = "dev";
  for (const auto& id : split.test) of[id] = "test";
  for (auto& e : corpus.entries) {
    auto it = of.find(e.doc.record_id);
    e.split = it == of.end() ? "" : it->second;
  }
}

// ---- generator ----

namespace {

struct Slot {
  char kind = 'E';  // E, H, T or R
  std::string type;
  std::string forced;
  bool bare = false;
};

struct Piece {
  bool is_slot = false;
  std::string literal;
  Slot slot;
};

// "{E}", "{E:Type}", "{E+Attribute}", "{E!}", "{H}", "{R}", "{T}".
std::vector<Piece> parse_template(const std::string& tpl) {
  std::vector<Piece> out;
  std::size_t i = 0;
  while (i < tpl.size()) {
    const auto open = tpl.find('{', i);
    if (open == std::string::npos) {
      out.push_back({false, tpl.substr(i), {}});
      break;
    }
    if (open > i) out.push_back({false, tpl.substr(i, open - i), {}});
    const auto close = tpl.find('}', open);
    if (close == std::string::npos) throw GeneratorError("template '" + tpl + "': unclosed '{'");
    std::string body = tpl.substr(open + 1, close - open - 1);
    if (body.empty() || std::string_view("EHTR").find(body[0]) == std::string_view::npos) {
      throw GeneratorError("template '" + tpl + "': unknown slot '{" + body + "}'");
    }
    Slot s;
    s.kind = body[0];
    std::string rest = body.substr(1);
    if (!rest.empty() && rest.back() == '!') {
      s.bare = true;
      rest.pop_back();
    }
    if (auto plus = rest.find('+'); plus != std::string::npos) {
      s.forced = rest.substr(plus + 1);
      rest = rest.substr(0, plus);
    }
    if (!rest.empty()) {
      if (rest[0] != ':') throw GeneratorError("template '" + tpl + "': malformed slot '{" + body + "}'");
      s.type = rest.substr(1);
    }
    out.push_back({true, {}, s});
    i = close + 1;
  }
  return out;
}

std::vector<std::string> strings(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key)) out = j.at(key).get<std::vector<std::string>>();
  return out;
}

std::array<std::size_t, 2> range(const nlohmann::json& j, const char* key, std::array<std::size_t, 2> def) {
  if (!j.contains(key)) return def;
  const auto v = j.at(key).get<std::vector<std::size_t>>();
  if (v.size() != 2) throw GeneratorError(std::string("'") + key + "' must be a [min, max] pair");
  return {v[0], v[1]};
}

}  // namespace

GeneratorConfig GeneratorConfig::parse(std::string_view json_text, const std::string& origin) {
  GeneratorConfig c;
  try {
    const auto j = nlohmann::json::parse(json_text);
    c.records = j.value("records", std::size_t{0});
    c.seed = j.value("seed", std::uint64_t{0});
    c.departments = strings(j, "departments");
    c.sections = strings(j, "sections");
    c.sections_per_record = range(j, "sections_per_record", c.sections_per_record);
    c.sentences_per_doc = range(j, "sentences_per_doc", c.sentences_per_doc);
    c.relation_rate = j.value("relation_rate", c.relation_rate);
    c.near_miss_rate = j.value("near_miss_rate", c.near_miss_rate);
    c.distractor_rate = j.value("distractor_rate", c.distractor_rate);
    c.attribute_rate = j.value("attribute_rate", c.attribute_rate);
    if (j.contains("vocabulary")) c.vocabulary = j.at("vocabulary").get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("triggers")) c.triggers = j.at("triggers").get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("cues")) {
      for (const auto& [name, cue] : j.at("cues").items()) {
        AttributeCue a;
        const std::string pos = cue.value("position", "prefix");
        if (pos != "prefix" && pos != "suffix") throw GeneratorError("cue '" + name + "': position must be prefix or suffix");
        a.prefix = pos == "prefix";
        a.forms = cue.at("forms").get<std::vector<std::string>>();
        c.cues[name] = std::move(a);
      }
    }
    c.entity_templates = strings(j, "entity_templates");
    c.relation_templates = strings(j, "relation_templates");
    c.near_miss_templates = strings(j, "near_miss_templates");
    c.distractors = strings(j, "distractors");
  } catch (const nlohmann::json::exception& e) {
    throw GeneratorError(origin + ": " + e.what());
  } catch (const GeneratorError& e) {
    throw GeneratorError(origin + ": " + e.what());
  }
  return c;
}

GeneratorConfig GeneratorConfig::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

GeneratorConfig GeneratorConfig::builtin() { return parse(builtin_generator_text(), "<builtin generator>"); }

namespace {

// Resolved view of a config against a scheme.
struct Plan {
  std::vector<std::vector<std::u32string>> vocab;  // per entity type
  std::vector<std::vector<std::u32string>> triggers;
  std::vector<std::optional<AttributeCue>> cues;
  std::vector<std::vector<std::u32string>> cue_forms;
  std::vector<std::vector<Piece>> entity_t, relation_t, near_t;
  std::vector<std::u32string> distractors;
};

Plan make_plan(const GeneratorConfig& c, const Scheme& scheme) {
  Plan p;
  p.vocab.resize(scheme.num_entity_types());
  for (const auto& [name, words] : c.vocabulary) {
    auto id = scheme.find_entity(name);
    if (!id) throw GeneratorError("vocabulary names unknown entity type '" + name + "'");
    for (const auto& w : words) {
      if (w.empty()) throw GeneratorError("empty vocabulary entry for '" + name + "'");
      p.vocab[id->index()].push_back(utf8_decode(w));
    }
  }
  for (std::size_t i = 0; i < p.vocab.size(); ++i) {
    if (p.vocab[i].empty()) {
      throw GeneratorError("no vocabulary for entity type '" + scheme.entity(EntityTypeId(i)).name + "'");
    }
  }
  p.triggers.resize(scheme.num_relation_types());
  for (const auto& [name, words] : c.triggers) {
    auto id = scheme.find_relation(name);
    if (!id) throw GeneratorError("triggers name unknown relation type '" + name + "'");
    for (const auto& w : words) p.triggers[id->index()].push_back(utf8_decode(w));
  }
  p.cues.resize(scheme.num_attribute_types());
  p.cue_forms.resize(scheme.num_attribute_types());
  for (const auto& [name, cue] : c.cues) {
    auto id = scheme.find_attribute(name);
    if (!id) throw GeneratorError("cues name unknown attribute type '" + name + "'");
    if (cue.forms.empty()) throw GeneratorError("cue for '" + name + "' has no forms");
    p.cues[id->index()] = cue;
    for (const auto& f : cue.forms) p.cue_forms[id->index()].push_back(utf8_decode(f));
  }
  auto parse_all = [&](const std::vector<std::string>& tpls, std::vector<std::vector<Piece>>& out, bool relation) {
    for (const auto& t : tpls) {
      auto pieces = parse_template(t);
      int h = 0, r = 0, tl = 0;
      for (const auto& pc : pieces) {
        if (!pc.is_slot) continue;
        const Slot& s = pc.slot;
        h += s.kind == 'H';
        r += s.kind == 'R';
        tl += s.kind == 'T';
        if (!s.type.empty() && scheme.expand(s.type).empty()) {
          throw GeneratorError("template '" + t + "': unknown entity type '" + s.type + "'");
        }
        if (!s.forced.empty()) {
          auto a = scheme.find_attribute(s.forced);
          if (!a) throw GeneratorError("template '" + t + "': unknown attribute '" + s.forced + "'");
          if (!p.cues[a->index()]) throw GeneratorError("template '" + t + "': attribute '" + s.forced + "' has no cue");
        }
      }
      if (relation && (h != 1 || r != 1 || tl != 1)) {
        throw GeneratorError("relation template '" + t + "' needs exactly one {H}, {R} and {T}");
      }
      if (!relation && h + r + tl > 0) throw GeneratorError("template '" + t + "' uses relation slots");
      out.push_back(std::move(pieces));
    }
  };
  parse_all(c.entity_templates, p.entity_t, false);
  parse_all(c.relation_templates, p.relation_t, true);
  parse_all(c.near_miss_templates, p.near_t, false);
  for (const auto& d : c.distractors) p.distractors.push_back(utf8_decode(d));
  return p;
}

class DocBuilder {
 public:
  DocBuilder(const GeneratorConfig& c, const Plan& p, const Scheme& s, Rng& rng) : c_(c), p_(p), s_(s), rng_(rng) {}

  void sentence() {
    const double u = rng_.uniform();
    double edge = c_.relation_rate;
    if (u < edge && !p_.relation_t.empty()) {
      if (auto r = pick_relation()) {
        render(rng_.pick(p_.relation_t), r);
        return;
      }
    }
    edge += c_.near_miss_rate;
    if (u < edge && !p_.near_t.empty()) {
      render(rng_.pick(p_.near_t), std::nullopt);
      return;
    }
    edge += c_.distractor_rate;
    if ((u < edge || p_.entity_t.empty()) && !p_.distractors.empty()) {
      text_ += rng_.pick(p_.distractors);
      return;
    }
    if (!p_.entity_t.empty()) render(rng_.pick(p_.entity_t), std::nullopt);
  }

  std::u32string text_;
  AnnotationSet gold_;

 private:
  std::optional<RelationTypeId> pick_relation() {
    std::vector<RelationTypeId> options;
    for (std::size_t r = 0; r < s_.num_relation_types(); ++r) {
      if (!p_.triggers[r].empty() && !used_.count(r)) options.emplace_back(r);
    }
    if (options.empty()) return std::nullopt;
    const auto r = rng_.pick(options);
    used_.insert(r.index());
    return r;
  }

  std::vector<EntityTypeId> types_for(const std::string& name, const std::vector<bool>* allowed,
                                      std::optional<AttributeTypeId> forced) const {
    std::vector<EntityTypeId> out;
    const auto base = name.empty() ? all_types() : s_.expand(name);
    for (auto t : base) {
      if (allowed && !(*allowed)[t.index()]) continue;
      if (forced && !s_.attribute_applies(*forced, t)) continue;
      out.push_back(t);
    }
    return out;
  }

  std::vector<EntityTypeId> all_types() const {
    std::vector<EntityTypeId> out;
    for (std::size_t i = 0; i < s_.num_entity_types(); ++i) out.emplace_back(i);
    return out;
  }

  std::optional<AttributeTypeId> random_cue(EntityTypeId type, bool prefix) {
    if (!rng_.bernoulli(c_.attribute_rate)) return std::nullopt;
    std::vector<AttributeTypeId> options;
    for (std::size_t a = 0; a < p_.cues.size(); ++a) {
      if (p_.cues[a] && p_.cues[a]->prefix == prefix && s_.attribute_applies(AttributeTypeId(a), type)) {
        options.emplace_back(a);
      }
    }
    if (options.empty()) return std::nullopt;
    return rng_.pick(options);
  }

  std::u32string surface(EntityTypeId type) {
    std::u32string w = rng_.pick(p_.vocab[type.index()]);
    for (auto& ch : w) {
      if (ch == U'#') ch = static_cast<char32_t>(U'0' + rng_.below(10));
    }
    return w;
  }

  Entity place(EntityTypeId type, std::optional<AttributeTypeId> pre, std::optional<AttributeTypeId> post) {
    if (pre) text_ += rng_.pick(p_.cue_forms[pre->index()]);
    Entity e{type, static_cast<std::int32_t>(text_.size()), 0};
    text_ += surface(type);
    e.end = static_cast<std::int32_t>(text_.size());
    if (post) text_ += rng_.pick(p_.cue_forms[post->index()]);
    gold_.entities.insert(e);
    if (pre) gold_.attributes.insert({*pre, e});
    if (post) gold_.attributes.insert({*post, e});
    return e;
  }

  void render(const std::vector<Piece>& pieces, std::optional<RelationTypeId> rel) {
    std::optional<Entity> head;
    for (const auto& pc : pieces) {
      if (!pc.is_slot) {
        text_ += utf8_decode(pc.literal);
        continue;
      }
      const Slot& slot = pc.slot;
      if (slot.kind == 'R') {
        text_ += rng_.pick(p_.triggers[rel->index()]);
        continue;
      }
      const std::vector<bool>* allowed = nullptr;
      if (slot.kind == 'H') allowed = &s_.relation(*rel).heads;
      if (slot.kind == 'T') allowed = &s_.relation(*rel).tails;
      std::optional<AttributeTypeId> forced;
      if (!slot.forced.empty()) forced = s_.attribute_id(slot.forced);
      const auto types = types_for(slot.type, allowed, forced);
      if (types.empty()) throw GeneratorError("no entity type can fill slot in a template");
      const EntityTypeId type = rng_.pick(types);
      std::optional<AttributeTypeId> pre, post;
      if (forced) {
        (p_.cues[forced->index()]->prefix ? pre : post) = forced;
      } else if (!slot.bare) {
        // Relation arguments keep the trigger adjacent: heads take prefix
        // cues only, tails suffix cues only.
        if (slot.kind != 'T') pre = random_cue(type, true);
        if (slot.kind != 'H') post = random_cue(type, false);
      }
      const Entity e = place(type, pre, post);
      if (slot.kind == 'H') head = e;
      if (slot.kind == 'T') gold_.relations.insert({*rel, *head, e, {}});
    }
  }

  const GeneratorConfig& c_;
  const Plan& p_;
  const Scheme& s_;
  Rng& rng_;
  std::set<std::size_t> used_;
};

}  // namespace

void GeneratorConfig::check(const Scheme& scheme) const {
  if (records > 0 && departments.empty()) throw GeneratorError("generator needs at least one department");
  if (records > 0 && sections.empty()) throw GeneratorError("generator needs at least one section");
  for (const auto& r : {sections_per_record, sentences_per_doc}) {
    if (r[0] < 1 || r[0] > r[1]) throw GeneratorError("ranges must satisfy 1 <= min <= max");
  }
  if (sections_per_record[1] > sections.size() && records > 0) {
    throw GeneratorError("sections_per_record exceeds the number of sections");
  }
  for (double x : {relation_rate, near_miss_rate, distractor_rate, attribute_rate}) {
    if (!(x >= 0.0 && x <= 1.0)) throw GeneratorError("rates must lie in [0, 1]");
  }
  if (relation_rate + near_miss_rate + distractor_rate > 1.0 + 1e-12) {
    throw GeneratorError("relation_rate + near_miss_rate + distractor_rate exceeds 1");
  }
  if (entity_templates.empty() && distractors.empty()) throw GeneratorError("generator has no sentence templates");
  make_plan(*this, scheme);
}

Corpus generate(const GeneratorConfig& config, const Scheme& scheme, std::size_t jobs) {
  config.check(scheme);
  const Plan plan = make_plan(config, scheme);
  std::vector<std::vector<CorpusEntry>> records(config.records);
  parallel_for(config.records, jobs, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i)));
    char id[32];
    std::snprintf(id, sizeof id, "rec%05zu", i + 1);
    const std::string department = rng.pick(config.departments);
    const std::size_t n_sections =
        config.sections_per_record[0] + rng.below(config.sections_per_record[1] - config.sections_per_record[0] + 1);
    for (std::size_t s = 0; s < n_sections; ++s) {
      DocBuilder b(config, plan, scheme, rng);
      const std::size_t n_sent =
          config.sentences_per_doc[0] + rng.below(config.sentences_per_doc[1] - config.sentences_per_doc[0] + 1);
      for (std::size_t k = 0; k < n_sent; ++k) b.sentence();
      CorpusEntry e;
      e.doc.doc_id = std::string(id) + "-" + std::to_string(s + 1);
      e.doc.record_id = id;
      e.doc.department = department;
      e.doc.section = config.sections[s];
      e.doc.text = std::move(b.text_);
      e.gold = std::move(b.gold_);
      records[i].push_back(std::move(e));
    }
  });
  Corpus corpus;
  for (auto& r : records) {
    for (auto& e : r) corpus.entries.push_back(std::move(e));
  }
  return corpus;
}

}  // namespace medie
