#include "medie/evaluation.hpp"

#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "medie/standoff.hpp"
#include "medie/text.hpp"

namespace medie {

std::string_view to_string(Task t) {
  switch (t) {
    case Task::Entity: return "entity";
    case Task::Relation: return "relation";
    case Task::Attribute: return "attribute";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  if (name == "entity") return Task::Entity;
  if (name == "relation") return Task::Relation;
  if (name == "attribute") return Task::Attribute;
  throw std::invalid_argument("unknown task '" + std::string(name) + "' (expected entity, relation or attribute)");
}

EvalReport EvalReport::empty(Task task, const Scheme& scheme) {
  EvalReport r;
  r.task = task;
  switch (task) {
    case Task::Entity:
      for (std::size_t i = 0; i < scheme.num_entity_types(); ++i) r.per_type.push_back({scheme.entity(EntityTypeId(i)).name, {}});
      break;
    case Task::Relation:
      for (std::size_t i = 0; i < scheme.num_relation_types(); ++i) r.per_type.push_back({scheme.relation(RelationTypeId(i)).name, {}});
      break;
    case Task::Attribute:
      for (std::size_t i = 0; i < scheme.num_attribute_types(); ++i) r.per_type.push_back({scheme.attribute(AttributeTypeId(i)).name, {}});
      break;
  }
  return r;
}

void EvalReport::merge(const EvalReport& other) {
  if (task != other.task || per_type.size() != other.per_type.size()) {
    throw std::invalid_argument("EvalReport::merge: reports are not compatible");
  }
  micro += other.micro;
  for (std::size_t i = 0; i < per_type.size(); ++i) per_type[i].counts += other.per_type[i].counts;
}

namespace {

using RelationKey = std::tuple<Entity, Entity, RelationTypeId>;

std::set<RelationKey> relation_keys(const std::set<Relation>& rs) {
  std::set<RelationKey> out;
  for (const auto& r : rs) out.emplace(r.head, r.tail, r.type);
  return out;
}

template <typename T, typename TypeOf>
void fill(EvalReport& report, const std::set<T>& gold, const std::set<T>& pred, TypeOf type_of) {
  report.micro = count_tuples(gold, pred);
  std::vector<std::set<T>> g(report.per_type.size()), p(report.per_type.size());
  for (const auto& x : gold) g[type_of(x)].insert(x);
  for (const auto& x : pred) p[type_of(x)].insert(x);
  for (std::size_t i = 0; i < report.per_type.size(); ++i) report.per_type[i].counts = count_tuples(g[i], p[i]);
}

}  // namespace

EvalReport score(Task task, const AnnotationSet& gold, const AnnotationSet& pred, const Scheme& scheme) {
  EvalReport r = EvalReport::empty(task, scheme);
  switch (task) {
    case Task::Entity:
      fill(r, gold.entities, pred.entities, [](const Entity& e) { return e.type.index(); });
      break;
    case Task::Relation:
      fill(r, relation_keys(gold.relations), relation_keys(pred.relations),
           [](const RelationKey& k) { return std::get<2>(k).index(); });
      break;
    case Task::Attribute:
      fill(r, gold.attributes, pred.attributes, [](const Attribute& a) { return a.type.index(); });
      break;
  }
  return r;
}

const EvalReport& TaskReports::get(Task t) const {
  switch (t) {
    case Task::Entity: return entity;
    case Task::Relation: return relation;
    case Task::Attribute: return attribute;
  }
  return entity;
}

TaskReports TaskReports::empty(const Scheme& scheme) {
  return {EvalReport::empty(Task::Entity, scheme), EvalReport::empty(Task::Relation, scheme),
          EvalReport::empty(Task::Attribute, scheme)};
}

void TaskReports::merge(const TaskReports& other) {
  entity.merge(other.entity);
  relation.merge(other.relation);
  attribute.merge(other.attribute);
}

TaskReports score_all(const AnnotationSet& gold, const AnnotationSet& pred, const Scheme& scheme) {
  return {score(Task::Entity, gold, pred, scheme), score(Task::Relation, gold, pred, scheme),
          score(Task::Attribute, gold, pred, scheme)};
}

TaskReports score_documents(std::span<const AnnotationSet> gold, std::span<const AnnotationSet> pred,
                            const Scheme& scheme) {
  if (gold.size() != pred.size()) throw EvalError("score_documents: gold and prediction counts differ");
  TaskReports total = TaskReports::empty(scheme);
  for (std::size_t i = 0; i < gold.size(); ++i) total.merge(score_all(gold[i], pred[i], scheme));
  return total;
}

TaskReports iaa(const Corpus& a, const Corpus& b, const Scheme& scheme) {
  std::map<std::string, const AnnotationSet*> by_id;
  for (const auto& e : b.entries) by_id[e.doc.doc_id] = &e.gold;
  if (by_id.size() != a.entries.size()) {
    throw EvalError("iaa: annotators cover different document sets (" + std::to_string(a.entries.size()) + " vs " +
                    std::to_string(b.entries.size()) + " documents)");
  }
  TaskReports total = TaskReports::empty(scheme);
  for (const auto& e : a.entries) {
    auto it = by_id.find(e.doc.doc_id);
    if (it == by_id.end()) throw EvalError("iaa: document '" + e.doc.doc_id + "' is missing from the second annotator");
    total.merge(score_all(e.gold, *it->second, scheme));
  }
  return total;
}

std::string format_report(const EvalReport& report, bool include_types) {
  std::ostringstream out;
  char line[256];
  // snprintf pads by bytes; type names may hold multi-byte dashes
  auto name_col = [&](const std::string& name) {
    const std::size_t width = utf8_decode(name).size();
    out << name << std::string(width < 36 ? 36 - width : 0, ' ');
  };
  name_col(std::string(to_string(report.task)) + " type");
  std::snprintf(line, sizeof line, " %7s %7s %7s %9s %9s %9s\n", "gold", "pred", "correct", "P", "R", "F1");
  out << line;
  auto row = [&](const std::string& name, const Counts& c) {
    name_col(name);
    std::snprintf(line, sizeof line, " %7zu %7zu %7zu %9.4f %9.4f %9.4f\n", c.gold, c.pred, c.correct, c.precision(),
                  c.recall(), c.f1());
    out << line;
  };
  if (include_types) {
    for (const auto& r : report.per_type) {
      if (r.counts.gold + r.counts.pred > 0) row(r.type, r.counts);
    }
  }
  row("micro", report.micro);
  return out.str();
}

std::string report_jsonl(const EvalReport& report) {
  std::string out;
  auto emit = [&](const std::string& type, const Counts& c) {
    nlohmann::ordered_json j;
    j["task"] = to_string(report.task);
    j["type"] = type;
    j["gold"] = c.gold;
    j["pred"] = c.pred;
    j["correct"] = c.correct;
    j["precision"] = c.precision();
    j["recall"] = c.recall();
    j["f1"] = c.f1();
    out += j.dump();
    out += '\n';
  };
  emit("micro", report.micro);
  for (const auto& r : report.per_type) emit(r.type, r.counts);
  return out;
}

}  // namespace medie
