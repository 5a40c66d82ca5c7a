#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "medie/annotation.hpp"
#include "medie/scheme.hpp"

namespace medie {

struct Corpus;

enum class Task : std::uint8_t { Entity, Relation, Attribute };

std::string_view to_string(Task t);
Task parse_task(std::string_view name);  // throws std::invalid_argument

// Empty denominators give 0: P = 0 when pred = 0, R = 0 when gold = 0,
// F1 = 0 when P + R = 0.
struct Counts {
  std::size_t gold = 0;
  std::size_t pred = 0;
  std::size_t correct = 0;

  double precision() const { return pred == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred); }
  double recall() const { return gold == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  Counts& operator+=(const Counts& o) {
    gold += o.gold;
    pred += o.pred;
    correct += o.correct;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

// Exact set intersection over arbitrary tuples.
template <typename T>
Counts count_tuples(const std::set<T>& gold, const std::set<T>& pred) {
  Counts c{gold.size(), pred.size(), 0};
  auto g = gold.begin();
  auto p = pred.begin();
  while (g != gold.end() && p != pred.end()) {
    if (*g < *p) {
      ++g;
    } else if (*p < *g) {
      ++p;
    } else {
      ++c.correct;
      ++g;
      ++p;
    }
  }
  return c;
}

struct TypeRow {
  std::string type;
  Counts counts;
};

struct EvalReport {
  Task task = Task::Entity;
  Counts micro;
  std::vector<TypeRow> per_type;  // scheme order, one row per type

  double precision() const { return micro.precision(); }
  double recall() const { return micro.recall(); }
  double f1() const { return micro.f1(); }

  static EvalReport empty(Task task, const Scheme& scheme);
  // Adds counts row by row; both reports must come from the same task and scheme.
  void merge(const EvalReport& other);
};

// Strict matching: entity (type, start, end); relation (type, head, tail)
// with the qualifier ignored; attribute (type, entity).
EvalReport score(Task task, const AnnotationSet& gold, const AnnotationSet& pred, const Scheme& scheme);

struct TaskReports {
  EvalReport entity;
  EvalReport relation;
  EvalReport attribute;

  const EvalReport& get(Task t) const;
  static TaskReports empty(const Scheme& scheme);
  void merge(const TaskReports& other);
};

TaskReports score_all(const AnnotationSet& gold, const AnnotationSet& pred, const Scheme& scheme);

// Sums counts over aligned document lists (gold[i] pairs with pred[i]).
TaskReports score_documents(std::span<const AnnotationSet> gold, std::span<const AnnotationSet> pred,
                            const Scheme& scheme);

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Annotator A is treated as ground truth. Both corpora must cover the same
// document ids; the gold/pred roles only swap P and R.
TaskReports iaa(const Corpus& a, const Corpus& b, const Scheme& scheme);

// Aligned text table, one row per type with any counts plus a micro row.
std::string format_report(const EvalReport& report, bool include_types = true);
// One JSON object per line: micro first, then per type.
std::string report_jsonl(const EvalReport& report);

}  // namespace medie
