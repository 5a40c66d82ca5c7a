#pragma once

// Relation and attribute applicability transcribed by hand at super-type
// granularity, expanded to subtypes here rather than through the scheme code.

#include <map>
#include <set>
#include <string>
#include <vector>

namespace table {

inline const std::map<std::string, std::vector<std::string>>& subtypes() {
  static const std::map<std::string, std::vector<std::string>> m{
      {"Disease", {"Disease or Syndrome", "Injury or Poisoning", "Organ Damage"}},
      {"Symptom", {"Self-Reported Abnormality", "Abnormal Test Result"}},
      {"Test", {"Test Process", "Test Result"}},
      {"Treatment", {"Treatment", "Operation", "Prevention", "Care"}},
      {"Drug", {"Drug", "Drug Dose"}},
      {"Body", {"Body Part", "Body Matter"}},
      {"Personal History", {"Personal History"}},
      {"Equipment", {"Equipment"}},
      {"Department", {"Department"}},
  };
  return m;
}

inline std::vector<std::string> all_subtypes() {
  std::vector<std::string> out;
  for (const auto& [super, subs] : subtypes()) out.insert(out.end(), subs.begin(), subs.end());
  return out;
}

inline std::set<std::string> expand(const std::vector<std::string>& names) {
  std::set<std::string> out;
  for (const auto& n : names) {
    auto it = subtypes().find(n);
    if (it != subtypes().end()) {
      out.insert(it->second.begin(), it->second.end());
    } else {
      out.insert(n);
    }
  }
  return out;
}

struct RelationRow {
  std::string name;
  std::vector<std::string> heads, tails;
};

inline const std::vector<RelationRow>& relations() {
  static const std::vector<RelationRow> rows{
      {"Status–Cause–Information", {"Disease", "Symptom", "Personal History"}, {"Disease", "Symptom"}},
      {"Status–Require–Information", {"Disease", "Symptom"}, {"Test Process"}},
      {"Information–Suggest–Status", {"Disease", "Symptom", "Test Process", "Test Result"}, {"Disease", "Symptom"}},
      {"Information–Exclude–Status", {"Disease", "Symptom", "Test Process", "Test Result"}, {"Disease", "Symptom"}},
      {"Status–Require–Intervention", {"Disease", "Symptom"}, {"Treatment", "Drug"}},
      {"Intervention–Modify–Status", {"Treatment", "Drug"}, {"Disease", "Symptom"}},
      {"Intervention–Cause–Status", {"Treatment", "Drug"}, {"Disease", "Symptom"}},
      {"Intervention–Require–Information", {"Treatment", "Drug"}, {"Test Process"}},
      {"Information–Permit–Intervention", {"Disease", "Symptom", "Test Process", "Test Result"}, {"Treatment", "Drug"}},
      {"Information–Contra–Intervention", {"Disease", "Symptom", "Test Process", "Test Result"}, {"Treatment", "Drug"}},
  };
  return rows;
}

// Row label -> ticked columns. "Better & Worse" and "History & Future"
// columns are split into their members.
inline std::map<std::string, std::set<std::string>> attribute_cells() {
  const std::map<std::string, std::vector<std::string>> rows{
      {"Disease", {"Negation", "Family", "Analysis", "Uncertainty", "Better", "Worse", "History", "Future"}},
      {"Self-Reported Abnormality",
       {"Negation", "Analysis", "Conditionality", "Occasionality", "Better", "Worse", "History", "Future"}},
      {"Abnormal Test Result", {"Analysis", "Conditionality", "Occasionality", "Better", "Worse", "History", "Future"}},
      {"Test Process", {"Negation", "Analysis", "History", "Future"}},
      {"Test Result", {"Analysis"}},
      {"Treatment", {"Negation", "Analysis", "History", "Future"}},
      {"Drug", {"Negation", "Analysis", "History", "Future"}},
      {"Body", {"Analysis"}},
      {"Personal History", {"Negation", "Analysis"}},
      {"Equipment", {}},
      {"Department", {}},
  };
  std::map<std::string, std::set<std::string>> out;
  for (const auto& [row, cols] : rows) {
    for (const auto& sub : expand({row})) out[sub].insert(cols.begin(), cols.end());
  }
  return out;
}

inline const std::vector<std::string>& attribute_names() {
  static const std::vector<std::string> names{"Negation",       "Family",        "Analysis", "Uncertainty",
                                              "Conditionality", "Occasionality", "Better",   "Worse",
                                              "History",        "Future"};
  return names;
}

}  // namespace table
