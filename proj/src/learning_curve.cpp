#include "medie/learning_curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"
#include "medie/parallel.hpp"
#include "medie/random.hpp"
#include "medie/standoff.hpp"

namespace medie {

double CurveRun::f1(Task t) const {
  switch (t) {
    case Task::Entity: return entity_f1;
    case Task::Relation: return relation_f1;
    case Task::Attribute: return attribute_f1;
  }
  return 0.0;
}

std::vector<std::string> subsample_records(std::span<const CorpusEntry> pool, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw EvalError("learning-curve fraction " + std::to_string(fraction) + " is outside (0, 1]");
  }
  std::set<std::string> unique;
  for (const auto& e : pool) unique.insert(e.doc.record_id);
  if (unique.empty()) throw EvalError("learning-curve pool is empty");
  std::vector<std::string> ids(unique.begin(), unique.end());
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size()))));
  Rng rng(derive_seed(seed, "learning-curve"));
  rng.shuffle(ids);
  ids.resize(std::min(n, ids.size()));
  std::sort(ids.begin(), ids.end());
  return ids;
}

TaskReports evaluate_pipeline(const PipelineBundle& bundle, std::span<const CorpusEntry> test, std::size_t jobs) {
  std::vector<AnnotationSet> pred(test.size());
  parallel_for(test.size(), jobs, [&](std::size_t i) { pred[i] = extract(bundle, test[i].doc.text); });
  TaskReports total = TaskReports::empty(bundle.scheme);
  for (std::size_t i = 0; i < test.size(); ++i) total.merge(score_all(test[i].gold, pred[i], bundle.scheme));
  return total;
}

LearningCurve learning_curve(std::span<const CorpusEntry> pool, std::span<const CorpusEntry> dev,
                             std::span<const CorpusEntry> test, const Scheme& scheme,
                             const LearningCurveConfig& config, const CurveProgress& progress) {
  if (config.fractions.empty() || config.seeds.empty()) throw EvalError("learning curve needs fractions and seeds");
  struct Job {
    double fraction;
    std::uint64_t seed;
    std::vector<CorpusEntry> train;
    std::size_t records;
  };
  std::vector<Job> jobs;
  for (double f : config.fractions) {
    for (auto seed : config.seeds) {
      const auto ids = subsample_records(pool, f, seed);
      Job j{f, seed, {}, ids.size()};
      for (const auto& e : pool) {
        if (std::binary_search(ids.begin(), ids.end(), e.doc.record_id)) j.train.push_back(e);
      }
      jobs.push_back(std::move(j));
    }
  }

  LearningCurve curve;
  curve.runs.resize(jobs.size());
  parallel_for(jobs.size(), config.jobs, [&](std::size_t i) {
    const Job& job = jobs[i];
    PipelineTrainConfig tc = config.train;
    tc.entity.seed = job.seed;
    tc.span.seed = job.seed;
    if (config.jobs > 1) tc.entity.jobs = tc.span.jobs = 1;
    const auto trained = train_pipeline(job.train, dev, scheme, tc);
    const auto reports = evaluate_pipeline(trained.bundle, test, config.jobs > 1 ? 1 : tc.entity.jobs);
    CurveRun run{job.fraction, job.seed, job.records, job.train.size(), reports.entity.f1(), reports.relation.f1(),
                 reports.attribute.f1()};
    curve.runs[i] = run;
    if (progress) progress(run);
  });

  std::size_t k = 0;
  for (double f : config.fractions) {
    for (Task task : {Task::Entity, Task::Relation, Task::Attribute}) {
      CurvePoint p;
      p.fraction = f;
      p.task = task;
      for (std::size_t s = 0; s < config.seeds.size(); ++s) p.values.push_back(curve.runs[k + s].f1(task));
      double sum = 0.0;
      for (double v : p.values) sum += v;
      p.mean = sum / static_cast<double>(p.values.size());
      if (p.values.size() > 1) {
        double sq = 0.0;
        for (double v : p.values) sq += (v - p.mean) * (v - p.mean);
        p.stddev = std::sqrt(sq / static_cast<double>(p.values.size() - 1));
      }
      curve.points.push_back(std::move(p));
    }
    k += config.seeds.size();
  }
  return curve;
}

std::string format_curve(const LearningCurve& curve) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-9s %-10s %9s %9s\n", "fraction", "task", "mean F1", "std");
  out << line;
  for (const auto& p : curve.points) {
    std::snprintf(line, sizeof line, "%-9.2f %-10s %9.4f %9.4f\n", p.fraction, std::string(to_string(p.task)).c_str(),
                  p.mean, p.stddev);
    out << line;
  }
  return out.str();
}

std::string curve_jsonl(const LearningCurve& curve) {
  std::string out;
  for (const auto& r : curve.runs) {
    nlohmann::ordered_json j;
    j["kind"] = "run";
    j["fraction"] = r.fraction;
    j["seed"] = r.seed;
    j["records"] = r.records;
    j["documents"] = r.documents;
    j["entity_f1"] = r.entity_f1;
    j["relation_f1"] = r.relation_f1;
    j["attribute_f1"] = r.attribute_f1;
    out += j.dump() + "\n";
  }
  for (const auto& p : curve.points) {
    nlohmann::ordered_json j;
    j["kind"] = "summary";
    j["fraction"] = p.fraction;
    j["task"] = to_string(p.task);
    j["mean_f1"] = p.mean;
    j["std_f1"] = p.stddev;
    j["values"] = p.values;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace medie
