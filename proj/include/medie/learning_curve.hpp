#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "medie/evaluation.hpp"
#include "medie/pipeline.hpp"

namespace medie {

struct LearningCurveConfig {
  std::vector<double> fractions{0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  PipelineTrainConfig train;
  std::size_t jobs = 1;  // independent runs in flight
};

struct CurveRun {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::size_t records = 0;
  std::size_t documents = 0;
  double entity_f1 = 0.0;
  double relation_f1 = 0.0;
  double attribute_f1 = 0.0;

  double f1(Task t) const;
};

struct CurvePoint {
  double fraction = 0.0;
  Task task = Task::Entity;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single seed
  std::vector<double> values;  // per seed, in seed order
};

struct LearningCurve {
  std::vector<CurveRun> runs;      // fraction-major, then seed
  std::vector<CurvePoint> points;  // fraction-major, then task
};

// Whole records are sampled (every document of a chosen record comes along)
// with round(fraction * records) records, at least one. Throws EvalError if
// a fraction is outside (0, 1] or the pool is empty.
std::vector<std::string> subsample_records(std::span<const CorpusEntry> pool, double fraction, std::uint64_t seed);

using CurveProgress = std::function<void(const CurveRun&)>;

LearningCurve learning_curve(std::span<const CorpusEntry> pool, std::span<const CorpusEntry> dev,
                             std::span<const CorpusEntry> test, const Scheme& scheme,
                             const LearningCurveConfig& config, const CurveProgress& progress = {});

// Pipeline predictions on `test`, scored per task.
TaskReports evaluate_pipeline(const PipelineBundle& bundle, std::span<const CorpusEntry> test, std::size_t jobs = 1);

std::string format_curve(const LearningCurve& curve);
std::string curve_jsonl(const LearningCurve& curve);

}  // namespace medie
