#pragma once

#include <span>
#include <vector>

#include "medie/annotation.hpp"
#include "medie/crf.hpp"
#include "medie/random.hpp"
#include "medie/scheme.hpp"
#include "medie/span_models.hpp"

namespace medie {

struct CorpusEntry;

struct PipelineBundle {
  CrfModel crf;
  AttributeModel attr;
  RelationModel rel;
  Scheme scheme;
};

// Entities from Viterbi decoding, then attributes and relations predicted on
// those entities.
AnnotationSet extract(const PipelineBundle& bundle, std::u32string_view text);

std::vector<AnnotationSet> extract_all(const PipelineBundle& bundle, std::span<const Document> docs,
                                       std::size_t jobs = 1);

// Drops each entity independently with probability `rate` (one uniform draw
// per entity in set order), together with its relations and attributes.
AnnotationSet drop_entities(const AnnotationSet& ann, double rate, Rng& rng);

// Each document draws from its own stream derived from (seed, doc_id), so
// results do not depend on document order or job count.
std::vector<AnnotationSet> preannotate(const PipelineBundle& bundle, std::span<const Document> docs, double drop_rate,
                                       std::uint64_t seed, std::size_t jobs = 1);

struct PipelineTrainConfig {
  TrainConfig entity;
  TrainConfig span = TrainConfig::span_defaults();
  FeatureConfig features;
  double threshold = 0.5;
  std::int32_t window = 150;
};

struct PipelineTrainResult {
  PipelineBundle bundle;
  CrfTrainResult entity_log;  // model member moved into the bundle
  SpanTrainLog attribute_log;
  SpanTrainLog relation_log;
};

// The three models are trained separately on gold inputs.
PipelineTrainResult train_pipeline(std::span<const CorpusEntry> train, std::span<const CorpusEntry> dev,
                                   const Scheme& scheme, const PipelineTrainConfig& config);

}  // namespace medie
