#pragma once

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "medie/annotation.hpp"
#include "medie/crf.hpp"
#include "medie/features.hpp"
#include "medie/optim.hpp"
#include "medie/scheme.hpp"
#include "medie/sparse.hpp"

namespace medie {

struct CorpusEntry;

// Max-pooled binary features over a span: the sorted set of feature ids
// active at any position in [start, end).
using SpanRep = std::vector<std::uint32_t>;

SpanRep pool_span(const FeatureSeq& doc_features, const Entity& entity);

// Linear scorer over one or more pooled inputs, each with its own weight
// table, plus a bias. Output 0 is the None class.
struct LinearHead {
  std::vector<SparseWeights> tables;
  std::vector<double> bias;

  LinearHead() = default;
  LinearHead(std::size_t num_inputs, std::size_t outputs);

  std::size_t outputs() const { return bias.size(); }
  // inputs.size() must equal tables.size().
  std::vector<double> logits(std::span<const SpanRep* const> inputs) const;
  bool is_finite() const;
  bool same_weights(const LinearHead& other) const;
};

struct AttributeModel {
  FeatureConfig features;
  LinearHead head;  // 1 input, |attributes| + 1 outputs
  double threshold = 0.5;

  AttributeModel() = default;
  AttributeModel(std::size_t num_attribute_types, FeatureConfig config);
  std::size_t num_attribute_types() const { return head.outputs() - 1; }
};

struct RelationModel {
  FeatureConfig features;
  LinearHead head;  // inputs: head span, tail span; |relations| + 1 outputs
  std::int32_t window = 150;

  RelationModel() = default;
  RelationModel(std::size_t num_relation_types, FeatureConfig config);
  std::size_t num_relation_types() const { return head.outputs() - 1; }
};

// Sigmoid per class; index 0 is None.
std::vector<double> attribute_probabilities(const AttributeModel& model, const SpanRep& rep);

// Empty if p[None] > alpha; otherwise the classes with p > alpha that apply
// to the entity type.
std::set<AttributeTypeId> predict_attributes(const AttributeModel& model, const SpanRep& rep, EntityTypeId type,
                                             const Scheme& scheme);

// Softmax over all relation classes plus None (index 0).
std::vector<double> relation_probabilities(const RelationModel& model, const SpanRep& head, const SpanRep& tail);

// Argmax over `allowed` plus None; ties resolve to the earlier class, None first.
std::optional<RelationTypeId> predict_relation(const RelationModel& model, const SpanRep& head, const SpanRep& tail,
                                               std::span<const RelationTypeId> allowed);

struct CandidatePair {
  Entity head;
  Entity tail;
  std::vector<RelationTypeId> allowed;
};

// Character gap between two spans; 0 when they touch or overlap.
std::int32_t span_gap(const Entity& a, const Entity& b);

// Ordered pairs with head != tail, gap <= window and at least one relation
// type permitted for the (head, tail) types.
std::vector<CandidatePair> candidate_pairs(const std::set<Entity>& entities, const Scheme& scheme,
                                           std::int32_t window = 150);

struct SpanTrainLog {
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
};

struct AttributeTrainResult {
  AttributeModel model;
  SpanTrainLog log;
};

struct RelationTrainResult {
  RelationModel model;
  SpanTrainLog log;
};

// Both are trained and early-stopped on gold entities; dev F1 is the
// task's micro F1 with gold entities as input.
AttributeTrainResult train_attribute_model(std::span<const CorpusEntry> train, std::span<const CorpusEntry> dev,
                                           const Scheme& scheme, const TrainConfig& config,
                                           const FeatureConfig& features = {}, double threshold = 0.5,
                                           const EpochCallback& on_epoch = {});

RelationTrainResult train_relation_model(std::span<const CorpusEntry> train, std::span<const CorpusEntry> dev,
                                         const Scheme& scheme, const TrainConfig& config,
                                         const FeatureConfig& features = {}, std::int32_t window = 150,
                                         const EpochCallback& on_epoch = {});

// Predictions for a document given its entities (gold or predicted).
std::set<Attribute> predict_document_attributes(const AttributeModel& model, const FeatureSeq& doc_features,
                                                const std::set<Entity>& entities, const Scheme& scheme);
std::set<Relation> predict_document_relations(const RelationModel& model, const FeatureSeq& doc_features,
                                              const std::set<Entity>& entities, const Scheme& scheme);

}  // namespace medie
