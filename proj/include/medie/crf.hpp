#pragma once

#include <functional>
#include <set>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "medie/annotation.hpp"
#include "medie/bio.hpp"
#include "medie/features.hpp"
#include "medie/matrix.hpp"
#include "medie/optim.hpp"
#include "medie/sparse.hpp"

namespace medie {

struct CorpusEntry;

// Linear-chain CRF over K tags. Emissions are [T x K]; transitions are
// [(K+2) x (K+2)], indexed (previous, next), where row K is the begin state
// and column K+1 the end state. A sequence y scores
//   tr[K][y0] + sum_t em[t][y_t] + sum_t tr[y_{t-1}][y_t] + tr[y_{T-1}][K+1].
namespace crf {

double log_partition(const Matrix& emissions, const Matrix& transitions);
// Same quantity from the backward recursion.
double log_partition_backward(const Matrix& emissions, const Matrix& transitions);
double sequence_score(const Matrix& emissions, const Matrix& transitions, std::span<const Tag> tags);

struct Marginals {
  double log_z = 0.0;
  Matrix node;  // [T x K] posterior tag probabilities
  Matrix edge;  // [(K+2) x (K+2)] expected transition counts incl. begin/end
};
Marginals marginals(const Matrix& emissions, const Matrix& transitions);

// Ties go to the lowest tag index, both at each backpointer and at the end.
TagSequence viterbi(const Matrix& emissions, const Matrix& transitions, double* best_score = nullptr);

}  // namespace crf

class EmissionScorer {
 public:
  virtual ~EmissionScorer() = default;
  virtual std::size_t num_tags() const = 0;
  virtual Matrix emissions(std::u32string_view text) const = 0;
};

class CrfModel : public EmissionScorer {
 public:
  CrfModel() : CrfModel(0, FeatureConfig{}) {}
  CrfModel(std::size_t num_entity_types, FeatureConfig config);

  std::size_t num_tags() const override { return weights_.outputs(); }
  std::size_t num_entity_types() const { return num_entity_types_; }
  const FeatureConfig& feature_config() const { return extractor_.config(); }
  const FeatureExtractor& extractor() const { return extractor_; }

  Matrix emissions(std::u32string_view text) const override;
  Matrix emissions(const FeatureSeq& features) const;

  SparseWeights& emission_weights() { return weights_; }
  const SparseWeights& emission_weights() const { return weights_; }
  Matrix& transitions() { return transitions_; }
  const Matrix& transitions() const { return transitions_; }

  bool is_finite() const;
  bool same_weights(const CrfModel& other) const;

 private:
  std::size_t num_entity_types_;
  FeatureExtractor extractor_;
  SparseWeights weights_;
  Matrix transitions_;
};

double log_partition(const CrfModel& model, std::u32string_view text);
TagSequence viterbi(const CrfModel& model, std::u32string_view text);

struct CrfGradient {
  SparseWeights emission;  // same feature columns as touched by the instance
  Matrix transitions;
};

struct NllResult {
  double loss = 0.0;
  CrfGradient gradient;
};

// loss = log Z - score(gold) + l2_penalty/2 * ||emission weights||^2.
// The penalty covers emission weights only.
NllResult nll_and_gradient(const CrfModel& model, const FeatureSeq& features, std::span<const Tag> gold,
                           double l2_penalty);
NllResult nll_and_gradient(const CrfModel& model, std::u32string_view text, std::span<const Tag> gold,
                           double l2_penalty);

// Entity recognition over a whole document: sentence segments are decoded
// independently and mapped back to document offsets.
std::set<Entity> predict_entities(const CrfModel& model, std::u32string_view text);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per-sequence loss over the epoch
  double dev_f1 = 0.0;
};

struct CrfTrainResult {
  CrfModel model;  // best dev checkpoint
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Training sequences are sentence segments that never cut a gold entity.
struct LabeledSequence {
  FeatureSeq features;
  TagSequence gold;
};
std::vector<LabeledSequence> make_sequences(std::span<const CorpusEntry> entries, const FeatureExtractor& extractor);

CrfTrainResult train_crf(std::span<const CorpusEntry> train, std::span<const CorpusEntry> dev,
                         std::size_t num_entity_types, const TrainConfig& config,
                         const FeatureConfig& features = {}, const EpochCallback& on_epoch = {});

}  // namespace medie
