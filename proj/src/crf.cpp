#include "medie/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "medie/evaluation.hpp"
#include "medie/parallel.hpp"
#include "medie/random.hpp"
#include "medie/standoff.hpp"
#include "medie/text.hpp"

namespace medie {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

void check_shapes(const Matrix& em, const Matrix& tr) {
  const std::size_t k = em.cols();
  if (tr.rows() != k + 2 || tr.cols() != k + 2) {
    throw std::invalid_argument("crf: transition matrix must be (K+2)x(K+2) for K=" + std::to_string(k));
  }
}

// alpha[t][j]: log-sum of all prefixes ending in tag j at t.
Matrix forward(const Matrix& em, const Matrix& tr) {
  const std::size_t T = em.rows(), K = em.cols();
  Matrix alpha(T, K, kNegInf);
  if (T == 0) return alpha;
  for (std::size_t j = 0; j < K; ++j) alpha(0, j) = tr(K, j) + em(0, j);
  std::vector<double> buf(K);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t i = 0; i < K; ++i) buf[i] = alpha(t - 1, i) + tr(i, j);
      alpha(t, j) = log_sum_exp(buf) + em(t, j);
    }
  }
  return alpha;
}

// beta[t][i]: log-sum of all suffixes after tag i at t, including the end transition.
Matrix backward(const Matrix& em, const Matrix& tr) {
  const std::size_t T = em.rows(), K = em.cols();
  Matrix beta(T, K, kNegInf);
  if (T == 0) return beta;
  for (std::size_t i = 0; i < K; ++i) beta(T - 1, i) = tr(i, K + 1);
  std::vector<double> buf(K);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) buf[j] = tr(i, j) + em(t + 1, j) + beta(t + 1, j);
      beta(t, i) = log_sum_exp(buf);
    }
  }
  return beta;
}

}  // namespace

namespace crf {

double log_partition(const Matrix& em, const Matrix& tr) {
  check_shapes(em, tr);
  const std::size_t T = em.rows(), K = em.cols();
  if (T == 0) return tr(K, K + 1);
  const Matrix alpha = forward(em, tr);
  std::vector<double> buf(K);
  for (std::size_t j = 0; j < K; ++j) buf[j] = alpha(T - 1, j) + tr(j, K + 1);
  return log_sum_exp(buf);
}

double log_partition_backward(const Matrix& em, const Matrix& tr) {
  check_shapes(em, tr);
  const std::size_t T = em.rows(), K = em.cols();
  if (T == 0) return tr(K, K + 1);
  const Matrix beta = backward(em, tr);
  std::vector<double> buf(K);
  for (std::size_t j = 0; j < K; ++j) buf[j] = tr(K, j) + em(0, j) + beta(0, j);
  return log_sum_exp(buf);
}

double sequence_score(const Matrix& em, const Matrix& tr, std::span<const Tag> tags) {
  check_shapes(em, tr);
  const std::size_t T = em.rows(), K = em.cols();
  if (tags.size() != T) throw std::invalid_argument("crf: tag sequence length does not match emissions");
  std::size_t prev = K;
  double s = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    if (tags[t] >= K) throw std::invalid_argument("crf: tag index out of range");
    s += tr(prev, tags[t]) + em(t, tags[t]);
    prev = tags[t];
  }
  return s + tr(prev, K + 1);
}

Marginals marginals(const Matrix& em, const Matrix& tr) {
  check_shapes(em, tr);
  const std::size_t T = em.rows(), K = em.cols();
  Marginals m;
  m.node = Matrix(T, K);
  m.edge = Matrix(K + 2, K + 2);
  if (T == 0) {
    m.log_z = tr(K, K + 1);
    m.edge(K, K + 1) = 1.0;
    return m;
  }
  const Matrix alpha = forward(em, tr);
  const Matrix beta = backward(em, tr);
  std::vector<double> buf(K);
  for (std::size_t j = 0; j < K; ++j) buf[j] = alpha(T - 1, j) + tr(j, K + 1);
  m.log_z = log_sum_exp(buf);
  const double z = m.log_z;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < K; ++j) m.node(t, j) = std::exp(alpha(t, j) + beta(t, j) - z);
  }
  for (std::size_t j = 0; j < K; ++j) {
    m.edge(K, j) = m.node(0, j);
    m.edge(j, K + 1) = m.node(T - 1, j);
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t i = 0; i < K; ++i) {
      const double a = alpha(t - 1, i);
      if (a == kNegInf) continue;
      for (std::size_t j = 0; j < K; ++j) {
        m.edge(i, j) += std::exp(a + tr(i, j) + em(t, j) + beta(t, j) - z);
      }
    }
  }
  return m;
}

TagSequence viterbi(const Matrix& em, const Matrix& tr, double* best_score) {
  check_shapes(em, tr);
  const std::size_t T = em.rows(), K = em.cols();
  TagSequence out(T);
  if (T == 0) {
    if (best_score) *best_score = tr(K, K + 1);
    return out;
  }
  Matrix delta(T, K);
  std::vector<Tag> back(T * K, 0);
  for (std::size_t j = 0; j < K; ++j) delta(0, j) = tr(K, j) + em(0, j);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < K; ++j) {
      std::size_t arg = 0;
      double best = delta(t - 1, 0) + tr(0, j);
      for (std::size_t i = 1; i < K; ++i) {
        const double c = delta(t - 1, i) + tr(i, j);
        if (c > best) {
          best = c;
          arg = i;
        }
      }
      delta(t, j) = best + em(t, j);
      back[t * K + j] = static_cast<Tag>(arg);
    }
  }
  std::size_t last = 0;
  double best = delta(T - 1, 0) + tr(0, K + 1);
  for (std::size_t j = 1; j < K; ++j) {
    const double c = delta(T - 1, j) + tr(j, K + 1);
    if (c > best) {
      best = c;
      last = j;
    }
  }
  if (best_score) *best_score = best;
  out[T - 1] = static_cast<Tag>(last);
  for (std::size_t t = T - 1; t > 0; --t) out[t - 1] = back[t * K + out[t]];
  return out;
}

}  // namespace crf

CrfModel::CrfModel(std::size_t num_entity_types, FeatureConfig config)
    : num_entity_types_(num_entity_types),
      extractor_(config),
      weights_(TagSet(num_entity_types).size()),
      transitions_(TagSet(num_entity_types).size() + 2, TagSet(num_entity_types).size() + 2) {}

Matrix CrfModel::emissions(std::u32string_view text) const { return emissions(extractor_.extract(text)); }

Matrix CrfModel::emissions(const FeatureSeq& features) const {
  Matrix em(features.length(), num_tags());
  for (std::size_t t = 0; t < features.length(); ++t) weights_.accumulate(features.at(t), em.row(t));
  return em;
}

bool CrfModel::is_finite() const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(weights_.values()) && finite(transitions_.data());
}

bool CrfModel::same_weights(const CrfModel& other) const {
  return num_entity_types_ == other.num_entity_types_ && feature_config() == other.feature_config() &&
         weights_.same_weights(other.weights_) && transitions_ == other.transitions_;
}

double log_partition(const CrfModel& model, std::u32string_view text) {
  return crf::log_partition(model.emissions(text), model.transitions());
}

TagSequence viterbi(const CrfModel& model, std::u32string_view text) {
  return crf::viterbi(model.emissions(text), model.transitions());
}

NllResult nll_and_gradient(const CrfModel& model, const FeatureSeq& features, std::span<const Tag> gold,
                           double l2_penalty) {
  const Matrix em = model.emissions(features);
  const Matrix& tr = model.transitions();
  const std::size_t T = em.rows(), K = em.cols();
  if (gold.size() != T) throw std::invalid_argument("nll_and_gradient: gold length does not match the sequence");
  const crf::Marginals m = crf::marginals(em, tr);
  NllResult r;
  r.loss = m.log_z - crf::sequence_score(em, tr, gold);

  r.gradient.emission = SparseWeights(K);
  for (std::size_t t = 0; t < T; ++t) {
    for (auto f : features.at(t)) {
      auto col = r.gradient.emission.column(r.gradient.emission.ensure(f));
      for (std::size_t k = 0; k < K; ++k) col[k] += m.node(t, k);
      col[gold[t]] -= 1.0;
    }
  }
  r.gradient.transitions = m.edge;
  std::size_t prev = K;
  for (std::size_t t = 0; t < T; ++t) {
    r.gradient.transitions(prev, gold[t]) -= 1.0;
    prev = gold[t];
  }
  r.gradient.transitions(prev, K + 1) -= 1.0;

  if (l2_penalty != 0.0) {
    const SparseWeights& w = model.emission_weights();
    r.loss += 0.5 * l2_penalty * w.squared_norm();
    for (std::size_t s = 0; s < w.num_columns(); ++s) {
      auto src = w.column(s);
      auto dst = r.gradient.emission.column(r.gradient.emission.ensure(w.features()[s]));
      for (std::size_t k = 0; k < K; ++k) dst[k] += l2_penalty * src[k];
    }
  }
  return r;
}

NllResult nll_and_gradient(const CrfModel& model, std::u32string_view text, std::span<const Tag> gold,
                           double l2_penalty) {
  return nll_and_gradient(model, model.extractor().extract(text), gold, l2_penalty);
}

std::set<Entity> predict_entities(const CrfModel& model, std::u32string_view text) {
  std::set<Entity> out;
  for (const Segment& seg : segment_sentences(text)) {
    const auto tags = viterbi(model, text.substr(seg.start, seg.end - seg.start));
    for (Entity e : bio_decode(tags)) {
      e.start += static_cast<std::int32_t>(seg.start);
      e.end += static_cast<std::int32_t>(seg.start);
      out.insert(e);
    }
  }
  return out;
}

std::vector<LabeledSequence> make_sequences(std::span<const CorpusEntry> entries, const FeatureExtractor& extractor) {
  std::vector<LabeledSequence> out;
  for (const auto& entry : entries) {
    const std::u32string& text = entry.doc.text;
    std::vector<bool> no_break(text.size(), false);
    for (const auto& e : entry.gold.entities) {
      for (auto p = e.start + 1; p < e.end && p < static_cast<std::int32_t>(text.size()); ++p) no_break[p] = true;
    }
    auto it = entry.gold.entities.begin();
    for (const Segment& seg : segment_sentences(text, 256, &no_break)) {
      std::set<Entity> local;
      for (; it != entry.gold.entities.end() && static_cast<std::size_t>(it->start) < seg.end; ++it) {
        Entity e = *it;
        e.start -= static_cast<std::int32_t>(seg.start);
        e.end -= static_cast<std::int32_t>(seg.start);
        local.insert(e);
      }
      LabeledSequence seq;
      try {
        seq.gold = bio_encode(local, seg.end - seg.start);
      } catch (const BioError& err) {
        throw TrainingError("document '" + entry.doc.doc_id + "': " + err.what());
      }
      seq.features = extractor.extract(std::u32string_view(text).substr(seg.start, seg.end - seg.start));
      out.push_back(std::move(seq));
    }
  }
  return out;
}

namespace {

struct ItemGradient {
  double loss = 0.0;
  Matrix d_emission;  // [T x K]
  Matrix d_transition;
};

ItemGradient item_gradient(const CrfModel& model, const LabeledSequence& seq) {
  const Matrix em = model.emissions(seq.features);
  const Matrix& tr = model.transitions();
  const std::size_t T = em.rows(), K = em.cols();
  crf::Marginals m = crf::marginals(em, tr);
  ItemGradient g;
  g.loss = m.log_z - crf::sequence_score(em, tr, seq.gold);
  g.d_emission = std::move(m.node);
  g.d_transition = std::move(m.edge);
  std::size_t prev = K;
  for (std::size_t t = 0; t < T; ++t) {
    g.d_emission(t, seq.gold[t]) -= 1.0;
    g.d_transition(prev, seq.gold[t]) -= 1.0;
    prev = seq.gold[t];
  }
  g.d_transition(prev, K + 1) -= 1.0;
  return g;
}

double dev_entity_f1(const CrfModel& model, std::span<const CorpusEntry> dev, std::size_t jobs) {
  std::vector<Counts> counts(dev.size());
  parallel_for(dev.size(), jobs, [&](std::size_t i) {
    counts[i] = count_tuples(dev[i].gold.entities, predict_entities(model, dev[i].doc.text));
  });
  Counts total;
  for (const auto& c : counts) total += c;
  return total.f1();
}

}  // namespace

CrfTrainResult train_crf(std::span<const CorpusEntry> train, std::span<const CorpusEntry> dev,
                         std::size_t num_entity_types, const TrainConfig& config, const FeatureConfig& features,
                         const EpochCallback& on_epoch) {
  config.check();
  if (train.empty()) throw TrainingError("entity training set is empty");
  if (dev.empty()) throw TrainingError("entity dev set is empty; it is required for early stopping");

  CrfModel model(num_entity_types, features);
  const std::vector<LabeledSequence> seqs = make_sequences(train, model.extractor());
  if (seqs.empty()) throw TrainingError("entity training set has no characters");
  const std::size_t K = model.num_tags();

  AdamW optimizer(config);
  AdamState emission_state, transition_state;
  std::vector<double> emission_grad;
  Matrix transition_grad(K + 2, K + 2);

  CrfTrainResult result;
  std::size_t stale = 0;
  std::vector<std::size_t> order(seqs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<ItemGradient> items;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, epoch));
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch_index) {
      const std::size_t n = std::min(config.batch_size, order.size() - b);
      items.assign(n, {});
      parallel_for(n, config.jobs, [&](std::size_t i) { items[i] = item_gradient(model, seqs[order[b + i]]); });

      SparseWeights& w = model.emission_weights();
      for (std::size_t i = 0; i < n; ++i) {
        const FeatureSeq& fs = seqs[order[b + i]].features;
        for (std::size_t t = 0; t < fs.length(); ++t) {
          for (auto f : fs.at(t)) w.ensure(f);
        }
      }
      emission_grad.assign(w.values().size(), 0.0);
      std::fill(transition_grad.data().begin(), transition_grad.data().end(), 0.0);
      const double scale = 1.0 / static_cast<double>(n);
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const ItemGradient& g = items[i];
        batch_loss += g.loss;
        const FeatureSeq& fs = seqs[order[b + i]].features;
        for (std::size_t t = 0; t < fs.length(); ++t) {
          const auto row = g.d_emission.row(t);
          for (auto f : fs.at(t)) {
            double* dst = emission_grad.data() + w.ensure(f) * K;
            for (std::size_t k = 0; k < K; ++k) dst[k] += scale * row[k];
          }
        }
        for (std::size_t x = 0; x < transition_grad.data().size(); ++x) {
          transition_grad.data()[x] += scale * g.d_transition.data()[x];
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite entity loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      loss_sum += batch_loss;

      const std::span<double> groups[] = {emission_grad, transition_grad.data()};
      clip_global_norm(groups, config.grad_clip_l2);
      optimizer.begin_step();
      optimizer.update(w.values(), emission_grad, emission_state);
      optimizer.update(model.transitions().data(), transition_grad.data(), transition_state, false);
    }

    EpochLog log{epoch, loss_sum / static_cast<double>(seqs.size()), dev_entity_f1(model, dev, config.jobs)};
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);
    if (epoch == 1 || log.dev_f1 > result.best_dev_f1) {
      result.best_dev_f1 = log.dev_f1;
      result.best_epoch = epoch;
      result.model = model;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace medie
