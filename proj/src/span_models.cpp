#include "medie/span_models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "medie/evaluation.hpp"
#include "medie/random.hpp"
#include "medie/standoff.hpp"

namespace medie {

SpanRep pool_span(const FeatureSeq& doc_features, const Entity& entity) {
  if (entity.start < 0 || entity.end <= entity.start || static_cast<std::size_t>(entity.end) > doc_features.length()) {
    throw std::invalid_argument("pool_span: span [" + std::to_string(entity.start) + ", " + std::to_string(entity.end) +
                                ") is empty or outside the document");
  }
  SpanRep rep;
  for (auto t = entity.start; t < entity.end; ++t) {
    const auto fs = doc_features.at(static_cast<std::size_t>(t));
    rep.insert(rep.end(), fs.begin(), fs.end());
  }
  std::sort(rep.begin(), rep.end());
  rep.erase(std::unique(rep.begin(), rep.end()), rep.end());
  return rep;
}

LinearHead::LinearHead(std::size_t num_inputs, std::size_t outputs)
    : tables(num_inputs, SparseWeights(outputs)), bias(outputs, 0.0) {}

std::vector<double> LinearHead::logits(std::span<const SpanRep* const> inputs) const {
  if (inputs.size() != tables.size()) throw std::invalid_argument("LinearHead: wrong number of inputs");
  std::vector<double> z = bias;
  for (std::size_t j = 0; j < inputs.size(); ++j) tables[j].accumulate(*inputs[j], z);
  return z;
}

bool LinearHead::is_finite() const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(bias) && std::all_of(tables.begin(), tables.end(), [&](const SparseWeights& w) { return finite(w.values()); });
}

bool LinearHead::same_weights(const LinearHead& other) const {
  if (tables.size() != other.tables.size() || bias != other.bias) return false;
  for (std::size_t j = 0; j < tables.size(); ++j) {
    if (!tables[j].same_weights(other.tables[j])) return false;
  }
  return true;
}

AttributeModel::AttributeModel(std::size_t num_attribute_types, FeatureConfig config)
    : features(config), head(1, num_attribute_types + 1) {}

RelationModel::RelationModel(std::size_t num_relation_types, FeatureConfig config)
    : features(config), head(2, num_relation_types + 1) {}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

std::vector<double> attribute_probabilities(const AttributeModel& model, const SpanRep& rep) {
  const SpanRep* in[] = {&rep};
  auto z = model.head.logits(in);
  for (double& x : z) x = sigmoid(x);
  return z;
}

std::set<AttributeTypeId> predict_attributes(const AttributeModel& model, const SpanRep& rep, EntityTypeId type,
                                             const Scheme& scheme) {
  const auto p = attribute_probabilities(model, rep);
  std::set<AttributeTypeId> out;
  if (p[0] > model.threshold) return out;
  for (std::size_t a = 1; a < p.size(); ++a) {
    const AttributeTypeId id(a - 1);
    if (p[a] > model.threshold && scheme.attribute_applies(id, type)) out.insert(id);
  }
  return out;
}

std::vector<double> relation_probabilities(const RelationModel& model, const SpanRep& head, const SpanRep& tail) {
  const SpanRep* in[] = {&head, &tail};
  auto z = model.head.logits(in);
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& x : z) s += (x = std::exp(x - m));
  for (double& x : z) x /= s;
  return z;
}

std::optional<RelationTypeId> predict_relation(const RelationModel& model, const SpanRep& head, const SpanRep& tail,
                                               std::span<const RelationTypeId> allowed) {
  const SpanRep* in[] = {&head, &tail};
  const auto z = model.head.logits(in);
  std::vector<std::size_t> classes{0};
  for (auto r : allowed) classes.push_back(r.index() + 1);
  std::sort(classes.begin(), classes.end());
  std::size_t best = 0;
  for (auto c : classes) {
    if (z[c] > z[best]) best = c;
  }
  if (best == 0) return std::nullopt;
  return RelationTypeId(best - 1);
}

std::int32_t span_gap(const Entity& a, const Entity& b) {
  return std::max<std::int32_t>(0, std::max(a.start, b.start) - std::min(a.end, b.end));
}

std::vector<CandidatePair> candidate_pairs(const std::set<Entity>& entities, const Scheme& scheme, std::int32_t window) {
  std::vector<CandidatePair> out;
  for (const auto& h : entities) {
    for (const auto& t : entities) {
      if (h == t || span_gap(h, t) > window) continue;
      auto allowed = scheme.allowed_relations(h.type, t.type);
      if (!allowed.empty()) out.push_back({h, t, std::move(allowed)});
    }
  }
  return out;
}

std::set<Attribute> predict_document_attributes(const AttributeModel& model, const FeatureSeq& doc_features,
                                                const std::set<Entity>& entities, const Scheme& scheme) {
  std::set<Attribute> out;
  for (const auto& e : entities) {
    for (auto a : predict_attributes(model, pool_span(doc_features, e), e.type, scheme)) out.insert({a, e});
  }
  return out;
}

std::set<Relation> predict_document_relations(const RelationModel& model, const FeatureSeq& doc_features,
                                              const std::set<Entity>& entities, const Scheme& scheme) {
  std::map<Entity, SpanRep> reps;
  for (const auto& e : entities) reps.emplace(e, pool_span(doc_features, e));
  std::set<Relation> out;
  for (const auto& c : candidate_pairs(entities, scheme, model.window)) {
    if (auto r = predict_relation(model, reps.at(c.head), reps.at(c.tail), c.allowed)) {
      out.insert({*r, c.head, c.tail, {}});
    }
  }
  return out;
}

namespace {

// One training example: pooled inputs (one per weight table) plus targets.
struct SpanExample {
  std::vector<std::size_t> inputs;  // indices into the rep store
  std::vector<double> targets;      // attribute: 0/1 per class
  std::vector<bool> mask;           // relation: classes in the softmax
  std::size_t gold = 0;             // relation: gold class
};

// Fills dlogits with d(loss)/d(logits) and returns the loss.
using LossFn = double (*)(const SpanExample&, const std::vector<double>&, std::vector<double>&);

double bce_loss(const SpanExample& ex, const std::vector<double>& z, std::vector<double>& dz) {
  double loss = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    loss += softplus(z[c]) - ex.targets[c] * z[c];
    dz[c] = sigmoid(z[c]) - ex.targets[c];
  }
  return loss;
}

double masked_softmax_loss(const SpanExample& ex, const std::vector<double>& z, std::vector<double>& dz) {
  double m = -INFINITY;
  for (std::size_t c = 0; c < z.size(); ++c) {
    if (ex.mask[c]) m = std::max(m, z[c]);
  }
  double s = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    if (ex.mask[c]) s += std::exp(z[c] - m);
  }
  const double log_z = m + std::log(s);
  for (std::size_t c = 0; c < z.size(); ++c) {
    dz[c] = ex.mask[c] ? std::exp(z[c] - log_z) : 0.0;
  }
  dz[ex.gold] -= 1.0;
  return log_z - z[ex.gold];
}

template <typename DevF1>
SpanTrainLog train_head(LinearHead& head, const std::vector<SpanRep>& reps, const std::vector<SpanExample>& examples,
                        LossFn loss_fn, DevF1 dev_f1, const TrainConfig& config, const EpochCallback& on_epoch,
                        const char* task) {
  SpanTrainLog log;
  const std::size_t outputs = head.outputs();
  const std::size_t n_tables = head.tables.size();
  LinearHead best = head;
  AdamW optimizer(config);
  std::vector<AdamState> table_state(n_tables);
  AdamState bias_state;
  std::vector<std::vector<double>> table_grad(n_tables);
  std::vector<double> bias_grad(outputs);
  std::vector<double> dz(outputs);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, epoch));
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch_index) {
      const std::size_t n = std::min(config.batch_size, order.size() - b);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& ex = examples[order[b + i]];
        for (std::size_t j = 0; j < n_tables; ++j) {
          for (auto f : reps[ex.inputs[j]]) head.tables[j].ensure(f);
        }
      }
      for (std::size_t j = 0; j < n_tables; ++j) table_grad[j].assign(head.tables[j].values().size(), 0.0);
      std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(n);
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& ex = examples[order[b + i]];
        std::vector<const SpanRep*> in(n_tables);
        for (std::size_t j = 0; j < n_tables; ++j) in[j] = &reps[ex.inputs[j]];
        const auto z = head.logits(in);
        batch_loss += loss_fn(ex, z, dz);
        for (std::size_t c = 0; c < outputs; ++c) bias_grad[c] += scale * dz[c];
        for (std::size_t j = 0; j < n_tables; ++j) {
          for (auto f : *in[j]) {
            double* dst = table_grad[j].data() + head.tables[j].ensure(f) * outputs;
            for (std::size_t c = 0; c < outputs; ++c) dst[c] += scale * dz[c];
          }
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError(std::string("non-finite ") + task + " loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      loss_sum += batch_loss;
      std::vector<std::span<double>> groups;
      for (auto& g : table_grad) groups.emplace_back(g);
      groups.emplace_back(bias_grad);
      clip_global_norm(groups, config.grad_clip_l2);
      optimizer.begin_step();
      for (std::size_t j = 0; j < n_tables; ++j) optimizer.update(head.tables[j].values(), table_grad[j], table_state[j]);
      optimizer.update(head.bias, bias_grad, bias_state, false);
    }
    const double denom = examples.empty() ? 1.0 : static_cast<double>(examples.size());
    EpochLog entry{epoch, loss_sum / denom, dev_f1(head)};
    log.history.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (epoch == 1 || entry.dev_f1 > log.best_dev_f1) {
      log.best_dev_f1 = entry.dev_f1;
      log.best_epoch = epoch;
      best = head;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  head = std::move(best);
  return log;
}

void check_inputs(std::span<const CorpusEntry> train, std::span<const CorpusEntry> dev, const char* task) {
  if (train.empty()) throw TrainingError(std::string(task) + " training set is empty");
  if (dev.empty()) throw TrainingError(std::string(task) + " dev set is empty; it is required for early stopping");
}

}  // namespace

AttributeTrainResult train_attribute_model(std::span<const CorpusEntry> train, std::span<const CorpusEntry> dev,
                                           const Scheme& scheme, const TrainConfig& config,
                                           const FeatureConfig& features, double threshold,
                                           const EpochCallback& on_epoch) {
  config.check();
  check_inputs(train, dev, "attribute");
  const FeatureExtractor extractor(features);
  const std::size_t n_attr = scheme.num_attribute_types();
  std::vector<SpanRep> reps;
  std::vector<SpanExample> examples;
  for (const auto& entry : train) {
    const FeatureSeq fs = extractor.extract(entry.doc.text);
    for (const auto& e : entry.gold.entities) {
      SpanExample ex;
      ex.inputs = {reps.size()};
      reps.push_back(pool_span(fs, e));
      ex.targets.assign(n_attr + 1, 0.0);
      bool any = false;
      for (auto it = entry.gold.attributes.lower_bound(Attribute{AttributeTypeId(0), e});
           it != entry.gold.attributes.end() && it->entity == e; ++it) {
        ex.targets[it->type.index() + 1] = 1.0;
        any = true;
      }
      ex.targets[0] = any ? 0.0 : 1.0;
      examples.push_back(std::move(ex));
    }
  }

  std::vector<FeatureSeq> dev_features;
  for (const auto& entry : dev) dev_features.push_back(extractor.extract(entry.doc.text));

  AttributeTrainResult result;
  result.model = AttributeModel(n_attr, features);
  result.model.threshold = threshold;
  auto dev_f1 = [&](const LinearHead& head) {
    AttributeModel probe;
    probe.features = features;
    probe.head = head;
    probe.threshold = threshold;
    Counts total;
    for (std::size_t i = 0; i < dev.size(); ++i) {
      total += count_tuples(dev[i].gold.attributes,
                            predict_document_attributes(probe, dev_features[i], dev[i].gold.entities, scheme));
    }
    return total.f1();
  };
  result.log = train_head(result.model.head, reps, examples, bce_loss, dev_f1, config, on_epoch, "attribute");
  return result;
}

RelationTrainResult train_relation_model(std::span<const CorpusEntry> train, std::span<const CorpusEntry> dev,
                                         const Scheme& scheme, const TrainConfig& config,
                                         const FeatureConfig& features, std::int32_t window,
                                         const EpochCallback& on_epoch) {
  config.check();
  check_inputs(train, dev, "relation");
  if (window < 0) throw std::invalid_argument("relation window must be >= 0");
  const FeatureExtractor extractor(features);
  const std::size_t n_rel = scheme.num_relation_types();
  std::vector<SpanRep> reps;
  std::vector<SpanExample> examples;
  for (const auto& entry : train) {
    const FeatureSeq fs = extractor.extract(entry.doc.text);
    std::map<Entity, std::size_t> rep_of;
    for (const auto& e : entry.gold.entities) {
      rep_of.emplace(e, reps.size());
      reps.push_back(pool_span(fs, e));
    }
    // First gold type per ordered pair (set order is by head, tail, type).
    std::map<std::pair<Entity, Entity>, RelationTypeId> gold;
    for (const auto& r : entry.gold.relations) gold.emplace(std::pair{r.head, r.tail}, r.type);

    auto add = [&](const Entity& h, const Entity& t, std::span<const RelationTypeId> allowed, std::size_t cls) {
      SpanExample ex;
      ex.inputs = {rep_of.at(h), rep_of.at(t)};
      ex.mask.assign(n_rel + 1, false);
      ex.mask[0] = true;
      for (auto r : allowed) ex.mask[r.index() + 1] = true;
      ex.mask[cls] = true;
      ex.gold = cls;
      examples.push_back(std::move(ex));
    };
    std::set<std::pair<Entity, Entity>> seen;
    for (const auto& c : candidate_pairs(entry.gold.entities, scheme, window)) {
      auto it = gold.find({c.head, c.tail});
      add(c.head, c.tail, c.allowed, it == gold.end() ? 0 : it->second.index() + 1);
      seen.insert({c.head, c.tail});
    }
    // Gold pairs beyond the window still teach the positive class.
    for (const auto& [pair, type] : gold) {
      if (seen.count(pair) || !rep_of.count(pair.first) || !rep_of.count(pair.second)) continue;
      if (!scheme.relation_allows(type, pair.first.type, pair.second.type)) continue;
      const auto allowed = scheme.allowed_relations(pair.first.type, pair.second.type);
      add(pair.first, pair.second, allowed, type.index() + 1);
    }
  }

  std::vector<FeatureSeq> dev_features;
  for (const auto& entry : dev) dev_features.push_back(extractor.extract(entry.doc.text));

  RelationTrainResult result;
  result.model = RelationModel(n_rel, features);
  result.model.window = window;
  auto dev_f1 = [&](const LinearHead& head) {
    RelationModel probe;
    probe.features = features;
    probe.head = head;
    probe.window = window;
    Counts total;
    for (std::size_t i = 0; i < dev.size(); ++i) {
      AnnotationSet pred;
      pred.relations = predict_document_relations(probe, dev_features[i], dev[i].gold.entities, scheme);
      total += score(Task::Relation, dev[i].gold, pred, scheme).micro;
    }
    return total.f1();
  };
  result.log = train_head(result.model.head, reps, examples, masked_softmax_loss, dev_f1, config, on_epoch, "relation");
  return result;
}

}  // namespace medie
