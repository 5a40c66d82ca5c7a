#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numeric>

#include "fixtures.hpp"
#include "medie/span_models.hpp"
#include "medie/validator.hpp"

using namespace medie;

namespace {

const Scheme& S() { return builtin_scheme(); }
EntityTypeId id(const char* n) { return S().entity_id(n); }

Corpus respiratory() { return read_corpus(std::filesystem::path(MEDIE_TEST_DATA) / "respiratory", S()); }

}  // namespace

TEST_SUITE("span_models") {

TEST_CASE("pooling is the union of position features") {
  const auto fs = FeatureSeq::from_positions({{5, 1}, {1, 9}, {3}, {2}});
  CHECK(pool_span(fs, {id("Drug"), 0, 2}) == SpanRep{1, 5, 9});
  CHECK(pool_span(fs, {id("Drug"), 2, 4}) == SpanRep{2, 3});
  CHECK_THROWS_AS(pool_span(fs, {id("Drug"), 3, 5}), std::invalid_argument);
  CHECK_THROWS_AS(pool_span(fs, {id("Drug"), 2, 2}), std::invalid_argument);
}

TEST_CASE("attribute decisions") {
  AttributeModel m(S().num_attribute_types(), FeatureConfig{});
  const SpanRep rep{7};
  const auto sra = id("Self-Reported Abnormality");
  // All-zero logits give 0.5 everywhere, which does not exceed the threshold.
  CHECK(predict_attributes(m, rep, sra, S()).empty());

  const auto neg = S().attribute_id("Negation");
  m.head.bias[neg.index() + 1] = 3.0;
  m.head.bias[0] = -3.0;
  CHECK(predict_attributes(m, rep, sra, S()) == std::set<AttributeTypeId>{neg});
  // None above the threshold overrides everything.
  m.head.bias[0] = 3.0;
  CHECK(predict_attributes(m, rep, sra, S()).empty());
  // Types outside the attribute's domain are masked.
  m.head.bias[0] = -3.0;
  CHECK_FALSE(S().attribute_applies(neg, id("Department")));
  CHECK(predict_attributes(m, rep, id("Department"), S()).empty());
  // Weights on the pooled feature count too.
  m.head.bias[neg.index() + 1] = 0.0;
  m.head.tables[0].column(m.head.tables[0].ensure(7))[neg.index() + 1] = 1.0;
  CHECK(predict_attributes(m, rep, sra, S()).size() == 1);
  CHECK(predict_attributes(m, SpanRep{8}, sra, S()).empty());

  const auto p = attribute_probabilities(m, rep);
  CHECK(p[0] == doctest::Approx(1.0 / (1.0 + std::exp(3.0))));
}

TEST_CASE("relation decisions") {
  RelationModel m(S().num_relation_types(), FeatureConfig{});
  const SpanRep h{1}, t{2};
  const RelationTypeId r0(0), r1(1);
  const std::vector<RelationTypeId> allowed{r0, r1};
  CHECK_FALSE(predict_relation(m, h, t, allowed).has_value());  // all tied, None first
  m.head.bias[2] = 1.0;
  CHECK(predict_relation(m, h, t, allowed) == r1);
  m.head.bias[0] = 5.0;
  CHECK_FALSE(predict_relation(m, h, t, allowed).has_value());
  // A class outside `allowed` never wins, however large.
  m.head.bias[0] = 0.0;
  m.head.bias[5] = 100.0;
  CHECK(predict_relation(m, h, t, allowed) == r1);
  CHECK_FALSE(predict_relation(m, h, t, std::vector<RelationTypeId>{}).has_value());

  const auto p = relation_probabilities(m, h, t);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // Head and tail tables are separate.
  m.head.bias.assign(m.head.bias.size(), 0.0);
  m.head.tables[0].column(m.head.tables[0].ensure(1))[1] = 2.0;
  CHECK(predict_relation(m, h, t, allowed) == r0);
  CHECK_FALSE(predict_relation(m, t, h, allowed).has_value());
}

TEST_CASE("candidate pairs on the worked example") {
  const auto c = respiratory();
  const auto& ents = c.entries[0].gold.entities;
  const Entity t1{id("Self-Reported Abnormality"), 2, 6}, t5{id("Disease or Syndrome"), 35, 40};
  CHECK(span_gap(t1, t5) == 29);
  CHECK(span_gap(t5, t1) == 29);
  CHECK(span_gap(t1, t1) == 0);
  auto has = [](const std::vector<CandidatePair>& v, const Entity& h, const Entity& t) {
    return std::any_of(v.begin(), v.end(), [&](const CandidatePair& p) { return p.head == h && p.tail == t; });
  };
  CHECK(has(candidate_pairs(ents, S(), 29), t1, t5));
  CHECK_FALSE(has(candidate_pairs(ents, S(), 28), t1, t5));

  // Every gold relation of the example is a candidate at the default window.
  const auto all = candidate_pairs(ents, S());
  for (const auto& r : c.entries[0].gold.relations) CHECK(has(all, r.head, r.tail));
  for (const auto& p : all) {
    CHECK(p.head != p.tail);
    CHECK(span_gap(p.head, p.tail) <= 150);
    CHECK(p.allowed == S().allowed_relations(p.head.type, p.tail.type));
    CHECK_FALSE(p.allowed.empty());
  }
}

TEST_CASE("department entities never pair") {
  const std::set<Entity> ents{{id("Department"), 0, 2}, {id("Disease or Syndrome"), 3, 5},
                              {id("Self-Reported Abnormality"), 6, 8}};
  for (const auto& p : candidate_pairs(ents, S())) {
    CHECK(p.head.type != id("Department"));
    CHECK(p.tail.type != id("Department"));
  }
}

TEST_CASE("training reaches the relation and attribute targets") {
  const auto corpus = fixture::generated(160, 21, {120, 40, 0});
  const auto train = fixture::entries(corpus, "train"), dev = fixture::entries(corpus, "dev");
  auto cfg = TrainConfig::span_defaults();
  cfg.seed = 4;
  const auto rel = train_relation_model(train, dev, S(), cfg);
  CHECK(rel.log.best_dev_f1 >= 0.9);
  CHECK(rel.model.head.is_finite());
  const auto attr = train_attribute_model(train, dev, S(), cfg);
  CHECK(attr.log.best_dev_f1 >= 0.9);

  // Predictions are scheme-valid on gold entities.
  for (const auto& e : dev) {
    const FeatureExtractor fx(rel.model.features);
    const auto fs = fx.extract(e.doc.text);
    AnnotationSet pred;
    pred.entities = e.gold.entities;
    pred.relations = predict_document_relations(rel.model, fs, pred.entities, S());
    pred.attributes = predict_document_attributes(attr.model, fs, pred.entities, S());
    CHECK(validate(pred, e.doc.length(), S()).empty());
  }
}

TEST_CASE("training is deterministic and independent of jobs") {
  const auto corpus = fixture::generated(10, 22, {7, 3, 0});
  const auto train = fixture::entries(corpus, "train"), dev = fixture::entries(corpus, "dev");
  auto cfg = TrainConfig::span_defaults();
  cfg.max_epochs = 3;
  const auto a = train_relation_model(train, dev, S(), cfg);
  cfg.jobs = 4;
  const auto b = train_relation_model(train, dev, S(), cfg);
  CHECK(a.model.head.same_weights(b.model.head));
  const auto x = train_attribute_model(train, dev, S(), cfg);
  const auto y = train_attribute_model(train, dev, S(), cfg);
  CHECK(x.model.head.same_weights(y.model.head));
}

TEST_CASE("corpus without attributes trains to a None-only model") {
  auto corpus = fixture::generated(6, 23, {4, 2, 0});
  for (auto& e : corpus.entries) e.gold.attributes.clear();
  const auto train = fixture::entries(corpus, "train"), dev = fixture::entries(corpus, "dev");
  auto cfg = TrainConfig::span_defaults();
  cfg.max_epochs = 5;
  const auto r = train_attribute_model(train, dev, S(), cfg);
  CHECK(r.model.head.is_finite());
  for (const auto& e : dev) {
    const FeatureExtractor fx(r.model.features);
    CHECK(predict_document_attributes(r.model, fx.extract(e.doc.text), e.gold.entities, S()).empty());
  }
}

TEST_CASE("training input errors") {
  const auto corpus = fixture::generated(3, 24, {2, 1, 0});
  const auto train = fixture::entries(corpus, "train");
  const auto cfg = TrainConfig::span_defaults();
  CHECK_THROWS_AS(train_relation_model(train, {}, S(), cfg), TrainingError);
  CHECK_THROWS_AS(train_attribute_model({}, train, S(), cfg), TrainingError);
  CHECK_THROWS_AS(train_relation_model(train, train, S(), cfg, {}, -1), std::invalid_argument);
}

}
