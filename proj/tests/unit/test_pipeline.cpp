#include "doctest.h"

#include "fixtures.hpp"
#include "medie/pipeline.hpp"
#include "medie/validator.hpp"
#include "oracles.hpp"

using namespace medie;

namespace {

const Scheme& S() { return builtin_scheme(); }

struct Trained {
  Corpus corpus;
  PipelineBundle bundle;
};

// One small pipeline shared by the cases below.
const Trained& trained() {
  static const Trained t = [] {
    Trained x;
    x.corpus = fixture::generated(24, 31, {16, 4, 4});
    PipelineTrainConfig cfg;
    cfg.entity.learning_rate = 0.05;
    cfg.entity.max_epochs = 4;
    cfg.span.max_epochs = 6;
    x.bundle = train_pipeline(fixture::entries(x.corpus, "train"), fixture::entries(x.corpus, "dev"), S(), cfg).bundle;
    return x;
  }();
  return t;
}

bool referentially_closed(const AnnotationSet& a) {
  for (const auto& r : a.relations) {
    if (!a.entities.count(r.head) || !a.entities.count(r.tail)) return false;
  }
  for (const auto& at : a.attributes) {
    if (!a.entities.count(at.entity)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("empty document gives an empty set") {
  CHECK(extract(trained().bundle, U"").empty());
}

TEST_CASE("extraction output is valid and complete") {
  const auto test = fixture::entries(trained().corpus, "test");
  const auto docs = fixture::documents(test);
  const auto out = extract_all(trained().bundle, docs, 1);
  REQUIRE(out.size() == docs.size());
  std::size_t entities = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(validate(out[i], docs[i].length(), S()).empty());
    entities += out[i].entities.size();
  }
  CHECK(entities > 0);
}

TEST_CASE("job count does not change the output") {
  const auto docs = fixture::documents(fixture::entries(trained().corpus, "test"));
  CHECK(extract_all(trained().bundle, docs, 1) == extract_all(trained().bundle, docs, 4));
  CHECK(preannotate(trained().bundle, docs, 0.3, 5, 1) == preannotate(trained().bundle, docs, 0.3, 5, 3));
}

TEST_CASE("preannotation with rate 0 and 1") {
  const auto docs = fixture::documents(fixture::entries(trained().corpus, "test"));
  CHECK(preannotate(trained().bundle, docs, 0.0, 1) == extract_all(trained().bundle, docs));
  for (const auto& a : preannotate(trained().bundle, docs, 1.0, 1)) CHECK(a.empty());
  CHECK_THROWS_AS(preannotate(trained().bundle, docs, 1.5, 1), std::invalid_argument);
}

TEST_CASE("per-document streams ignore document order") {
  auto docs = fixture::documents(fixture::entries(trained().corpus, "test"));
  REQUIRE(docs.size() >= 2);
  const auto a = preannotate(trained().bundle, docs, 0.5, 9);
  std::reverse(docs.begin(), docs.end());
  auto b = preannotate(trained().bundle, docs, 0.5, 9);
  std::reverse(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("dropping keeps references closed") {
  Rng gen(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ann = oracle::random_valid_set(gen, 80, S());
    Rng rng(trial);
    const auto out = drop_entities(ann, 0.4, rng);
    CHECK(referentially_closed(out));
    for (const auto& e : out.entities) CHECK(ann.entities.count(e));
    // Everything that survives with both ends intact is kept.
    for (const auto& r : ann.relations) {
      if (out.entities.count(r.head) && out.entities.count(r.tail)) CHECK(out.relations.count(r));
    }
    for (const auto& a : ann.attributes) {
      if (out.entities.count(a.entity)) CHECK(out.attributes.count(a));
    }
  }
}

TEST_CASE("drop fraction tracks the rate") {
  Rng gen(42);
  for (double rate : {0.1, 0.3, 0.7}) {
    std::size_t before = 0, after = 0;
    Rng rng(7);
    while (before < 20000) {
      const auto ann = oracle::random_valid_set(gen, 200, S());
      before += ann.entities.size();
      after += drop_entities(ann, rate, rng).entities.size();
    }
    const double dropped = 1.0 - static_cast<double>(after) / static_cast<double>(before);
    CHECK(std::abs(dropped - rate) <= 0.02);
  }
}

TEST_CASE("training is deterministic") {
  const auto& c = trained().corpus;
  PipelineTrainConfig cfg;
  cfg.entity.max_epochs = 1;
  cfg.span.max_epochs = 1;
  const auto train = fixture::entries(c, "train"), dev = fixture::entries(c, "dev");
  const auto a = train_pipeline(train, dev, S(), cfg);
  cfg.entity.jobs = cfg.span.jobs = 3;
  const auto b = train_pipeline(train, dev, S(), cfg);
  CHECK(a.bundle.crf.same_weights(b.bundle.crf));
  CHECK(a.bundle.attr.head.same_weights(b.bundle.attr.head));
  CHECK(a.bundle.rel.head.same_weights(b.bundle.rel.head));
}

}
