#include "doctest.h"

#include "medie/checkpoint.hpp"
#include "oracles.hpp"

using namespace medie;

namespace {

const Scheme& S() { return builtin_scheme(); }

void fill(Rng& rng, SparseWeights& w, std::size_t columns, std::uint32_t dim) {
  for (std::size_t i = 0; i < columns; ++i) {
    for (auto& x : w.column(w.ensure(static_cast<std::uint32_t>(rng.below(dim))))) x = rng.uniform(-3, 3);
  }
}

PipelineBundle random_bundle(Rng& rng) {
  FeatureConfig fc;
  fc.window = 1;
  fc.hash_dim = 1u << 12;
  PipelineBundle b{CrfModel(S().num_entity_types(), fc), AttributeModel(S().num_attribute_types(), fc),
                   RelationModel(S().num_relation_types(), fc), S()};
  fill(rng, b.crf.emission_weights(), 20, fc.hash_dim);
  for (auto& x : b.crf.transitions().data()) x = rng.uniform(-1, 1);
  b.crf.transitions()(0, 2) = -std::numeric_limits<double>::infinity();
  fill(rng, b.attr.head.tables[0], 10, fc.hash_dim);
  for (auto& x : b.attr.head.bias) x = rng.uniform(-1, 1);
  b.attr.threshold = 0.4;
  fill(rng, b.rel.head.tables[0], 10, fc.hash_dim);
  fill(rng, b.rel.head.tables[1], 7, fc.hash_dim);
  b.rel.window = 42;
  return b;
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("round trips are exact") {
  Rng rng(71);
  const auto b = random_bundle(rng);

  const auto crf = load_crf(save_crf(b.crf));
  CHECK(crf.same_weights(b.crf));
  CHECK(crf.feature_config() == b.crf.feature_config());
  CHECK(crf.transitions() == b.crf.transitions());

  const auto attr = load_attribute_model(save_attribute_model(b.attr));
  CHECK(attr.head.same_weights(b.attr.head));
  CHECK(attr.threshold == 0.4);
  const auto rel = load_relation_model(save_relation_model(b.rel));
  CHECK(rel.head.same_weights(b.rel.head));
  CHECK(rel.window == 42);

  const auto [a2, r2] = load_span_models(save_span_models(b.attr, b.rel));
  CHECK(a2.head.same_weights(b.attr.head));
  CHECK(r2.head.same_weights(b.rel.head));

  const auto bytes = save_bundle(b);
  const auto back = load_bundle(bytes);
  CHECK(back.crf.same_weights(b.crf));
  CHECK(back.scheme.source_text() == S().source_text());
  CHECK(save_bundle(back) == bytes);
  CHECK(checkpoint_kind(bytes) == "pipeline");
  CHECK(checkpoint_kind(save_crf(b.crf)) == "crf");
}

TEST_CASE("saving is deterministic") {
  Rng a(72), b(72);
  CHECK(save_bundle(random_bundle(a)) == save_bundle(random_bundle(b)));
}

TEST_CASE("damaged files are rejected") {
  Rng rng(73);
  const auto b = random_bundle(rng);
  const auto bytes = save_attribute_model(b.attr);
  for (std::size_t n = 0; n < bytes.size(); n += 1 + n / 16) {
    CHECK_THROWS_AS(load_attribute_model(std::string_view(bytes).substr(0, n)), CheckpointError);
  }
  CHECK_THROWS_AS(load_attribute_model(bytes + "x"), CheckpointError);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(load_attribute_model(bad), CheckpointError);
  bad = bytes;
  bad[9] = static_cast<char>(kCheckpointVersion + 1);
  CHECK_THROWS_AS(load_attribute_model(bad), CheckpointError);
  CHECK_THROWS_AS(load_relation_model(bytes), CheckpointError);
  CHECK_THROWS_AS(load_bundle(""), CheckpointError);
}

}
