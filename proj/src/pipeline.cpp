#include "medie/pipeline.hpp"

#include <stdexcept>

#include "medie/parallel.hpp"
#include "medie/standoff.hpp"

namespace medie {

AnnotationSet extract(const PipelineBundle& bundle, std::u32string_view text) {
  AnnotationSet out;
  if (text.empty()) return out;
  out.entities = predict_entities(bundle.crf, text);
  if (out.entities.empty()) return out;
  const FeatureSeq attr_features = FeatureExtractor(bundle.attr.features).extract(text);
  out.attributes = predict_document_attributes(bundle.attr, attr_features, out.entities, bundle.scheme);
  const FeatureSeq rel_features = bundle.rel.features == bundle.attr.features
                                      ? attr_features
                                      : FeatureExtractor(bundle.rel.features).extract(text);
  out.relations = predict_document_relations(bundle.rel, rel_features, out.entities, bundle.scheme);
  return out;
}

std::vector<AnnotationSet> extract_all(const PipelineBundle& bundle, std::span<const Document> docs, std::size_t jobs) {
  std::vector<AnnotationSet> out(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) { out[i] = extract(bundle, docs[i].text); });
  return out;
}

AnnotationSet drop_entities(const AnnotationSet& ann, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("drop rate must lie in [0, 1]");
  AnnotationSet out = ann;
  for (const auto& e : ann.entities) {
    if (rng.uniform() < rate) out.remove_entity(e);
  }
  return out;
}

std::vector<AnnotationSet> preannotate(const PipelineBundle& bundle, std::span<const Document> docs, double drop_rate,
                                       std::uint64_t seed, std::size_t jobs) {
  if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) throw std::invalid_argument("drop rate must lie in [0, 1]");
  std::vector<AnnotationSet> out(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, docs[i].doc_id));
    out[i] = drop_entities(extract(bundle, docs[i].text), drop_rate, rng);
  });
  return out;
}

PipelineTrainResult train_pipeline(std::span<const CorpusEntry> train, std::span<const CorpusEntry> dev,
                                   const Scheme& scheme, const PipelineTrainConfig& config) {
  PipelineTrainResult r;
  r.entity_log = train_crf(train, dev, scheme.num_entity_types(), config.entity, config.features);
  auto attr = train_attribute_model(train, dev, scheme, config.span, config.features, config.threshold);
  auto rel = train_relation_model(train, dev, scheme, config.span, config.features, config.window);
  r.bundle = PipelineBundle{std::move(r.entity_log.model), std::move(attr.model), std::move(rel.model), scheme};
  r.attribute_log = std::move(attr.log);
  r.relation_log = std::move(rel.log);
  return r;
}

}  // namespace medie
