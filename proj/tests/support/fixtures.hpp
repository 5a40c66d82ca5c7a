#pragma once

// Synthetic corpora for tests that need trainable data.

#include <array>
#include <string>
#include <vector>

#include "medie/corpus_tools.hpp"
#include "medie/scheme.hpp"
#include "medie/standoff.hpp"

namespace fixture {

inline medie::Corpus generated(std::size_t records, std::uint64_t seed, std::array<std::size_t, 3> counts,
                               std::size_t jobs = 1) {
  auto cfg = medie::GeneratorConfig::builtin();
  cfg.records = records;
  cfg.seed = seed;
  auto corpus = medie::generate(cfg, medie::builtin_scheme(), jobs);
  medie::SplitSpec spec;
  spec.counts = counts;
  medie::assign_splits(corpus, medie::split_records(corpus.record_ids(), spec, seed));
  return corpus;
}

inline std::vector<medie::CorpusEntry> entries(const medie::Corpus& corpus, const std::string& split) {
  std::vector<medie::CorpusEntry> out;
  for (const auto* e : corpus.with_split(split)) out.push_back(*e);
  return out;
}

inline std::vector<medie::Document> documents(const std::vector<medie::CorpusEntry>& entries) {
  std::vector<medie::Document> out;
  for (const auto& e : entries) out.push_back(e.doc);
  return out;
}

}  // namespace fixture
