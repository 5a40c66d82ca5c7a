#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "medie/scheme.hpp"
#include "medie/standoff.hpp"

namespace medie {

// ---- stratified sampling ----

struct SampleRecord {
  std::string record_id;
  std::string department;
  std::string condition;  // key for the frequency cap
};

struct SamplingConfig {
  std::map<std::string, std::size_t> quotas;  // per department
  std::optional<std::size_t> default_quota;   // departments not listed; unset = skip them
  std::size_t cap = 1;                        // max records per (department, condition)
  std::uint64_t seed = 0;

  void check() const;  // throws std::invalid_argument
};

// Selected record ids, sorted. Input order does not matter.
std::vector<std::string> stratified_sample(std::span<const SampleRecord> records, const SamplingConfig& config);

// Condition key per record: surface of the first entity (document order,
// then offset) of the given type; "-" when the record has none.
std::vector<SampleRecord> sample_records(const Corpus& corpus, EntityTypeId condition_type);

// ---- splitting ----

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SplitSpec {
  std::optional<std::array<std::size_t, 3>> counts;
  std::optional<std::array<double, 3>> ratios;

  // 300/100/100 for exactly 500 records, 60/20/20 percent otherwise.
  static SplitSpec defaults(std::size_t num_records);
  // Largest-remainder rounding for ratios.
  std::array<std::size_t, 3> resolve(std::size_t num_records) const;
};

struct SplitResult {
  std::vector<std::string> train, dev, test;  // each sorted
};

SplitResult split_records(std::vector<std::string> record_ids, const SplitSpec& spec, std::uint64_t seed);

// Sets every entry's split from its record; records in no list get "".
void assign_splits(Corpus& corpus, const SplitResult& split);

// ---- synthetic generator ----

class GeneratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AttributeCue {
  bool prefix = true;  // cue precedes the entity; otherwise follows it
  std::vector<std::string> forms;
};

struct GeneratorConfig {
  std::size_t records = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> departments;
  std::vector<std::string> sections;
  std::array<std::size_t, 2> sections_per_record{2, 3};
  std::array<std::size_t, 2> sentences_per_doc{2, 4};
  double relation_rate = 0.4;
  double near_miss_rate = 0.1;
  double distractor_rate = 0.15;
  double attribute_rate = 0.3;
  std::map<std::string, std::vector<std::string>> vocabulary;  // entity type -> surfaces; '#' is a random digit
  std::map<std::string, std::vector<std::string>> triggers;    // relation type -> trigger words
  std::map<std::string, AttributeCue> cues;                    // attribute type -> cue
  std::vector<std::string> entity_templates;
  std::vector<std::string> relation_templates;
  std::vector<std::string> near_miss_templates;
  std::vector<std::string> distractors;

  static GeneratorConfig parse(std::string_view json_text, const std::string& origin = "<generator>");
  static GeneratorConfig load(const std::filesystem::path& path);
  static GeneratorConfig builtin();

  // Every subtype needs vocabulary; every named type must exist in the scheme.
  void check(const Scheme& scheme) const;  // throws GeneratorError
};

std::string_view builtin_generator_text();

// Records rec00001.. each with several section documents. Each record draws
// from its own seed stream, so output is independent of the job count.
Corpus generate(const GeneratorConfig& config, const Scheme& scheme, std::size_t jobs = 1);

}  // namespace medie
