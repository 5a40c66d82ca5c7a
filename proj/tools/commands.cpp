#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "medie/bio.hpp"
#include "medie/checkpoint.hpp"
#include "medie/corpus_tools.hpp"
#include "medie/evaluation.hpp"
#include "medie/learning_curve.hpp"
#include "medie/parallel.hpp"
#include "medie/pipeline.hpp"
#include "medie/standoff.hpp"
#include "medie/text.hpp"
#include "medie/train_config.hpp"
#include "medie/validator.hpp"

namespace medie::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// ---- shared helpers ----

Scheme load_scheme(const Globals& g) { return g.scheme.empty() ? builtin_scheme() : Scheme::load(g.scheme); }

// A directory with manifest.jsonl is an internal corpus; anything else is
// read as a plain standoff directory.
Corpus load_corpus(const fs::path& dir, const Scheme& scheme) {
  if (!fs::is_directory(dir)) throw CorpusError("not a directory: '" + dir.string() + "'");
  return fs::exists(dir / "manifest.jsonl") ? read_corpus(dir, scheme) : read_standoff_dir(dir, scheme);
}

std::size_t count_violations(const Corpus& corpus, const Scheme& scheme) {
  std::size_t n = 0;
  for (const auto& e : corpus.entries) n += validate(e.gold, e.doc.length(), scheme).size();
  return n;
}

// Ingested annotations are checked once; violations warn unless --strict.
void check_ingested(const Corpus& corpus, const Scheme& scheme, const Globals& g, const std::string& what) {
  const std::size_t n = count_violations(corpus, scheme);
  if (n == 0) return;
  const std::string msg = what + " has " + std::to_string(n) + " scheme violation(s); see `medie validate`";
  if (g.strict) throw StrictFailure(msg);
  std::cerr << "warning: " << msg << "\n";
}

// An empty split name selects everything; a named split must be non-empty.
std::vector<CorpusEntry> select_split(const Corpus& corpus, const std::string& split) {
  std::vector<CorpusEntry> out;
  for (const auto& e : corpus.entries) {
    if (split.empty() || e.split == split) out.push_back(e);
  }
  if (!split.empty() && out.empty()) {
    throw CorpusError("corpus has no '" + split + "' documents (assign splits with `medie split`)");
  }
  return out;
}

std::vector<CorpusEntry> require_split(const Corpus& corpus, const std::string& split) {
  if (split.empty()) throw CorpusError("a split name is required");
  return select_split(corpus, split);
}

std::vector<Document> documents_of(std::span<const CorpusEntry> entries) {
  std::vector<Document> docs;
  docs.reserve(entries.size());
  for (const auto& e : entries) docs.push_back(e.doc);
  return docs;
}

void write_corpus_as(const fs::path& dir, const Corpus& corpus, const Scheme& scheme, const std::string& format) {
  if (format == "standoff") {
    write_standoff_dir(dir, corpus, scheme);
  } else {
    write_corpus(dir, corpus, scheme);
  }
}

PipelineTrainConfig train_config(const Globals& g) {
  PipelineTrainConfig c = g.config.empty() ? PipelineTrainConfig{} : load_train_config(g.config);
  c.entity.seed = c.span.seed = g.seed;
  c.entity.jobs = c.span.jobs = g.jobs;
  return c;
}

PipelineBundle load_models(const std::string& entity_path, const std::string& span_path, const Scheme& scheme) {
  CrfModel crf = load_crf(read_file(entity_path));
  auto [attr, rel] = load_span_models(read_file(span_path));
  if (crf.num_entity_types() != scheme.num_entity_types()) {
    throw CheckpointError(entity_path + ": model has " + std::to_string(crf.num_entity_types()) +
                          " entity types, scheme has " + std::to_string(scheme.num_entity_types()));
  }
  if (attr.num_attribute_types() != scheme.num_attribute_types() ||
      rel.num_relation_types() != scheme.num_relation_types()) {
    throw CheckpointError(span_path + ": model type counts do not match the scheme");
  }
  return {std::move(crf), std::move(attr), std::move(rel), scheme};
}

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

std::string prf(const Counts& c) { return fmt("P=%.4f R=%.4f F1=%.4f", c.precision(), c.recall(), c.f1()); }

std::string epoch_json(const std::string& model, const EpochLog& l) {
  ordered_json j{{"model", model}, {"epoch", l.epoch}, {"train_loss", l.train_loss}, {"dev_f1", l.dev_f1}};
  return j.dump() + "\n";
}

void print_epoch(const std::string& model, const EpochLog& l) {
  std::cerr << model << " epoch " << l.epoch << fmt("  loss %.6f  dev F1 %.4f", l.train_loss, l.dev_f1)
            << "\n";
}

// ---- run manifest ----

ordered_json option_snapshot(const CLI::App& sub, const Globals& g) {
  ordered_json j;
  j["scheme"] = g.scheme.empty() ? "builtin" : g.scheme;
  j["seed"] = g.seed;
  j["jobs"] = g.jobs;
  j["config"] = g.config;
  j["strict"] = g.strict;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    const auto& res = opt->results();
    if (res.empty()) {
      j[name] = opt->get_default_str();
    } else if (opt->get_expected_max() > 1) {
      j[name] = res;
    } else {
      j[name] = res.back();
    }
  }
  return j;
}

class RunManifest {
 public:
  RunManifest(const CLI::App& sub, const Globals& g)
      : started_(std::chrono::system_clock::now()), t0_(std::chrono::steady_clock::now()) {
    doc_["tool"] = "medie";
    doc_["version"] = MEDIE_VERSION;
    doc_["command"] = sub.get_name();
    doc_["seed"] = g.seed;
    doc_["options"] = option_snapshot(sub, g);
    doc_["inputs"] = ordered_json::array();
    doc_["outputs"] = ordered_json::array();
  }

  void input(const std::string& p) { doc_["inputs"].push_back(p); }
  void output_file(const std::string& p) {
    doc_["outputs"].push_back(p);
    targets_.push_back(p + ".run.json");
  }
  void output_dir(const std::string& p) {
    doc_["outputs"].push_back(p);
    targets_.push_back((fs::path(p) / "run.json").string());
  }
  void config(ordered_json c) { doc_["config"] = std::move(c); }

  // Timestamps are the only fields that differ between identical runs.
  void write() {
    const std::time_t t = std::chrono::system_clock::to_time_t(started_);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    ordered_json out = doc_;
    out["started_at"] = stamp;
    out["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    const std::string text = out.dump(2) + "\n";
    for (const auto& target : targets_) write_file_atomic(target, text);
  }

 private:
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point t0_;
  ordered_json doc_;
  std::vector<std::string> targets_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : split(s, ',')) out.emplace_back(trim(part));
  return out;
}

template <typename T, std::size_t N>
std::array<T, N> parse_triple(const std::string& s, const char* what) {
  const auto parts = split_list(s);
  if (parts.size() != N) throw std::invalid_argument(std::string(what) + " needs " + std::to_string(N) + " values");
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t used = 0;
    if constexpr (std::is_floating_point_v<T>) {
      out[i] = std::stod(parts[i], &used);
    } else {
      out[i] = std::stoul(parts[i], &used);
    }
    if (used != parts[i].size()) throw std::invalid_argument(std::string(what) + ": bad value '" + parts[i] + "'");
  }
  return out;
}

// ---- subcommands ----

struct Ctx {
  CLI::App* sub;
  Globals* g;
};

Runner add_validate(Ctx c) {
  auto o = std::make_shared<std::pair<std::string, std::string>>();
  c.sub->add_option("--corpus", o->first, "Corpus directory (internal or standoff)")->required();
  c.sub->add_option("--report", o->second, "Write the violation report as JSON lines");
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->first);
    const Corpus corpus = load_corpus(o->first, scheme);
    std::vector<std::vector<Violation>> found(corpus.entries.size());
    parallel_for(corpus.entries.size(), c.g->jobs, [&](std::size_t i) {
      found[i] = validate(corpus.entries[i].gold, corpus.entries[i].doc.length(), scheme);
    });
    std::string report;
    std::size_t total = 0, bad_docs = 0;
    for (std::size_t i = 0; i < found.size(); ++i) {
      const auto& id = corpus.entries[i].doc.doc_id;
      bad_docs += !found[i].empty();
      for (const auto& v : found[i]) {
        ++total;
        std::cout << id << "\t" << to_string(v.kind) << "\t" << v.message << "\n";
        report += ordered_json{{"doc_id", id}, {"kind", to_string(v.kind)}, {"message", v.message}}.dump() + "\n";
      }
    }
    std::cout << corpus.entries.size() << " documents, " << total << " violations in " << bad_docs << " documents\n";
    if (!o->second.empty()) {
      write_file_atomic(o->second, report);
      run.output_file(o->second);
      run.write();
    }
    if (total > 0 && c.g->strict) throw StrictFailure("validation failed with " + std::to_string(total) + " violation(s)");
    return 0;
  };
}

Runner add_convert(Ctx c) {
  struct Opts {
    std::string in, out, to = "internal";
  };
  auto o = std::make_shared<Opts>();
  c.sub->add_option("--in", o->in, "Input corpus directory (internal or standoff)")->required();
  c.sub->add_option("--out", o->out, "Output directory")->required();
  c.sub->add_option("--to", o->to, "Output format")->check(CLI::IsMember({"internal", "standoff"}))->capture_default_str();
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->in);
    const Corpus corpus = load_corpus(o->in, scheme);
    check_ingested(corpus, scheme, *c.g, o->in);
    write_corpus_as(o->out, corpus, scheme, o->to);
    run.output_dir(o->out);
    run.write();
    std::cout << "converted " << corpus.entries.size() << " documents to " << o->to << " format\n";
    return 0;
  };
}

Runner add_encode(Ctx c) {
  struct Opts {
    std::string corpus, out, split;
    bool sentences = false;
  };
  auto o = std::make_shared<Opts>();
  c.sub->add_option("--corpus", o->corpus, "Corpus directory")->required();
  c.sub->add_option("--out", o->out, "BIO column file")->required();
  c.sub->add_option("--split", o->split, "Only documents of this split");
  c.sub->add_flag("--sentences", o->sentences, "One sequence per sentence instead of per document");
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->corpus);
    const Corpus corpus = load_corpus(o->corpus, scheme);
    check_ingested(corpus, scheme, *c.g, o->corpus);
    std::ostringstream out;
    std::size_t sequences = 0;
    for (const auto& e : select_split(corpus, o->split)) {
      const TagSequence tags = bio_encode(e.gold.entities, e.doc.length());
      if (!o->sentences) {
        write_bio_columns(out, e.doc.text, tags, scheme);
        ++sequences;
        continue;
      }
      std::vector<bool> inside(e.doc.length(), false);
      for (const auto& ent : e.gold.entities) {
        for (auto t = ent.start + 1; t < ent.end; ++t) inside[t] = true;
      }
      for (const auto& seg : segment_sentences(e.doc.text, 256, &inside)) {
        write_bio_columns(out, std::u32string_view(e.doc.text).substr(seg.start, seg.end - seg.start),
                          std::span(tags).subspan(seg.start, seg.end - seg.start), scheme);
        ++sequences;
      }
    }
    write_file_atomic(o->out, out.str());
    run.output_file(o->out);
    run.write();
    std::cout << "wrote " << sequences << " tag sequences\n";
    return 0;
  };
}

Runner add_generate(Ctx c) {
  struct Opts {
    std::string out, format = "internal";
    std::size_t records = 0;
  };
  auto o = std::make_shared<Opts>();
  c.sub->add_option("--out", o->out, "Output corpus directory")->required();
  c.sub->add_option("--records", o->records, "Number of records (default: from the generator config)");
  c.sub->add_option("--format", o->format, "Output format")
      ->check(CLI::IsMember({"internal", "standoff"}))
      ->capture_default_str();
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    GeneratorConfig cfg = c.g->config.empty() ? GeneratorConfig::builtin() : GeneratorConfig::load(c.g->config);
    if (!c.g->config.empty()) run.input(c.g->config);
    if (o->records > 0) cfg.records = o->records;
    cfg.seed = c.g->seed;
    cfg.check(scheme);
    const Corpus corpus = generate(cfg, scheme, c.g->jobs);
    if (c.g->strict) check_ingested(corpus, scheme, *c.g, "generated corpus");
    write_corpus_as(o->out, corpus, scheme, o->format);
    run.config({{"records", cfg.records}});
    run.output_dir(o->out);
    run.write();
    std::size_t ents = 0, rels = 0, attrs = 0;
    for (const auto& e : corpus.entries) {
      ents += e.gold.entities.size();
      rels += e.gold.relations.size();
      attrs += e.gold.attributes.size();
    }
    std::cout << cfg.records << " records, " << corpus.entries.size() << " documents, " << ents << " entities, " << rels
              << " relations, " << attrs << " attributes\n";
    return 0;
  };
}

Runner add_sample(Ctx c) {
  struct Opts {
    std::string corpus, out, condition = "Disease or Syndrome";
    std::vector<std::string> quotas;
    std::size_t default_quota = 0;
    std::size_t cap = 1;
  };
  auto o = std::make_shared<Opts>();
  c.sub->add_option("--corpus", o->corpus, "Corpus directory")->required();
  c.sub->add_option("--out", o->out, "Selected record ids, one per line")->required();
  c.sub->add_option("--quota", o->quotas, "Per-department quota DEPT=N (repeatable)");
  c.sub->add_option("--default-quota", o->default_quota, "Quota for departments without --quota (0 = skip them)");
  c.sub->add_option("--cap", o->cap, "Max records per (department, condition)")->capture_default_str()->check(CLI::PositiveNumber);
  c.sub->add_option("--condition-type", o->condition, "Entity type whose first surface keys the cap")->capture_default_str();
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->corpus);
    const Corpus corpus = load_corpus(o->corpus, scheme);
    check_ingested(corpus, scheme, *c.g, o->corpus);
    SamplingConfig cfg;
    cfg.cap = o->cap;
    cfg.seed = c.g->seed;
    if (o->default_quota > 0) cfg.default_quota = o->default_quota;
    for (const auto& q : o->quotas) {
      const auto eq = q.rfind('=');
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--quota expects DEPT=N, got '" + q + "'");
      cfg.quotas[q.substr(0, eq)] = std::stoul(q.substr(eq + 1));
    }
    if (cfg.quotas.empty() && !cfg.default_quota) throw std::invalid_argument("give --quota and/or --default-quota");
    cfg.check();
    const auto type = scheme.find_entity(o->condition);
    if (!type) throw std::invalid_argument("unknown entity type '" + o->condition + "'");
    const auto records = sample_records(corpus, *type);
    const auto picked = stratified_sample(records, cfg);
    std::string text;
    for (const auto& id : picked) text += id + "\n";
    write_file_atomic(o->out, text);
    run.output_file(o->out);
    run.write();
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_dept;
    const std::set<std::string> chosen(picked.begin(), picked.end());
    for (const auto& r : records) {
      auto& [avail, sel] = per_dept[r.department];
      ++avail;
      sel += chosen.count(r.record_id);
    }
    for (const auto& [dept, n] : per_dept) std::cout << dept << "\t" << n.second << "/" << n.first << "\n";
    std::cout << "selected " << picked.size() << " of " << records.size() << " records\n";
    return 0;
  };
}

Runner add_split(Ctx c) {
  struct Opts {
    std::string corpus, out, counts, ratios;
  };
  auto o = std::make_shared<Opts>();
  c.sub->add_option("--corpus", o->corpus, "Corpus directory")->required();
  c.sub->add_option("--out", o->out, "Output corpus directory with splits assigned")->required();
  auto* counts = c.sub->add_option("--counts", o->counts, "Record counts TRAIN,DEV,TEST");
  c.sub->add_option("--ratios", o->ratios, "Record ratios TRAIN,DEV,TEST")->excludes(counts);
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->corpus);
    Corpus corpus = load_corpus(o->corpus, scheme);
    check_ingested(corpus, scheme, *c.g, o->corpus);
    SplitSpec spec;
    if (!o->counts.empty()) spec.counts = parse_triple<std::size_t, 3>(o->counts, "--counts");
    if (!o->ratios.empty()) spec.ratios = parse_triple<double, 3>(o->ratios, "--ratios");
    const SplitResult split = split_records(corpus.record_ids(), spec, c.g->seed);
    assign_splits(corpus, split);
    write_corpus(o->out, corpus, scheme);
    run.config({{"train", split.train.size()}, {"dev", split.dev.size()}, {"test", split.test.size()}});
    run.output_dir(o->out);
    run.write();
    std::cout << "records train/dev/test: " << split.train.size() << "/" << split.dev.size() << "/" << split.test.size()
              << "\n";
    return 0;
  };
}

struct TrainOpts {
  std::string corpus, out, log, train_split = "train", dev_split = "dev";
};

void add_train_options(CLI::App* sub, TrainOpts& o) {
  sub->add_option("--corpus", o.corpus, "Corpus directory with splits")->required();
  sub->add_option("--out", o.out, "Checkpoint file")->required();
  sub->add_option("--log", o.log, "Per-epoch training log (JSON lines)");
  sub->add_option("--train-split", o.train_split, "Split used for training")->capture_default_str();
  sub->add_option("--dev-split", o.dev_split, "Split used for early stopping")->capture_default_str();
}

Runner add_train_entity(Ctx c) {
  auto o = std::make_shared<TrainOpts>();
  add_train_options(c.sub, *o);
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->corpus);
    const PipelineTrainConfig cfg = train_config(*c.g);
    run.config(ordered_json::parse(train_config_json(cfg)));
    const Corpus corpus = load_corpus(o->corpus, scheme);
    check_ingested(corpus, scheme, *c.g, o->corpus);
    const auto train = require_split(corpus, o->train_split);
    const auto dev = require_split(corpus, o->dev_split);
    std::string log;
    auto result = train_crf(train, dev, scheme.num_entity_types(), cfg.entity, cfg.features, [&](const EpochLog& l) {
      print_epoch("entity", l);
      log += epoch_json("entity", l);
    });
    write_file_atomic(o->out, save_crf(result.model));
    run.output_file(o->out);
    if (!o->log.empty()) {
      write_file_atomic(o->log, log);
      run.output_file(o->log);
    }
    run.write();
    std::cout << "entity model: best epoch " << result.best_epoch << fmt(", dev F1 %.4f", result.best_dev_f1)
              << "\n";
    return 0;
  };
}

Runner add_train_span(Ctx c) {
  auto o = std::make_shared<TrainOpts>();
  add_train_options(c.sub, *o);
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->corpus);
    const PipelineTrainConfig cfg = train_config(*c.g);
    run.config(ordered_json::parse(train_config_json(cfg)));
    const Corpus corpus = load_corpus(o->corpus, scheme);
    check_ingested(corpus, scheme, *c.g, o->corpus);
    const auto train = require_split(corpus, o->train_split);
    const auto dev = require_split(corpus, o->dev_split);
    std::string log;
    auto attr = train_attribute_model(train, dev, scheme, cfg.span, cfg.features, cfg.threshold, [&](const EpochLog& l) {
      print_epoch("attribute", l);
      log += epoch_json("attribute", l);
    });
    auto rel = train_relation_model(train, dev, scheme, cfg.span, cfg.features, cfg.window, [&](const EpochLog& l) {
      print_epoch("relation", l);
      log += epoch_json("relation", l);
    });
    write_file_atomic(o->out, save_span_models(attr.model, rel.model));
    run.output_file(o->out);
    if (!o->log.empty()) {
      write_file_atomic(o->log, log);
      run.output_file(o->log);
    }
    run.write();
    std::cout << "attribute model: best epoch " << attr.log.best_epoch
              << fmt(", dev F1 %.4f", attr.log.best_dev_f1) << "\n";
    std::cout << "relation model: best epoch " << rel.log.best_epoch
              << fmt(", dev F1 %.4f", rel.log.best_dev_f1) << "\n";
    return 0;
  };
}

struct ExtractOpts {
  std::string entity_model, span_model, corpus, out, split, format;
  double drop_rate = 0.3;
};

void add_extract_options(CLI::App* sub, ExtractOpts& o, const char* default_format) {
  o.format = default_format;
  sub->add_option("--entity-model", o.entity_model, "Checkpoint from train-entity")->required();
  sub->add_option("--span-model", o.span_model, "Checkpoint from train-span")->required();
  sub->add_option("--corpus", o.corpus, "Input documents (internal or standoff directory)")->required();
  sub->add_option("--out", o.out, "Output directory")->required();
  sub->add_option("--split", o.split, "Only documents of this split");
  sub->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"internal", "standoff"}))
      ->capture_default_str();
}

Corpus with_annotations(const std::vector<CorpusEntry>& entries, std::vector<AnnotationSet> anns) {
  Corpus out;
  for (std::size_t i = 0; i < entries.size(); ++i) out.entries.push_back({entries[i].doc, std::move(anns[i]), entries[i].split});
  return out;
}

// Model output must be scheme-clean; --strict turns a violation into exit 1.
void check_predictions(const Corpus& out, const Scheme& scheme, const Globals& g) {
  const std::size_t n = count_violations(out, scheme);
  if (n == 0) return;
  const std::string msg = "predictions contain " + std::to_string(n) + " scheme violation(s)";
  if (g.strict) throw StrictFailure(msg);
  std::cerr << "warning: " << msg << "\n";
}

void summarize(const Corpus& out) {
  std::size_t ents = 0, rels = 0, attrs = 0;
  for (const auto& e : out.entries) {
    ents += e.gold.entities.size();
    rels += e.gold.relations.size();
    attrs += e.gold.attributes.size();
  }
  std::cout << out.entries.size() << " documents: " << ents << " entities, " << rels << " relations, " << attrs
            << " attributes\n";
}

Runner add_extract(Ctx c) {
  auto o = std::make_shared<ExtractOpts>();
  add_extract_options(c.sub, *o, "internal");
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    for (const auto& p : {o->entity_model, o->span_model, o->corpus}) run.input(p);
    const PipelineBundle bundle = load_models(o->entity_model, o->span_model, scheme);
    const auto entries = select_split(load_corpus(o->corpus, scheme), o->split);
    const Corpus out = with_annotations(entries, extract_all(bundle, documents_of(entries), c.g->jobs));
    check_predictions(out, scheme, *c.g);
    write_corpus_as(o->out, out, scheme, o->format);
    run.output_dir(o->out);
    run.write();
    summarize(out);
    return 0;
  };
}

Runner add_preannotate(Ctx c) {
  auto o = std::make_shared<ExtractOpts>();
  add_extract_options(c.sub, *o, "standoff");
  c.sub->add_option("--drop-rate", o->drop_rate, "Probability of dropping each predicted entity")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    for (const auto& p : {o->entity_model, o->span_model, o->corpus}) run.input(p);
    const PipelineBundle bundle = load_models(o->entity_model, o->span_model, scheme);
    const auto entries = select_split(load_corpus(o->corpus, scheme), o->split);
    const Corpus out =
        with_annotations(entries, preannotate(bundle, documents_of(entries), o->drop_rate, c.g->seed, c.g->jobs));
    check_predictions(out, scheme, *c.g);
    write_corpus_as(o->out, out, scheme, o->format);
    run.output_dir(o->out);
    run.write();
    summarize(out);
    return 0;
  };
}

std::vector<Task> tasks_for(const std::string& name) {
  if (name == "all") return {Task::Entity, Task::Relation, Task::Attribute};
  return {parse_task(name)};
}

void print_reports(const TaskReports& reports, const std::vector<Task>& tasks, bool types) {
  for (Task t : tasks) {
    const auto& r = reports.get(t);
    if (types) std::cout << format_report(r, true) << "\n";
    char head[16];
    std::snprintf(head, sizeof head, "%-10s", std::string(to_string(t)).c_str());
    std::cout << head << prf(r.micro) << "  (gold " << r.micro.gold << ", pred " << r.micro.pred << ", correct "
              << r.micro.correct << ")\n";
  }
}

std::string reports_jsonl(const TaskReports& reports, const std::vector<Task>& tasks) {
  std::string out;
  for (Task t : tasks) out += report_jsonl(reports.get(t));
  return out;
}

struct ScoreOpts {
  std::string gold, pred, task = "all", split, out;
  bool types = false;
};

Runner add_score(Ctx c) {
  auto o = std::make_shared<ScoreOpts>();
  c.sub->add_option("--gold", o->gold, "Gold corpus directory")->required();
  c.sub->add_option("--pred", o->pred, "Predicted corpus directory")->required();
  c.sub->add_option("--task", o->task, "Task to score")
      ->check(CLI::IsMember({"entity", "relation", "attribute", "all"}))
      ->capture_default_str();
  c.sub->add_option("--split", o->split, "Score only gold documents of this split");
  c.sub->add_flag("--types", o->types, "Print per-type tables");
  c.sub->add_option("--out", o->out, "Write the report as JSON lines");
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->gold);
    run.input(o->pred);
    const Corpus gold_all = load_corpus(o->gold, scheme);
    check_ingested(gold_all, scheme, *c.g, o->gold);
    Corpus gold{select_split(gold_all, o->split)};
    Corpus pred = load_corpus(o->pred, scheme);
    if (!o->split.empty()) {
      // predictions may cover more documents than the selected split
      std::set<std::string> keep;
      for (const auto& e : gold.entries) keep.insert(e.doc.doc_id);
      std::erase_if(pred.entries, [&](const CorpusEntry& e) { return !keep.count(e.doc.doc_id); });
    }
    const TaskReports reports = iaa(gold, pred, scheme);
    const auto tasks = tasks_for(o->task);
    print_reports(reports, tasks, o->types);
    if (!o->out.empty()) {
      write_file_atomic(o->out, reports_jsonl(reports, tasks));
      run.output_file(o->out);
      run.write();
    }
    return 0;
  };
}

Runner add_iaa(Ctx c) {
  auto o = std::make_shared<ScoreOpts>();
  c.sub->add_option("--a", o->gold, "First annotator's corpus directory")->required();
  c.sub->add_option("--b", o->pred, "Second annotator's corpus directory")->required();
  c.sub->add_flag("--types", o->types, "Print per-type tables");
  c.sub->add_option("--out", o->out, "Write the report as JSON lines");
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->gold);
    run.input(o->pred);
    const Corpus a = load_corpus(o->gold, scheme);
    const Corpus b = load_corpus(o->pred, scheme);
    check_ingested(a, scheme, *c.g, o->gold);
    check_ingested(b, scheme, *c.g, o->pred);
    const TaskReports reports = iaa(a, b, scheme);
    const auto tasks = tasks_for("all");
    print_reports(reports, tasks, o->types);
    if (!o->out.empty()) {
      write_file_atomic(o->out, reports_jsonl(reports, tasks));
      run.output_file(o->out);
      run.write();
    }
    return 0;
  };
}

Runner add_learning_curve(Ctx c) {
  struct Opts {
    std::string corpus, out, fractions = "0.2,0.4,0.6,0.8,1.0";
    std::size_t runs = 3;
    std::size_t parallel_runs = 1;
  };
  auto o = std::make_shared<Opts>();
  c.sub->add_option("--corpus", o->corpus, "Corpus with train/dev/test splits")->required();
  c.sub->add_option("--out", o->out, "Per-run and per-point results (JSON lines)")->required();
  c.sub->add_option("--fractions", o->fractions, "Training fractions of the train records")->capture_default_str();
  c.sub->add_option("--runs", o->runs, "Runs per fraction; run i uses seed + i")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c.sub->add_option("--parallel-runs", o->parallel_runs, "Training runs in flight (each uses --jobs workers)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  return [c, o] {
    const Scheme scheme = load_scheme(*c.g);
    RunManifest run(*c.sub, *c.g);
    run.input(o->corpus);
    LearningCurveConfig cfg;
    cfg.train = train_config(*c.g);
    cfg.jobs = o->parallel_runs;
    cfg.fractions.clear();
    for (const auto& f : split_list(o->fractions)) cfg.fractions.push_back(std::stod(f));
    cfg.seeds.clear();
    for (std::size_t i = 0; i < o->runs; ++i) cfg.seeds.push_back(c.g->seed + i);
    run.config(ordered_json::parse(train_config_json(cfg.train)));
    const Corpus corpus = load_corpus(o->corpus, scheme);
    check_ingested(corpus, scheme, *c.g, o->corpus);
    const auto pool = require_split(corpus, "train");
    const auto dev = require_split(corpus, "dev");
    const auto test = require_split(corpus, "test");
    const LearningCurve curve = learning_curve(pool, dev, test, scheme, cfg, [](const CurveRun& r) {
      std::cerr << fmt("fraction %.2f", r.fraction) << " seed " << r.seed << ": " << r.records << " records, F1 "
                << fmt("entity %.4f relation %.4f attribute %.4f", r.entity_f1, r.relation_f1, r.attribute_f1) << "\n";
    });
    write_file_atomic(o->out, curve_jsonl(curve));
    run.output_file(o->out);
    run.write();
    std::cout << format_curve(curve);
    return 0;
  };
}

}  // namespace

std::map<const CLI::App*, Runner> register_commands(CLI::App& app, Globals& g) {
  std::map<const CLI::App*, Runner> runners;
  auto add = [&](const char* name, const char* help, Runner (*make)(Ctx)) {
    CLI::App* sub = app.add_subcommand(name, help);
    runners[sub] = make({sub, &g});
  };
  add("validate", "Check a corpus against the scheme", add_validate);
  add("convert", "Convert between internal and standoff corpus layouts", add_convert);
  add("encode", "Dump gold entities as BIO2 tag columns", add_encode);
  add("generate", "Generate a synthetic annotated corpus", add_generate);
  add("sample", "Stratified record sampling with a per-condition cap", add_sample);
  add("split", "Record-level train/dev/test split", add_split);
  add("train-entity", "Train the CRF entity model", add_train_entity);
  add("train-span", "Train the attribute and relation models", add_train_span);
  add("extract", "Run the three-model pipeline", add_extract);
  add("preannotate", "Pipeline output with random entity drop, for annotators", add_preannotate);
  add("score", "Micro P/R/F1 of predictions against gold", add_score);
  add("iaa", "Inter-annotator agreement between two corpora", add_iaa);
  add("learning-curve", "Train on growing record fractions and score on test", add_learning_curve);
  return runners;
}

}  // namespace medie::cli
