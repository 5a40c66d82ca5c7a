#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "medie/bio.hpp"
#include "medie/checkpoint.hpp"
#include "medie/corpus_tools.hpp"
#include "medie/crf.hpp"
#include "medie/evaluation.hpp"
#include "medie/pipeline.hpp"
#include "medie/standoff.hpp"
#include "medie/train_config.hpp"
#include "medie/validator.hpp"

namespace py = pybind11;
using namespace medie;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw std::invalid_argument("ragged matrix");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

// Raw CRF scores: emissions T x K, transitions (K+2) x (K+2) with the begin
// state at row K and the end state at column K+1.
std::pair<Matrix, Matrix> crf_inputs(const std::vector<std::vector<double>>& em,
                                     const std::vector<std::vector<double>>& tr) {
  if (tr.empty()) throw std::invalid_argument("transitions must be (K+2) x (K+2)");
  const std::size_t k2 = tr.size();
  if (k2 < 3) throw std::invalid_argument("transitions must be (K+2) x (K+2) with K >= 1");
  return {to_matrix(em, k2 - 2), to_matrix(tr, k2)};
}

py::dict counts_dict(const Counts& c) {
  py::dict d;
  d["gold"] = c.gold;
  d["pred"] = c.pred;
  d["correct"] = c.correct;
  d["precision"] = c.precision();
  d["recall"] = c.recall();
  d["f1"] = c.f1();
  return d;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d = counts_dict(r.micro);
  py::dict types;
  for (const auto& row : r.per_type) types[py::str(row.type)] = counts_dict(row.counts);
  d["per_type"] = types;
  return d;
}

py::dict reports_dict(const TaskReports& r) {
  py::dict d;
  d["entity"] = report_dict(r.entity);
  d["relation"] = report_dict(r.relation);
  d["attribute"] = report_dict(r.attribute);
  return d;
}

std::vector<CorpusEntry> entries_of(const Corpus& c, const std::string& split) {
  std::vector<CorpusEntry> out;
  for (const auto& e : c.entries) {
    if (split.empty() || e.split == split) out.push_back(e);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Scheme-constrained medical annotation and extraction (C++ core)";
  m.attr("__version__") = MEDIE_VERSION;

  py::register_exception<SchemeError>(m, "SchemeError", PyExc_ValueError);
  py::register_exception<StandoffError>(m, "StandoffError", PyExc_ValueError);
  py::register_exception<CorpusError>(m, "CorpusError", PyExc_OSError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_ValueError);
  py::register_exception<EvalError>(m, "EvalError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BioError>(m, "BioError", PyExc_ValueError);

  py::class_<Scheme>(m, "Scheme")
      .def_static("parse", &Scheme::parse, py::arg("text"), py::arg("origin") = "<scheme>")
      .def_static("load", [](const std::string& path) { return Scheme::load(path); })
      .def_property_readonly("entity_types",
                             [](const Scheme& s) {
                               std::vector<std::string> out;
                               for (std::size_t i = 0; i < s.num_entity_types(); ++i) out.push_back(s.entity(EntityTypeId(i)).name);
                               return out;
                             })
      .def_property_readonly("relation_types",
                             [](const Scheme& s) {
                               std::vector<std::string> out;
                               for (std::size_t i = 0; i < s.num_relation_types(); ++i) out.push_back(s.relation(RelationTypeId(i)).name);
                               return out;
                             })
      .def_property_readonly("attribute_types",
                             [](const Scheme& s) {
                               std::vector<std::string> out;
                               for (std::size_t i = 0; i < s.num_attribute_types(); ++i) out.push_back(s.attribute(AttributeTypeId(i)).name);
                               return out;
                             })
      .def("entity_id", [](const Scheme& s, std::string_view n) { return s.entity_id(n).index(); })
      .def("relation_id", [](const Scheme& s, std::string_view n) { return s.relation_id(n).index(); })
      .def("attribute_id", [](const Scheme& s, std::string_view n) { return s.attribute_id(n).index(); })
      .def("expand",
           [](const Scheme& s, std::string_view n) {
             std::vector<std::size_t> out;
             for (auto id : s.expand(n)) out.push_back(id.index());
             return out;
           })
      .def("relation_allows",
           [](const Scheme& s, std::string_view rel, std::string_view head, std::string_view tail) {
             return s.relation_allows(s.relation_id(rel), s.entity_id(head), s.entity_id(tail));
           })
      .def("attribute_applies", [](const Scheme& s, std::string_view attr, std::string_view type) {
        return s.attribute_applies(s.attribute_id(attr), s.entity_id(type));
      });
  m.def("builtin_scheme", [] { return builtin_scheme(); });

  py::class_<Entity>(m, "Entity")
      .def(py::init([](std::size_t type, std::int32_t start, std::int32_t end) { return Entity{EntityTypeId(type), start, end}; }),
           py::arg("type"), py::arg("start"), py::arg("end"))
      .def_property_readonly("type", [](const Entity& e) { return e.type.index(); })
      .def_readonly("start", &Entity::start)
      .def_readonly("end", &Entity::end)
      .def(py::self == py::self)
      .def(py::self < py::self)
      .def("__hash__", [](const Entity& e) { return py::hash(py::make_tuple(e.type.index(), e.start, e.end)); })
      .def("__repr__", [](const Entity& e) {
        return "Entity(" + std::to_string(e.type.index()) + ", " + std::to_string(e.start) + ", " + std::to_string(e.end) + ")";
      });
  m.def("entities_overlap", &entities_overlap);

  py::class_<Relation>(m, "Relation")
      .def(py::init([](std::size_t type, Entity head, Entity tail, std::string qualifier) {
             return Relation{RelationTypeId(type), head, tail, std::move(qualifier)};
           }),
           py::arg("type"), py::arg("head"), py::arg("tail"), py::arg("qualifier") = "")
      .def_property_readonly("type", [](const Relation& r) { return r.type.index(); })
      .def_readonly("head", &Relation::head)
      .def_readonly("tail", &Relation::tail)
      .def_readonly("qualifier", &Relation::qualifier)
      .def(py::self == py::self);

  py::class_<Attribute>(m, "Attribute")
      .def(py::init([](std::size_t type, Entity e) { return Attribute{AttributeTypeId(type), e}; }), py::arg("type"),
           py::arg("entity"))
      .def_property_readonly("type", [](const Attribute& a) { return a.type.index(); })
      .def_readonly("entity", &Attribute::entity)
      .def(py::self == py::self);

  py::class_<AnnotationSet>(m, "AnnotationSet")
      .def(py::init<>())
      .def(py::init([](const std::vector<Entity>& ents, const std::vector<Relation>& rels, const std::vector<Attribute>& attrs) {
             AnnotationSet a;
             a.entities.insert(ents.begin(), ents.end());
             a.relations.insert(rels.begin(), rels.end());
             a.attributes.insert(attrs.begin(), attrs.end());
             return a;
           }),
           py::arg("entities"), py::arg("relations") = std::vector<Relation>{},
           py::arg("attributes") = std::vector<Attribute>{})
      .def_property_readonly("entities", [](const AnnotationSet& a) { return std::vector<Entity>(a.entities.begin(), a.entities.end()); })
      .def_property_readonly("relations", [](const AnnotationSet& a) { return std::vector<Relation>(a.relations.begin(), a.relations.end()); })
      .def_property_readonly("attributes", [](const AnnotationSet& a) { return std::vector<Attribute>(a.attributes.begin(), a.attributes.end()); })
      .def("remove_entity", &AnnotationSet::remove_entity)
      .def(py::self == py::self);

  py::class_<CorpusEntry>(m, "CorpusEntry")
      .def_property_readonly("doc_id", [](const CorpusEntry& e) { return e.doc.doc_id; })
      .def_property_readonly("record_id", [](const CorpusEntry& e) { return e.doc.record_id; })
      .def_property_readonly("department", [](const CorpusEntry& e) { return e.doc.department; })
      .def_property_readonly("section", [](const CorpusEntry& e) { return e.doc.section; })
      .def_property_readonly("text", [](const CorpusEntry& e) { return e.doc.text; })
      .def_readonly("split", &CorpusEntry::split)
      .def_readonly("gold", &CorpusEntry::gold);

  py::class_<Corpus>(m, "Corpus")
      .def_readonly("entries", &Corpus::entries)
      .def("record_ids", &Corpus::record_ids)
      .def("__len__", [](const Corpus& c) { return c.entries.size(); })
      .def("select", &entries_of, py::arg("split"));

  m.def("parse_standoff",
        [](const std::u32string& text, const std::string& ann, const Scheme& scheme) {
          return parse_standoff(text, ann, scheme).annotations;
        },
        py::arg("text"), py::arg("ann"), py::arg("scheme"));
  m.def("serialize_standoff", &serialize_standoff, py::arg("ann"), py::arg("text"), py::arg("scheme"));
  m.def("read_corpus", [](const std::string& dir, const Scheme& s) { return read_corpus(dir, s); });
  m.def("write_corpus", [](const std::string& dir, const Corpus& c, const Scheme& s) { write_corpus(dir, c, s); });

  m.def("validate",
        [](const AnnotationSet& ann, std::size_t length, const Scheme& scheme) {
          std::vector<std::pair<std::string, std::string>> out;
          for (const auto& v : validate(ann, length, scheme)) out.emplace_back(to_string(v.kind), v.message);
          return out;
        },
        py::arg("ann"), py::arg("text_length"), py::arg("scheme"));

  m.def("bio_encode", [](const std::vector<Entity>& ents, std::size_t length) {
    return bio_encode(std::set<Entity>(ents.begin(), ents.end()), length);
  });
  m.def("bio_decode", [](const TagSequence& tags) {
    auto s = bio_decode(tags);
    return std::vector<Entity>(s.begin(), s.end());
  });
  m.def("tag_name", [](Tag t, const Scheme& s) { return TagSet(s.num_entity_types()).name(t, s); });

  m.def("crf_log_partition", [](const std::vector<std::vector<double>>& em, const std::vector<std::vector<double>>& tr) {
    auto [e, t] = crf_inputs(em, tr);
    return crf::log_partition(e, t);
  });
  m.def("crf_viterbi", [](const std::vector<std::vector<double>>& em, const std::vector<std::vector<double>>& tr) {
    auto [e, t] = crf_inputs(em, tr);
    double best = 0.0;
    TagSequence path = crf::viterbi(e, t, &best);
    return std::make_pair(path, best);
  });
  m.def("crf_sequence_score",
        [](const std::vector<std::vector<double>>& em, const std::vector<std::vector<double>>& tr, const TagSequence& tags) {
          auto [e, t] = crf_inputs(em, tr);
          return crf::sequence_score(e, t, tags);
        });

  m.def("generate",
        [](std::size_t records, std::uint64_t seed, const Scheme& scheme, std::size_t jobs) {
          GeneratorConfig cfg = GeneratorConfig::builtin();
          cfg.records = records;
          cfg.seed = seed;
          return generate(cfg, scheme, jobs);
        },
        py::arg("records"), py::arg("seed") = 0, py::arg("scheme") = builtin_scheme(), py::arg("jobs") = 1);

  m.def("split_corpus",
        [](Corpus corpus, std::optional<std::array<std::size_t, 3>> counts, std::optional<std::array<double, 3>> ratios,
           std::uint64_t seed) {
          SplitSpec spec{counts, ratios};
          assign_splits(corpus, split_records(corpus.record_ids(), spec, seed));
          return corpus;
        },
        py::arg("corpus"), py::arg("counts") = py::none(), py::arg("ratios") = py::none(), py::arg("seed") = 0);

  py::class_<PipelineBundle>(m, "PipelineBundle")
      .def("extract", [](const PipelineBundle& b, const std::u32string& text) { return extract(b, text); })
      .def("save", [](const PipelineBundle& b) { return py::bytes(save_bundle(b)); })
      .def_static("load", [](const py::bytes& data) { return load_bundle(std::string(data)); });

  m.def("train_pipeline",
        [](const std::vector<CorpusEntry>& train, const std::vector<CorpusEntry>& dev, const Scheme& scheme,
           std::uint64_t seed, std::size_t jobs, const std::string& config_json) {
          PipelineTrainConfig cfg = config_json.empty() ? PipelineTrainConfig{} : parse_train_config(config_json);
          cfg.entity.seed = cfg.span.seed = seed;
          cfg.entity.jobs = cfg.span.jobs = jobs;
          py::gil_scoped_release release;
          return train_pipeline(train, dev, scheme, cfg).bundle;
        },
        py::arg("train"), py::arg("dev"), py::arg("scheme") = builtin_scheme(), py::arg("seed") = 0, py::arg("jobs") = 1,
        py::arg("config_json") = "");

  m.def("preannotate",
        [](const PipelineBundle& b, const std::vector<CorpusEntry>& entries, double drop_rate, std::uint64_t seed,
           std::size_t jobs) {
          std::vector<Document> docs;
          for (const auto& e : entries) docs.push_back(e.doc);
          return preannotate(b, docs, drop_rate, seed, jobs);
        },
        py::arg("bundle"), py::arg("entries"), py::arg("drop_rate"), py::arg("seed") = 0, py::arg("jobs") = 1);

  m.def("score",
        [](const std::string& task, const AnnotationSet& gold, const AnnotationSet& pred, const Scheme& scheme) {
          return report_dict(score(parse_task(task), gold, pred, scheme));
        },
        py::arg("task"), py::arg("gold"), py::arg("pred"), py::arg("scheme") = builtin_scheme());
  m.def("score_documents",
        [](const std::vector<AnnotationSet>& gold, const std::vector<AnnotationSet>& pred, const Scheme& scheme) {
          return reports_dict(score_documents(gold, pred, scheme));
        },
        py::arg("gold"), py::arg("pred"), py::arg("scheme") = builtin_scheme());
  m.def("iaa", [](const Corpus& a, const Corpus& b, const Scheme& s) { return reports_dict(iaa(a, b, s)); },
        py::arg("a"), py::arg("b"), py::arg("scheme") = builtin_scheme());
}
