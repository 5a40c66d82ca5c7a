#include "medie/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include "json.hpp"

namespace medie {

namespace {

using nlohmann::ordered_json;

constexpr std::string_view kMagic = "MEDIECKPT";

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint64_t get_le(std::string_view bytes, std::size_t pos, int width) {
  std::uint64_t v = 0;
  for (int b = 0; b < width; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + b])) << (8 * b);
  return v;
}

class Writer {
 public:
  explicit Writer(std::string kind) { header_["kind"] = std::move(kind); }

  ordered_json& header() { return header_; }

  void u32(const std::string& name, std::span<const std::uint32_t> xs) {
    arrays_.push_back({{"name", name}, {"dtype", "u32"}, {"length", xs.size()}});
    for (auto x : xs) put_u32(data_, x);
  }
  void f64(const std::string& name, std::span<const double> xs) {
    arrays_.push_back({{"name", name}, {"dtype", "f64"}, {"length", xs.size()}});
    for (double x : xs) put_u64(data_, std::bit_cast<std::uint64_t>(x));
  }
  void weights(const std::string& name, const SparseWeights& w) {
    u32(name + ".features", w.features());
    f64(name + ".values", w.values());
  }

  std::string finish() {
    header_["arrays"] = arrays_;
    const std::string head = header_.dump();
    std::string out(kMagic);
    out.push_back(static_cast<char>(kCheckpointVersion));
    put_u32(out, static_cast<std::uint32_t>(head.size()));
    out += head;
    out += data_;
    return out;
  }

 private:
  ordered_json header_;
  ordered_json arrays_ = ordered_json::array();
  std::string data_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) {
    const std::size_t prefix = kMagic.size() + 1 + 4;
    if (bytes.size() < prefix || bytes.substr(0, kMagic.size()) != kMagic) {
      throw CheckpointError("not a checkpoint file (bad magic)");
    }
    const auto version = static_cast<std::uint8_t>(bytes[kMagic.size()]);
    if (version != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    const std::size_t head_len = get_le(bytes, kMagic.size() + 1, 4);
    if (bytes.size() < prefix + head_len) throw CheckpointError("truncated checkpoint header");
    try {
      header_ = ordered_json::parse(bytes.substr(prefix, head_len));
    } catch (const nlohmann::json::exception& e) {
      throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
    }
    std::size_t pos = prefix + head_len;
    try {
      for (const auto& a : header_.at("arrays")) {
        const std::string dtype = a.at("dtype");
        const std::size_t width = dtype == "u32" ? 4 : dtype == "f64" ? 8 : 0;
        if (width == 0) throw CheckpointError("unknown array dtype '" + dtype + "'");
        const std::size_t len = a.at("length");
        if (len > (bytes.size() - pos) / width) throw CheckpointError("truncated checkpoint data");
        arrays_[a.at("name")] = {dtype, bytes.substr(pos, len * width)};
        pos += len * width;
      }
    } catch (const nlohmann::json::exception& e) {
      throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
    }
    if (pos != bytes.size()) throw CheckpointError("trailing bytes after checkpoint data");
  }

  const ordered_json& header() const { return header_; }
  std::string kind() const { return header_.value("kind", ""); }

  void expect_kind(std::string_view kind) const {
    if (this->kind() != kind) {
      throw CheckpointError("checkpoint holds a '" + this->kind() + "' model, expected '" + std::string(kind) + "'");
    }
  }

  std::vector<std::uint32_t> u32(const std::string& name) const {
    const auto& raw = find(name, "u32");
    std::vector<std::uint32_t> out(raw.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint32_t>(get_le(raw, 4 * i, 4));
    return out;
  }
  std::vector<double> f64(const std::string& name) const {
    const auto& raw = find(name, "f64");
    std::vector<double> out(raw.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::bit_cast<double>(get_le(raw, 8 * i, 8));
    return out;
  }
  SparseWeights weights(const std::string& name, std::size_t outputs) const {
    const auto features = u32(name + ".features");
    const auto values = f64(name + ".values");
    if (values.size() != features.size() * outputs) throw CheckpointError("array '" + name + "' has the wrong shape");
    SparseWeights w(outputs);
    for (std::size_t s = 0; s < features.size(); ++s) {
      if (w.ensure(features[s]) != s) throw CheckpointError("array '" + name + "' repeats a feature");
      std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(s * outputs), outputs, w.column(s).begin());
    }
    return w;
  }

 private:
  std::string_view find(const std::string& name, std::string_view dtype) const {
    auto it = arrays_.find(name);
    if (it == arrays_.end()) throw CheckpointError("checkpoint is missing array '" + name + "'");
    if (it->second.first != dtype) throw CheckpointError("array '" + name + "' has dtype " + it->second.first);
    return it->second.second;
  }

  ordered_json header_;
  std::map<std::string, std::pair<std::string, std::string_view>> arrays_;
};

ordered_json features_json(const FeatureConfig& c) {
  return {{"window", c.window}, {"hash_dim", c.hash_dim}, {"unigrams", c.unigrams}, {"bigrams", c.bigrams},
          {"char_classes", c.char_classes}};
}

FeatureConfig features_from(const ordered_json& j) {
  FeatureConfig c;
  c.window = j.at("window");
  c.hash_dim = j.at("hash_dim");
  c.unigrams = j.at("unigrams");
  c.bigrams = j.at("bigrams");
  c.char_classes = j.at("char_classes");
  return c;
}

void write_crf(Writer& w, const CrfModel& m) {
  w.header()["crf"] = {{"num_entity_types", m.num_entity_types()}, {"features", features_json(m.feature_config())}};
  w.weights("crf.emission", m.emission_weights());
  w.f64("crf.transitions", m.transitions().data());
}

CrfModel read_crf(const Reader& r) {
  const auto& h = r.header().at("crf");
  CrfModel m(h.at("num_entity_types").get<std::size_t>(), features_from(h.at("features")));
  m.emission_weights() = r.weights("crf.emission", m.num_tags());
  const auto tr = r.f64("crf.transitions");
  if (tr.size() != m.transitions().data().size()) throw CheckpointError("crf.transitions has the wrong shape");
  m.transitions().data() = tr;
  return m;
}

void write_head(Writer& w, const std::string& prefix, const LinearHead& head) {
  for (std::size_t j = 0; j < head.tables.size(); ++j) w.weights(prefix + ".table" + std::to_string(j), head.tables[j]);
  w.f64(prefix + ".bias", head.bias);
}

LinearHead read_head(const Reader& r, const std::string& prefix, std::size_t inputs, std::size_t outputs) {
  LinearHead head(inputs, outputs);
  for (std::size_t j = 0; j < inputs; ++j) head.tables[j] = r.weights(prefix + ".table" + std::to_string(j), outputs);
  head.bias = r.f64(prefix + ".bias");
  if (head.bias.size() != outputs) throw CheckpointError(prefix + ".bias has the wrong shape");
  return head;
}

void write_attr(Writer& w, const AttributeModel& m) {
  w.header()["attribute"] = {{"outputs", m.head.outputs()}, {"threshold", m.threshold}, {"features", features_json(m.features)}};
  write_head(w, "attribute", m.head);
}

AttributeModel read_attr(const Reader& r) {
  const auto& h = r.header().at("attribute");
  AttributeModel m;
  m.features = features_from(h.at("features"));
  m.threshold = h.at("threshold");
  m.head = read_head(r, "attribute", 1, h.at("outputs"));
  return m;
}

void write_rel(Writer& w, const RelationModel& m) {
  w.header()["relation"] = {{"outputs", m.head.outputs()}, {"window", m.window}, {"features", features_json(m.features)}};
  write_head(w, "relation", m.head);
}

RelationModel read_rel(const Reader& r) {
  const auto& h = r.header().at("relation");
  RelationModel m;
  m.features = features_from(h.at("features"));
  m.window = h.at("window");
  m.head = read_head(r, "relation", 2, h.at("outputs"));
  return m;
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("invalid checkpoint configuration: ") + e.what());
  }
}

}  // namespace

std::string save_crf(const CrfModel& model) {
  Writer w("crf");
  write_crf(w, model);
  return w.finish();
}

CrfModel load_crf(std::string_view bytes) {
  return guarded([&] {
    Reader r(bytes);
    r.expect_kind("crf");
    return read_crf(r);
  });
}

std::string save_attribute_model(const AttributeModel& model) {
  Writer w("attribute");
  write_attr(w, model);
  return w.finish();
}

AttributeModel load_attribute_model(std::string_view bytes) {
  return guarded([&] {
    Reader r(bytes);
    r.expect_kind("attribute");
    return read_attr(r);
  });
}

std::string save_relation_model(const RelationModel& model) {
  Writer w("relation");
  write_rel(w, model);
  return w.finish();
}

RelationModel load_relation_model(std::string_view bytes) {
  return guarded([&] {
    Reader r(bytes);
    r.expect_kind("relation");
    return read_rel(r);
  });
}

std::string save_span_models(const AttributeModel& attr, const RelationModel& rel) {
  Writer w("span");
  write_attr(w, attr);
  write_rel(w, rel);
  return w.finish();
}

std::pair<AttributeModel, RelationModel> load_span_models(std::string_view bytes) {
  return guarded([&] {
    Reader r(bytes);
    r.expect_kind("span");
    return std::pair{read_attr(r), read_rel(r)};
  });
}

std::string save_bundle(const PipelineBundle& bundle) {
  Writer w("pipeline");
  w.header()["scheme"] = bundle.scheme.source_text();
  write_crf(w, bundle.crf);
  write_attr(w, bundle.attr);
  write_rel(w, bundle.rel);
  return w.finish();
}

PipelineBundle load_bundle(std::string_view bytes) {
  return guarded([&] {
    Reader r(bytes);
    r.expect_kind("pipeline");
    PipelineBundle b{read_crf(r), read_attr(r), read_rel(r), Scheme::parse(r.header().at("scheme").get<std::string>(), "<checkpoint scheme>")};
    if (b.crf.num_entity_types() != b.scheme.num_entity_types() ||
        b.attr.num_attribute_types() != b.scheme.num_attribute_types() ||
        b.rel.num_relation_types() != b.scheme.num_relation_types()) {
      throw CheckpointError("checkpoint models do not match the embedded scheme");
    }
    return b;
  });
}

std::string checkpoint_kind(std::string_view bytes) { return Reader(bytes).kind(); }

}  // namespace medie
