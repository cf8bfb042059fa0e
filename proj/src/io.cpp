#include "pair/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pair/error.hpp"

namespace pair::io {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(fmt::format("cannot read '{}'", path.string()));
  return in;
}

json parse_line(const std::string& line, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(fmt::format("line {}: {}", lineno, e.what()));
  }
}

template <typename T>
T field(const json& j, const char* name, std::size_t lineno) {
  auto it = j.find(name);
  if (it == j.end()) throw Error(fmt::format("line {}: missing field '{}'", lineno, name));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(fmt::format("line {}: field '{}' has the wrong type", lineno, name));
  }
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little);
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw Error("truncated model file");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

constexpr char kModelMagic[8] = {'P', 'A', 'I', 'R', 'M', 'D', 'L', '\0'};
constexpr std::uint32_t kModelVersion = 1;

}  // namespace

void write_gold(std::ostream& out, const GoldTable& gold) {
  for (const auto& e : gold.entries) {
    json j = {{"item_id", e.item_id},
              {"text", e.text},
              {"p_gold", e.p_gold},
              {"k_reference", e.k_reference}};
    out << j.dump() << '\n';
  }
}

GoldTable read_gold(std::istream& in) {
  GoldTable gold;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const json j = parse_line(line, lineno);
    gold.entries.push_back({field<std::string>(j, "item_id", lineno),
                            j.value("text", std::string{}),
                            field<double>(j, "p_gold", lineno),
                            field<int>(j, "k_reference", lineno)});
  }
  gold.validate();
  return gold;
}

void save_gold(const std::filesystem::path& path, const GoldTable& gold) {
  auto out = open_out(path);
  write_gold(out, gold);
}

GoldTable load_gold(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_gold(in);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  json meta = {{"meta",
                {{"task", to_string(dataset.meta.task)},
                 {"recipe", to_string(dataset.meta.recipe)},
                 {"beta", dataset.meta.beta},
                 {"seed", dataset.meta.seed}}}};
  out << meta.dump() << '\n';
  for (const auto& r : dataset.records) {
    json j = {{"annotation_id", r.annotation_id},
              {"item_id", r.item_id},
              {"stratum_id", r.stratum},
              {"label", r.label},
              {"source", to_string(r.source)},
              {"replica_of", r.replica_of ? json(*r.replica_of) : json(nullptr)}};
    out << j.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const json j = parse_line(line, lineno);
    if (!have_meta) {
      const auto m = field<json>(j, "meta", lineno);
      ds.meta.task = parse_task(field<std::string>(m, "task", lineno));
      ds.meta.recipe = parse_recipe(field<std::string>(m, "recipe", lineno));
      ds.meta.beta = field<double>(m, "beta", lineno);
      ds.meta.seed = field<std::uint64_t>(m, "seed", lineno);
      have_meta = true;
      continue;
    }
    AnnotationRecord r;
    r.annotation_id = field<std::string>(j, "annotation_id", lineno);
    r.item_id = field<std::string>(j, "item_id", lineno);
    r.stratum = field<std::string>(j, "stratum_id", lineno);
    const int label = field<int>(j, "label", lineno);
    if (label != 0 && label != 1) throw Error(fmt::format("line {}: non-binary label", lineno));
    r.label = static_cast<std::uint8_t>(label);
    r.source = parse_source(field<std::string>(j, "source", lineno));
    if (auto it = j.find("replica_of"); it != j.end() && !it->is_null()) {
      r.replica_of = it->get<std::string>();
    }
    ds.records.push_back(std::move(r));
  }
  if (!have_meta) throw Error("dataset file has no metadata header");
  ds.validate();
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  auto out = open_out(path);
  write_dataset(out, dataset);
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dataset(in);
}

PopulationBenchmark parse_benchmark(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(fmt::format("benchmark: {}", e.what()));
  }
  if (j.contains("shares")) j = j["shares"];
  if (!j.is_object()) throw Error("benchmark must be a JSON object of stratum -> share");
  PopulationBenchmark b;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw Error(fmt::format("benchmark share for '{}' is not a number", k));
    b.shares[k] = v.get<double>();
  }
  b.validate();
  return b;
}

PopulationBenchmark load_benchmark(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_benchmark(ss.str());
}

std::string benchmark_json(const PopulationBenchmark& benchmark) {
  return json(benchmark.shares).dump();
}

std::string weight_table_json(const WeightTable& weights) {
  json strata = json::object();
  for (const auto& [s, w] : weights.strata) {
    strata[s] = {{"raw", w.raw}, {"normalized", w.normalized}, {"replicas", w.replicas}};
  }
  return json{{"K", weights.k}, {"strata", strata}}.dump(2);
}

void write_model(std::ostream& out, const Model& model) {
  out.write(kModelMagic, sizeof kModelMagic);
  put<std::uint32_t>(out, kModelVersion);
  put<std::int32_t>(out, model.hyper.epochs);
  put<double>(out, model.hyper.learning_rate);
  put<double>(out, model.hyper.lr_decay);
  put<std::int32_t>(out, model.hyper.hash_dim);
  put<std::uint64_t>(out, model.seed);
  put<double>(out, model.bias);
  put<std::uint64_t>(out, model.weights.size());
  for (double w : model.weights) put<double>(out, w);
}

Model read_model(std::istream& in) {
  char magic[sizeof kModelMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kModelMagic, sizeof magic) != 0) {
    throw Error("not a model file");
  }
  if (const auto v = get<std::uint32_t>(in); v != kModelVersion) {
    throw Error(fmt::format("unsupported model version {}", v));
  }
  Model m;
  m.hyper.epochs = get<std::int32_t>(in);
  m.hyper.learning_rate = get<double>(in);
  m.hyper.lr_decay = get<double>(in);
  m.hyper.hash_dim = get<std::int32_t>(in);
  m.seed = get<std::uint64_t>(in);
  m.bias = get<double>(in);
  const auto n = get<std::uint64_t>(in);
  if (n != static_cast<std::uint64_t>(m.hyper.hash_dim)) {
    throw Error("model weight count does not match hash_dim");
  }
  m.weights.resize(n);
  for (auto& w : m.weights) w = get<double>(in);
  return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  auto out = open_out(path, true);
  write_model(out, model);
}

Model load_model(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  return read_model(in);
}

std::string predictions_json(const PredictionSet& preds) { return json(preds).dump(); }

AnnotationFile read_annotation_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  AnnotationFile file;
  std::string line;
  auto labels_of = [](const json& j, const char* name) {
    std::vector<int> labels;
    const auto& arr = j.at(name);
    if (!arr.is_array() || arr.empty()) throw Error("bad labels");
    for (const auto& v : arr) {
      const int l = v.get<int>();
      if (l != 0 && l != 1) throw Error("non-binary label");
      labels.push_back(l);
    }
    return labels;
  };
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    try {
      const json j = json::parse(line);
      RawItem ol{j.at("item_id").get<std::string>(), j.at("text").get<std::string>(),
                 labels_of(j, "ol")};
      RawItem hs{ol.item_id, ol.text, labels_of(j, "hs")};
      file.ol.push_back(std::move(ol));
      file.hs.push_back(std::move(hs));
    } catch (const std::exception&) {
      ++file.malformed;
    }
  }
  if (file.ol.empty()) {
    throw Error(fmt::format("'{}' contains no valid annotation rows", path.string()));
  }
  return file;
}

}  // namespace pair::io
