#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pair/error.hpp"
#include "pair/io.hpp"
#include "pair/rng.hpp"

using namespace pair;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pair_io_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

GoldTable sample_gold() {
  return synth_text(synth_gold(40, UniformShape{0.0, 1.0}, 3), 50, 10, 4);
}

}  // namespace

TEST(GoldIo, RoundTripIsByteIdentical) {
  const GoldTable g = sample_gold();
  std::stringstream first;
  io::write_gold(first, g);
  const GoldTable back = io::read_gold(first);
  EXPECT_EQ(back, g);
  std::stringstream second;
  io::write_gold(second, back);
  EXPECT_EQ(first.str(), second.str());
}

TEST(GoldIo, RejectsBadProbability) {
  std::stringstream in(R"({"item_id":"x","text":"t","p_gold":1.5,"k_reference":12})" "\n");
  EXPECT_THROW(io::read_gold(in), Error);
}

TEST(DatasetIo, RoundTripWithReplicas) {
  const GoldTable g = sample_gold();
  const Suite s = build_suite(g, 0.2, 5);
  const auto adjusted = apply_pair(s.nonrep1, PopulationBenchmark{{{"A", 0.5}, {"B", 0.5}}});
  std::stringstream first;
  io::write_dataset(first, adjusted.dataset);
  const Dataset back = io::read_dataset(first);
  EXPECT_EQ(back, adjusted.dataset);
  EXPECT_EQ(back.meta.recipe, Recipe::adjusted);
  std::stringstream second;
  io::write_dataset(second, back);
  EXPECT_EQ(first.str(), second.str());

  const auto dir = scratch_dir("dataset");
  io::save_dataset(dir / "d.jsonl", back);
  EXPECT_EQ(io::load_dataset(dir / "d.jsonl"), back);
}

TEST(DatasetIo, MissingMetaLine) {
  std::stringstream in(
      R"({"annotation_id":"a","item_id":"x","stratum_id":"A","label":1,"source":"original","replica_of":null})"
      "\n");
  EXPECT_THROW(io::read_dataset(in), Error);
}

TEST(BenchmarkIo, ParsesAndValidates) {
  const auto b = io::parse_benchmark(R"({"A": 0.5, "B": 0.5})");
  EXPECT_DOUBLE_EQ(b.shares.at("A"), 0.5);
  EXPECT_EQ(io::parse_benchmark(R"({"shares": {"A": 0.25, "B": 0.75}})").shares.at("B"), 0.75);
  EXPECT_EQ(io::parse_benchmark(io::benchmark_json(b)).shares, b.shares);
  EXPECT_THROW(io::parse_benchmark(R"({"A": 0.5, "B": 0.6})"), Error);
  EXPECT_THROW(io::parse_benchmark(R"({"A": 0.0, "B": 1.0})"), Error);
  EXPECT_THROW(io::parse_benchmark("[1, 2]"), Error);
  EXPECT_THROW(io::parse_benchmark("not json"), Error);
}

TEST(WeightIo, TableJson) {
  const auto w = apply_pair(build_suite(sample_gold(), 0.1, 1).nonrep1,
                            PopulationBenchmark{{{"A", 0.5}, {"B", 0.5}}})
                     .weights;
  const auto j = nlohmann::json::parse(io::weight_table_json(w));
  EXPECT_NEAR(j["K"].get<double>(), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(j["strata"]["B"]["raw"].get<double>(), 1.5, 1e-12);
  EXPECT_DOUBLE_EQ(j["strata"]["A"]["normalized"].get<double>(), 1.0);
  EXPECT_EQ(j["strata"]["B"]["replicas"].get<int>(), 1);
  EXPECT_EQ(j["strata"]["A"]["replicas"].get<int>(), 0);
}

TEST(ModelIo, BitExactRoundTrip) {
  Hyper h;
  h.hash_dim = 257;
  h.learning_rate = 0.123456789;
  Model m = Model::zeros(h, 99);
  Stream s(1, "model", 0, 0);
  for (auto& w : m.weights) w = (s.uniform() - 0.5) * 1e3;
  m.weights[3] = -0.0;
  m.weights[4] = 5e-324;
  m.bias = std::nextafter(0.25, 1.0);

  std::stringstream buf;
  io::write_model(buf, m);
  const Model back = io::read_model(buf);
  EXPECT_EQ(back, m);
  EXPECT_TRUE(std::signbit(back.weights[3]));

  const auto dir = scratch_dir("model");
  io::save_model(dir / "m.bin", m);
  EXPECT_EQ(io::load_model(dir / "m.bin"), m);
}

TEST(ModelIo, RejectsCorruptInput) {
  std::stringstream bad("NOTAMODEL-----------------");
  EXPECT_THROW(io::read_model(bad), Error);

  std::stringstream buf;
  io::write_model(buf, Model::zeros(Hyper{}));
  std::string bytes = buf.str();
  bytes.resize(bytes.size() - 8);
  std::stringstream truncated(bytes);
  EXPECT_THROW(io::read_model(truncated), Error);
  EXPECT_THROW(io::load_model("/nonexistent/model.bin"), Error);
}

TEST(PredictionsIo, JsonObject) {
  const auto j = nlohmann::json::parse(io::predictions_json({{"a", 0.25}, {"b", 0.75}}));
  EXPECT_DOUBLE_EQ(j["a"].get<double>(), 0.25);
  EXPECT_EQ(j.size(), 2U);
}

TEST(AnnotationFile, CountsMalformedRows) {
  const auto dir = scratch_dir("annotations");
  {
    std::ofstream out(dir / "a.jsonl");
    out << R"({"item_id":"x1","text":"hello","ol":[1,0,1],"hs":[0,0,0]})" << "\n";
    out << R"({"item_id":"x2","text":"world","ol":[0,2,1],"hs":[0,1,0]})" << "\n";
    out << R"({"item_id":"x3","text":"again","ol":[1,1,1],"hs":[1,1,0]})" << "\n";
    out << "\n";
  }
  const auto f = io::read_annotation_file(dir / "a.jsonl");
  EXPECT_EQ(f.malformed, 1U);
  ASSERT_EQ(f.ol.size(), 2U);
  EXPECT_EQ(f.ol[1].item_id, "x3");
  EXPECT_EQ(f.hs[0].labels, (std::vector<int>{0, 0, 0}));

  {
    std::ofstream out(dir / "empty.jsonl");
    out << "garbage\n";
  }
  EXPECT_THROW(io::read_annotation_file(dir / "empty.jsonl"), Error);
  EXPECT_THROW(io::read_annotation_file(dir / "missing.jsonl"), Error);
}
