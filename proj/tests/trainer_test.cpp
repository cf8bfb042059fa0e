#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "pair/error.hpp"
#include "pair/experiment.hpp"
#include "pair/pair_adjust.hpp"
#include "pair/rng.hpp"
#include "pair/simulation.hpp"
#include "pair/trainer.hpp"

using namespace pair;

namespace {

GoldTable corpus(int n, std::uint64_t seed, UniformShape shape = {0.0, 1.0}) {
  return synth_text(synth_gold(n, shape, seed), 200, 50, seed + 1);
}

double mean_abs_diff(const PredictionSet& a, const PredictionSet& b) {
  double s = 0.0;
  for (const auto& [id, p] : a) s += std::fabs(p - b.at(id));
  return s / static_cast<double>(a.size());
}

struct Fixture {
  GoldTable gold = corpus(1000, 31);
  Splits splits = split_items(gold, {500, 0, 500}, 4);
  Suite suite = build_suite(gold, 0.3, 9);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST(Featurize, HashedTermFrequencies) {
  const auto f = featurize("a b a", 1 << 10);
  double total = 0.0;
  for (double v : f.value) total += v;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_EQ(f.index.size(), 2U);
  EXPECT_TRUE(std::is_sorted(f.index.begin(), f.index.end()));
  EXPECT_TRUE(featurize("", 16).index.empty());
}

TEST(Predict, ZeroModelIsHalf) {
  const Model m = Model::zeros(Hyper{});
  EXPECT_EQ(predict_one(m, "w1 w2 w3"), 0.5);
  EXPECT_EQ(predict_one(m, ""), 0.5);
}

TEST(Predict, BagOfWordsOrderInvariant) {
  const auto& f = fixture();
  const Model m = train(restrict_to(f.suite.representative, f.splits.train), f.gold, Hyper{}, 1);
  EXPECT_DOUBLE_EQ(predict_one(m, "w1 w150 w3 w3"), predict_one(m, "w3 w150 w3 w1"));
}

TEST(Train, AllPositiveLabels) {
  const auto& f = fixture();
  Dataset d = restrict_to(f.suite.representative, f.splits.train);
  for (auto& r : d.records) r.label = 1;
  const Model m = train(d, f.gold, Hyper{}, 3);
  const auto preds = predict(m, f.splits.train);
  double mean = 0.0;
  for (const auto& [_, p] : preds) mean += p;
  EXPECT_GT(mean / static_cast<double>(preds.size()), 0.9);
}

TEST(Train, DeterministicGivenSeed) {
  const auto& f = fixture();
  const Dataset d = restrict_to(f.suite.nonrep1, f.splits.train);
  const Model a = train(d, f.gold, Hyper{}, 77);
  const Model b = train(d, f.gold, Hyper{}, 77);
  EXPECT_EQ(a, b);
  const Model c = train(d, f.gold, Hyper{}, 78);
  EXPECT_NE(a.weights, c.weights);
}

TEST(Train, ProbabilitiesStrictlyInsideUnitInterval) {
  const auto& f = fixture();
  const Model m = train(restrict_to(f.suite.nonrep2, f.splits.train), f.gold, Hyper{}, 5);
  for (const auto& [_, p] : predict(m, f.gold)) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
  for (double w : m.weights) EXPECT_TRUE(std::isfinite(w));
}

TEST(Train, EpochLossNonIncreasing) {
  const auto& f = fixture();
  TrainHistory h;
  Hyper hyper;
  hyper.epochs = 8;
  train(restrict_to(f.suite.representative, f.splits.train), f.gold, hyper, 5, nullptr, &h);
  ASSERT_EQ(h.train_loss.size(), 8U);
  for (std::size_t e = 1; e < h.train_loss.size(); ++e) {
    EXPECT_LE(h.train_loss[e], h.train_loss[e - 1] + 2e-3) << "epoch " << e;
  }
  EXPECT_LT(h.train_loss.back(), h.train_loss.front());
  EXPECT_EQ(h.selected_epoch, 8);
}

TEST(Train, DevLossSelectsEpoch) {
  const auto& f = fixture();
  const Splits s = split_items(f.gold, {600, 200, 200}, 8);
  TrainHistory h;
  const Dataset dev = restrict_to(f.suite.nonrep1, s.dev);
  const Model m = train(restrict_to(f.suite.nonrep1, s.train), f.gold, Hyper{}, 5, &dev, &h);
  ASSERT_EQ(h.dev_loss.size(), static_cast<std::size_t>(Hyper{}.epochs));
  const auto best = std::min_element(h.dev_loss.begin(), h.dev_loss.end()) - h.dev_loss.begin();
  EXPECT_EQ(h.selected_epoch, best + 1);
  const InstanceSet dev_set = make_instances(dev, f.gold, m.hyper.hash_dim);
  EXPECT_NEAR(mean_loss(m, dev_set), h.dev_loss[static_cast<std::size_t>(best)], 1e-12);
}

TEST(Train, UniformDuplicationMatchesUnduplicated) {
  const auto& f = fixture();
  const Dataset d = restrict_to(f.suite.representative, f.splits.train);
  // Benchmark equal to the pool with K = 2 duplicates every record once.
  const PopulationBenchmark same{{{"A", 0.5}, {"B", 0.5}}};
  const Dataset doubled = apply_pair(d, same, ExplicitK{2.0}).dataset;
  ASSERT_EQ(doubled.records.size(), 2 * d.records.size());
  const auto pa = predict(train(d, f.gold, Hyper{}, 5), f.splits.test);
  const auto pb = predict(train(doubled, f.gold, Hyper{}, 5), f.splits.test);
  EXPECT_LT(mean_abs_diff(pa, pb), 0.02);
}

TEST(Train, ReplicationEqualsInstanceWeighting) {
  const auto& f = fixture();
  const Dataset n1 = restrict_to(f.suite.nonrep1, f.splits.train);
  const auto [adjusted, weights] = apply_pair(n1, PopulationBenchmark{{{"A", 0.5}, {"B", 0.5}}});
  std::map<StratumId, double> multiplier;
  for (const auto& [s, w] : weights.strata) multiplier[s] = w.replicas + 1.0;

  const Hyper hyper;
  const Model replicated = train(adjusted, f.gold, hyper, 5);
  const Model weighted =
      train(make_instances(n1, f.gold, hyper.hash_dim, multiplier), nullptr, hyper, 5);
  EXPECT_LT(mean_abs_diff(predict(replicated, f.splits.test), predict(weighted, f.splits.test)),
            0.02);
}

TEST(Train, UnbiasedSmokeAcb) {
  const GoldTable gold = corpus(3000, 12);
  const Splits s = split_items(gold, {2000, 500, 500}, 1);
  const Suite suite = build_suite(gold, 0.0, 3);
  const Dataset dev = restrict_to(suite.representative, s.dev);
  const Model m = train(restrict_to(suite.representative, s.train), gold, Hyper{}, 3, &dev);
  EXPECT_LT(acb(predict(m, s.test), s.test), 0.15);
}

TEST(Train, MissingTextsAreNamed) {
  const auto& f = fixture();
  GoldTable partial = f.gold;
  const std::string dropped = partial.entries.front().item_id;
  partial.entries.erase(partial.entries.begin());
  try {
    train(f.suite.nonrep1, partial, Hyper{}, 1);
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(dropped), std::string::npos);
  }
}

TEST(Train, InvalidHyper) {
  const auto& f = fixture();
  Hyper h;
  h.epochs = 0;
  EXPECT_THROW(train(f.suite.nonrep1, f.gold, h, 1), Error);
  h = Hyper{};
  h.hash_dim = 1;
  EXPECT_THROW(train(f.suite.nonrep1, f.gold, h, 1), Error);
}

TEST(GradientCheck, MatchesCentralDifferences) {
  const auto& f = fixture();
  Hyper hyper;
  hyper.hash_dim = 64;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Stream s(trial, "gradcheck", 0, 0);
    Model m = Model::zeros(hyper);
    for (auto& w : m.weights) w = 4.0 * s.uniform() - 2.0;
    m.bias = 2.0 * s.uniform() - 1.0;
    const auto& entry = f.gold.entries[s.below(f.gold.size())];
    const Features feat = featurize(entry.text, hyper.hash_dim);
    const std::uint8_t label = s.bernoulli(0.5) ? 1 : 0;
    const double weight = 1.0 + s.below(3);
    const auto g = instance_gradient(m, feat, label, weight);

    const double h = 1e-6;
    auto loss_at = [&](const Model& mm) { return instance_gradient(mm, feat, label, weight).loss; };
    auto rel = [](double a, double b) { return std::fabs(a - b) / std::max(1e-3, std::fabs(a) + std::fabs(b)); };
    Model plus = m, minus = m;
    plus.bias += h;
    minus.bias -= h;
    EXPECT_LT(rel(g.d_bias, (loss_at(plus) - loss_at(minus)) / (2 * h)), 1e-5);
    for (std::size_t k = 0; k < feat.index.size(); ++k) {
      plus = m;
      minus = m;
      plus.weights[static_cast<std::size_t>(feat.index[k])] += h;
      minus.weights[static_cast<std::size_t>(feat.index[k])] -= h;
      EXPECT_LT(rel(g.d_weights[k], (loss_at(plus) - loss_at(minus)) / (2 * h)), 1e-5);
    }
  }
}

TEST(ProportionOracle, Recount) {
  Dataset d;
  d.records = {{"a1", "x", "A", 1}, {"a2", "x", "A", 1}, {"a3", "x", "B", 0}};
  EXPECT_DOUBLE_EQ(proportion_oracle(d).at("x"), 2.0 / 3.0);
  EXPECT_THROW(proportion_oracle(Dataset{}), Error);
}

TEST(ProportionOracle, AdjustedItemWeightedRecount) {
  const auto& f = fixture();
  const auto adjusted =
      apply_pair(f.suite.nonrep1, PopulationBenchmark{{{"A", 0.5}, {"B", 0.5}}}).dataset;
  const auto oracle = proportion_oracle(adjusted);
  for (const auto& [item, records] : group_by_item(f.suite.nonrep1)) {
    int pos_a = 0, pos_b = 0;
    for (const auto* r : records) (r->stratum == "A" ? pos_a : pos_b) += r->label;
    EXPECT_DOUBLE_EQ(oracle.at(item), (pos_a + 2.0 * pos_b) / 12.0);
  }
}

TEST(ProportionOracle, Nonrep2MeanDeviation) {
  const GoldTable gold = synth_gold(2000, UniformShape{0.35, 0.65}, 14);
  const auto suite = build_suite(gold, 0.3, 15);
  const auto oracle = proportion_oracle(suite.nonrep2);
  double dev = 0.0;
  for (const auto& e : gold.entries) dev += oracle.at(e.item_id) - e.p_gold;
  // (9 pA + 3 pB) / 12 = p - beta / 2 without clamping.
  EXPECT_NEAR(std::fabs(dev / 2000.0), 0.15, 0.01);
}
