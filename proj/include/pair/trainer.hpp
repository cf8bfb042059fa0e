#pragma once

// Hashed bag-of-words logistic regression trained on annotation instances.
//
// Every annotation record (replicas included) is one training instance, so
// replication enters the loss as an integer instance weight. Training is plain
// SGD on binary cross-entropy with a per-epoch shuffle; when a development set
// is given, the epoch with the lowest development loss is kept.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pair/types.hpp"

namespace pair {

struct Hyper {
  int epochs = 10;
  double learning_rate = 0.5;
  double lr_decay = 0.2;  // lr at epoch e is learning_rate / (1 + lr_decay * e)
  int hash_dim = 1 << 14;

  void validate() const;
  bool operator==(const Hyper&) const = default;
};

struct Model {
  Hyper hyper;
  std::uint64_t seed = 0;
  double bias = 0.0;
  std::vector<double> weights;

  static Model zeros(const Hyper& hyper, std::uint64_t seed = 0);
  bool operator==(const Model&) const = default;
};

/// Sparse hashed term frequencies of one text (counts / token count).
struct Features {
  std::vector<std::int32_t> index;  // sorted, unique
  std::vector<double> value;
};

Features featurize(std::string_view text, int hash_dim);

struct Instance {
  std::uint32_t row = 0;  // into InstanceSet::features
  std::uint8_t label = 0;
  double weight = 1.0;
};

struct InstanceSet {
  std::vector<std::string> item_ids;  // one per feature row
  std::vector<Features> features;
  std::vector<Instance> instances;
};

/// One instance per record, weighted by stratum_weight[stratum] when given
/// (missing strata weigh 1). Throws naming every item without a text.
InstanceSet make_instances(const Dataset& dataset, const GoldTable& texts, int hash_dim,
                           const std::map<StratumId, double>& stratum_weight = {});

struct TrainHistory {
  std::vector<double> train_loss;  // weighted mean loss accumulated during each epoch
  std::vector<double> dev_loss;    // empty without a development set
  int selected_epoch = 0;          // 1-based
};

Model train(const InstanceSet& train_set, const InstanceSet* dev_set, const Hyper& hyper,
            std::uint64_t seed, TrainHistory* history = nullptr);

Model train(const Dataset& dataset, const GoldTable& texts, const Hyper& hyper,
            std::uint64_t seed, const Dataset* dev = nullptr, TrainHistory* history = nullptr);

double logit(const Model& model, const Features& f);
double predict_one(const Model& model, std::string_view text);
PredictionSet predict(const Model& model, const GoldTable& items);

/// Weighted mean binary cross-entropy over an instance set.
double mean_loss(const Model& model, const InstanceSet& set);

/// Loss of one instance and its gradient with respect to the weights at
/// f.index (same order) and the bias.
struct InstanceGradient {
  double loss = 0.0;
  std::vector<double> d_weights;
  double d_bias = 0.0;
};
InstanceGradient instance_gradient(const Model& model, const Features& f, std::uint8_t label,
                                   double weight = 1.0);

/// Fraction of positive records per item, replicas included.
PredictionSet proportion_oracle(const Dataset& dataset);

}  // namespace pair
