#include "pair/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pair/error.hpp"
#include "pair/kernels.hpp"
#include "pair/rng.hpp"

namespace pair {

namespace {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) - y z, stable for large |z|.
double bce_from_logit(double z, double y) noexcept {
  return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::fabs(z)));
}

std::vector<std::string_view> split_tokens(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) tokens.push_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

}  // namespace

void Hyper::validate() const {
  if (epochs < 1) throw Error(fmt::format("epochs must be >= 1, got {}", epochs));
  if (hash_dim < 2) throw Error(fmt::format("hash_dim must be >= 2, got {}", hash_dim));
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(fmt::format("learning_rate must be positive, got {}", learning_rate));
  }
  if (!(lr_decay >= 0.0)) throw Error("lr_decay must be non-negative");
}

Model Model::zeros(const Hyper& hyper, std::uint64_t seed) {
  hyper.validate();
  Model m;
  m.hyper = hyper;
  m.seed = seed;
  m.weights.assign(static_cast<std::size_t>(hyper.hash_dim), 0.0);
  return m;
}

Features featurize(std::string_view text, int hash_dim) {
  const auto tokens = split_tokens(text);
  std::vector<std::int32_t> raw;
  raw.reserve(tokens.size());
  for (auto t : tokens) {
    raw.push_back(static_cast<std::int32_t>(hash_tag(t) % static_cast<std::uint64_t>(hash_dim)));
  }
  std::sort(raw.begin(), raw.end());
  Features f;
  const double scale = tokens.empty() ? 0.0 : 1.0 / static_cast<double>(tokens.size());
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    while (j < raw.size() && raw[j] == raw[i]) ++j;
    f.index.push_back(raw[i]);
    f.value.push_back(static_cast<double>(j - i) * scale);
    i = j;
  }
  return f;
}

InstanceSet make_instances(const Dataset& dataset, const GoldTable& texts, int hash_dim,
                           const std::map<StratumId, double>& stratum_weight) {
  std::unordered_map<std::string_view, const GoldEntry*> by_id;
  for (const auto& e : texts.entries) by_id.emplace(e.item_id, &e);

  InstanceSet set;
  std::unordered_map<std::string_view, std::uint32_t> row_of;
  std::set<std::string> missing;
  set.instances.reserve(dataset.records.size());
  for (const auto& r : dataset.records) {
    auto row = row_of.find(r.item_id);
    if (row == row_of.end()) {
      auto text = by_id.find(r.item_id);
      if (text == by_id.end()) {
        missing.insert(r.item_id);
        continue;
      }
      const auto idx = static_cast<std::uint32_t>(set.features.size());
      set.item_ids.push_back(r.item_id);
      set.features.push_back(featurize(text->second->text, hash_dim));
      row = row_of.emplace(text->second->item_id, idx).first;
    }
    double w = 1.0;
    if (auto it = stratum_weight.find(r.stratum); it != stratum_weight.end()) w = it->second;
    set.instances.push_back({row->second, r.label, w});
  }
  if (!missing.empty()) {
    std::vector<std::string> shown(missing.begin(), missing.end());
    const std::size_t total = shown.size();
    if (total > 20) shown.resize(20);
    throw Error(fmt::format("no text for {} item(s): {}{}", total, fmt::join(shown, ", "),
                            total > shown.size() ? ", ..." : ""));
  }
  return set;
}

double logit(const Model& model, const Features& f) {
  return model.bias + kernels::gather_dot(model.weights, f.index, f.value);
}

double predict_one(const Model& model, std::string_view text) {
  return sigmoid(logit(model, featurize(text, model.hyper.hash_dim)));
}

PredictionSet predict(const Model& model, const GoldTable& items) {
  PredictionSet out;
  for (const auto& e : items.entries) out[e.item_id] = predict_one(model, e.text);
  return out;
}

double mean_loss(const Model& model, const InstanceSet& set) {
  std::vector<double> z(set.features.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = logit(model, set.features[i]);
  double total = 0.0;
  double weight = 0.0;
  for (const auto& inst : set.instances) {
    total += inst.weight * bce_from_logit(z[inst.row], inst.label);
    weight += inst.weight;
  }
  return weight > 0.0 ? total / weight : 0.0;
}

InstanceGradient instance_gradient(const Model& model, const Features& f, std::uint8_t label,
                                   double weight) {
  const double z = logit(model, f);
  const double g = weight * (sigmoid(z) - label);
  InstanceGradient out;
  out.loss = weight * bce_from_logit(z, label);
  out.d_bias = g;
  out.d_weights.reserve(f.value.size());
  for (double v : f.value) out.d_weights.push_back(g * v);
  return out;
}

Model train(const InstanceSet& train_set, const InstanceSet* dev_set, const Hyper& hyper,
            std::uint64_t seed, TrainHistory* history) {
  Model model = Model::zeros(hyper, seed);
  if (train_set.instances.empty()) throw Error("no training instances");

  Model best = model;
  double best_dev = std::numeric_limits<double>::infinity();
  TrainHistory local;
  std::vector<std::uint32_t> order(train_set.instances.size());
  std::iota(order.begin(), order.end(), 0U);
  std::vector<double> u(model.weights.size(), 0.0);
  Model snapshot = model;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Stream s(seed, "shuffle", static_cast<std::uint64_t>(epoch), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[s.below(i + 1)]);
    }
    const double lr = hyper.learning_rate / (1.0 + hyper.lr_decay * epoch);
    double epoch_loss = 0.0;
    double epoch_weight = 0.0;
    // Snapshot is the average of this epoch's iterates; u accumulates step * update
    // so that the average is w - u / steps without touching every weight per step.
    std::fill(u.begin(), u.end(), 0.0);
    double u_bias = 0.0;
    double steps = 1.0;
    for (auto k : order) {
      const auto& inst = train_set.instances[k];
      const auto& f = train_set.features[inst.row];
      const double z = logit(model, f);
      epoch_loss += inst.weight * bce_from_logit(z, inst.label);
      epoch_weight += inst.weight;
      const double g = inst.weight * (sigmoid(z) - inst.label);
      kernels::scatter_axpy(model.weights, f.index, f.value, -lr * g);
      kernels::scatter_axpy(u, f.index, f.value, -lr * g * steps);
      model.bias -= lr * g;
      u_bias -= lr * g * steps;
      steps += 1.0;
    }
    local.train_loss.push_back(epoch_loss / epoch_weight);
    snapshot.bias = model.bias - u_bias / steps;
    for (std::size_t j = 0; j < u.size(); ++j) snapshot.weights[j] = model.weights[j] - u[j] / steps;
    if (dev_set != nullptr && !dev_set->instances.empty()) {
      const double dev = mean_loss(snapshot, *dev_set);
      local.dev_loss.push_back(dev);
      if (dev < best_dev) {
        best_dev = dev;
        best = snapshot;
        local.selected_epoch = epoch + 1;
      }
    }
  }
  if (local.dev_loss.empty()) {
    best = std::move(snapshot);
    local.selected_epoch = hyper.epochs;
  }
  for (double w : best.weights) {
    if (!std::isfinite(w)) throw Error("training diverged (non-finite weight)");
  }
  if (history != nullptr) *history = std::move(local);
  return best;
}

Model train(const Dataset& dataset, const GoldTable& texts, const Hyper& hyper,
            std::uint64_t seed, const Dataset* dev, TrainHistory* history) {
  hyper.validate();
  const InstanceSet train_set = make_instances(dataset, texts, hyper.hash_dim);
  if (dev == nullptr) return train(train_set, nullptr, hyper, seed, history);
  const InstanceSet dev_set = make_instances(*dev, texts, hyper.hash_dim);
  return train(train_set, &dev_set, hyper, seed, history);
}

PredictionSet proportion_oracle(const Dataset& dataset) {
  if (dataset.empty()) throw Error("proportion oracle needs a non-empty dataset");
  PredictionSet out;
  std::vector<std::uint8_t> labels;
  for (const auto& [item, records] : group_by_item(dataset)) {
    labels.clear();
    for (const auto* r : records) labels.push_back(r->label);
    out[item] = static_cast<double>(kernels::count_positive(labels)) /
                static_cast<double>(labels.size());
  }
  return out;
}

}  // namespace pair
