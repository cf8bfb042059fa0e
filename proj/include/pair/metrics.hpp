#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pair/types.hpp"

namespace pair {

/// Mean absolute difference between predicted probability and p_gold. The item
/// sets must match exactly; otherwise throws listing the symmetric difference.
double acb(const PredictionSet& preds, const GoldTable& gold);

/// Reference labels for F1.
///  majority:   one label per item, positive when p_gold >= 0.5.
///  annotation: one label per reference annotation; an item contributes
///              k_reference * p_gold positives out of k_reference.
enum class GoldRule { majority, annotation };

std::string_view to_string(GoldRule r) noexcept;
GoldRule parse_gold_rule(std::string_view s);

struct F1Score {
  double value = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  /// Set when there are neither predicted nor reference positives (value is 0).
  bool undefined = false;
};

F1Score f1(const PredictionSet& preds, const GoldTable& gold, double threshold = 0.5,
           GoldRule rule = GoldRule::majority);

/// Fraction of records with label 1, replicas included.
double positive_proportion(const Dataset& dataset);

struct MetricsReport {
  Task task = Task::OL;
  Recipe recipe = Recipe::custom;
  double beta = 0.0;
  double acb = 0.0;
  double f1 = 0.0;
  double positive_proportion = 0.0;
  std::size_t n_items = 0;
  std::uint64_t seed = 0;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct AggregateReport {
  Task task = Task::OL;
  Recipe recipe = Recipe::custom;
  double beta = 0.0;
  Summary acb;
  Summary f1;
  Summary positive_proportion;
  std::vector<std::uint64_t> seeds;
};

Summary summarize(const std::vector<double>& values);

/// Throws on an empty list or when runs differ in (task, recipe, beta).
AggregateReport aggregate(const std::vector<MetricsReport>& runs);

}  // namespace pair
