#include "pair/metrics.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pair/error.hpp"
#include "pair/kernels.hpp"

namespace pair {

namespace {

// Predictions in gold order; throws on any mismatch between the two item sets.
std::vector<double> aligned(const PredictionSet& preds, const GoldTable& gold) {
  std::vector<double> out;
  out.reserve(gold.size());
  std::vector<std::string> missing;
  for (const auto& e : gold.entries) {
    auto it = preds.find(e.item_id);
    if (it == preds.end()) {
      missing.push_back(e.item_id);
    } else {
      out.push_back(it->second);
    }
  }
  std::vector<std::string> extra;
  if (preds.size() + missing.size() != gold.size()) {
    std::map<std::string_view, bool> in_gold;
    for (const auto& e : gold.entries) in_gold[e.item_id] = true;
    for (const auto& [id, _] : preds) {
      if (!in_gold.contains(id)) extra.push_back(id);
    }
  }
  if (!missing.empty() || !extra.empty()) {
    throw Error(fmt::format("prediction/gold item mismatch; missing predictions: [{}]; "
                            "predictions without gold: [{}]",
                            fmt::join(missing, ", "), fmt::join(extra, ", ")));
  }
  return out;
}

}  // namespace

double acb(const PredictionSet& preds, const GoldTable& gold) {
  if (gold.empty()) throw Error("ACB over an empty gold table");
  const auto p = aligned(preds, gold);
  std::vector<double> g;
  g.reserve(gold.size());
  for (const auto& e : gold.entries) g.push_back(e.p_gold);
  return kernels::abs_diff_sum(p, g) / static_cast<double>(gold.size());
}

std::string_view to_string(GoldRule r) noexcept {
  return r == GoldRule::majority ? "majority" : "annotation";
}

GoldRule parse_gold_rule(std::string_view s) {
  if (s == "majority") return GoldRule::majority;
  if (s == "annotation") return GoldRule::annotation;
  throw Error(fmt::format("unknown F1 gold rule '{}'", s));
}

F1Score f1(const PredictionSet& preds, const GoldTable& gold, double threshold, GoldRule rule) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(fmt::format("F1 threshold {} outside (0,1)", threshold));
  }
  const auto p = aligned(preds, gold);
  double tp = 0.0;
  double predicted = 0.0;
  double actual = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& e = gold.entries[i];
    const bool pos = p[i] >= threshold;
    if (rule == GoldRule::majority) {
      const double y = e.p_gold >= 0.5 ? 1.0 : 0.0;
      actual += y;
      predicted += pos ? 1.0 : 0.0;
      tp += pos ? y : 0.0;
    } else {
      const double k = e.k_reference;
      const double y = std::round(e.p_gold * k);
      actual += y;
      predicted += pos ? k : 0.0;
      tp += pos ? y : 0.0;
    }
  }
  F1Score s;
  if (predicted + actual == 0.0) {
    s.undefined = true;
    return s;
  }
  s.precision = predicted > 0.0 ? tp / predicted : 0.0;
  s.recall = actual > 0.0 ? tp / actual : 0.0;
  s.value = 2.0 * tp / (predicted + actual);
  return s;
}

double positive_proportion(const Dataset& dataset) {
  if (dataset.empty()) throw Error("positive proportion of an empty dataset");
  std::vector<std::uint8_t> labels;
  labels.reserve(dataset.records.size());
  for (const auto& r : dataset.records) labels.push_back(r.label);
  return static_cast<double>(kernels::count_positive(labels)) /
         static_cast<double>(labels.size());
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw Error("cannot summarize zero values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

AggregateReport aggregate(const std::vector<MetricsReport>& runs) {
  if (runs.empty()) throw Error("aggregate needs at least one run");
  const auto& first = runs.front();
  std::vector<double> acbs, f1s, props;
  AggregateReport out;
  out.task = first.task;
  out.recipe = first.recipe;
  out.beta = first.beta;
  for (const auto& r : runs) {
    if (r.task != first.task || r.recipe != first.recipe || r.beta != first.beta) {
      throw Error(fmt::format("cannot aggregate mixed configurations ({}/{}/{} vs {}/{}/{})",
                              to_string(first.task), to_string(first.recipe), first.beta,
                              to_string(r.task), to_string(r.recipe), r.beta));
    }
    acbs.push_back(r.acb);
    f1s.push_back(r.f1);
    props.push_back(r.positive_proportion);
    out.seeds.push_back(r.seed);
  }
  out.acb = summarize(acbs);
  out.f1 = summarize(f1s);
  out.positive_proportion = summarize(props);
  return out;
}

}  // namespace pair
