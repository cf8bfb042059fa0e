#include "pair/pair_adjust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include <fmt/format.h>

#include "pair/error.hpp"

namespace pair {

namespace {

// Half away from zero. Values within a relative 1e-9 of a .5 tie count as the
// tie, so rescaling raw weights by a constant cannot flip a replication count
// through floating-point noise.
long round_half_away(double x) {
  const double fl = std::floor(x);
  const double frac = x - fl;
  if (std::fabs(frac - 0.5) <= 1e-9 * std::max(1.0, std::fabs(x))) {
    return static_cast<long>(x >= 0.0 ? fl + 1.0 : fl);
  }
  return std::lround(x);
}

}  // namespace

void PopulationBenchmark::validate() const {
  if (shares.empty()) throw Error("population benchmark has no strata");
  double total = 0.0;
  for (const auto& [stratum, share] : shares) {
    if (!(share > 0.0 && share <= 1.0)) {
      throw Error(fmt::format("benchmark share for '{}' must be in (0,1], got {}", stratum, share));
    }
    total += share;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw Error(fmt::format("benchmark shares sum to {}, not 1", total));
  }
}

PoolShares pool_shares(const Dataset& dataset) {
  if (dataset.empty()) throw Error("cannot compute pool shares of an empty dataset");
  std::map<StratumId, std::size_t> counts;
  for (const auto& r : dataset.records) ++counts[r.stratum];
  const auto total = static_cast<double>(dataset.records.size());
  PoolShares pool;
  for (const auto& [stratum, n] : counts) pool.shares[stratum] = static_cast<double>(n) / total;
  return pool;
}

WeightTable raw_weights(const PopulationBenchmark& benchmark, const PoolShares& pool) {
  benchmark.validate();
  WeightTable table;
  for (const auto& [stratum, p] : benchmark.shares) {
    auto it = pool.shares.find(stratum);
    if (it == pool.shares.end() || it->second <= 0.0) {
      throw Error(fmt::format(
          "stratum '{}' is in the benchmark but has no annotations in the pool", stratum));
    }
    table.strata[stratum].raw = p / it->second;
  }
  for (const auto& [stratum, s] : pool.shares) {
    if (s > 0.0 && !benchmark.shares.contains(stratum)) {
      throw Error(fmt::format("pool stratum '{}' is missing from the benchmark", stratum));
    }
  }
  return table;
}

WeightTable normalize(WeightTable weights, const NormalizePolicy& policy) {
  if (weights.strata.empty()) throw Error("empty weight table");
  double k = 0.0;
  if (const auto* e = std::get_if<ExplicitK>(&policy)) {
    if (!(e->k > 0.0) || !std::isfinite(e->k)) {
      throw Error(fmt::format("normalization constant K must be positive, got {}", e->k));
    }
    k = e->k;
  } else {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& [_, w] : weights.strata) lowest = std::min(lowest, w.raw);
    k = 1.0 / lowest;
  }
  weights.k = k;
  for (auto& [_, w] : weights.strata) w.normalized = w.raw * k;
  if (std::holds_alternative<MinToOne>(policy)) {
    // raw * (1 / raw) can land one ulp below 1.
    for (auto& [_, w] : weights.strata) {
      if (std::fabs(w.normalized - 1.0) < 1e-12) w.normalized = 1.0;
    }
  }
  weights.has_normalized = true;
  weights.has_counts = false;
  return weights;
}

WeightTable replication_counts(WeightTable weights) {
  if (!weights.has_normalized) throw Error("weights must be normalized before counting replicas");
  for (auto& [stratum, w] : weights.strata) {
    const long rounded = round_half_away(w.normalized);
    const long count = rounded - 1;
    if (count < 0) {
      throw Error(fmt::format(
          "stratum '{}' gets a negative replication count (normalized weight {}); use the "
          "min_to_one policy or a larger K",
          stratum, w.normalized));
    }
    w.replicas = static_cast<int>(count);
  }
  weights.has_counts = true;
  return weights;
}

Dataset replicate(const Dataset& dataset, const WeightTable& weights) {
  if (!weights.has_counts) throw Error("weight table has no replication counts");
  Dataset out;
  out.meta = dataset.meta;
  out.meta.recipe = Recipe::adjusted;
  std::size_t total = 0;
  for (const auto& r : dataset.records) {
    auto it = weights.strata.find(r.stratum);
    if (it == weights.strata.end()) {
      throw Error(fmt::format("annotation '{}' has stratum '{}' absent from the weight table",
                              r.annotation_id, r.stratum));
    }
    total += 1 + static_cast<std::size_t>(it->second.replicas);
  }
  out.records.reserve(total);
  // Replicas of replicas point at the root original; numbering continues per root.
  std::unordered_map<std::string, int> issued;
  for (const auto& r : dataset.records) {
    if (r.replica_of) ++issued[*r.replica_of];
  }
  for (const auto& r : dataset.records) {
    out.records.push_back(r);
    const int n = weights.strata.at(r.stratum).replicas;
    const std::string& root = r.replica_of ? *r.replica_of : r.annotation_id;
    for (int k = 0; k < n; ++k) {
      AnnotationRecord copy = r;
      copy.annotation_id = fmt::format("{}#r{}", root, ++issued[root]);
      copy.source = Source::replica;
      copy.replica_of = root;
      out.records.push_back(std::move(copy));
    }
  }
  return out;
}

AdjustResult apply_pair(const Dataset& dataset, const PopulationBenchmark& benchmark,
                        const NormalizePolicy& policy) {
  WeightTable weights =
      replication_counts(normalize(raw_weights(benchmark, pool_shares(dataset)), policy));
  Dataset adjusted = replicate(dataset, weights);
  return {std::move(adjusted), std::move(weights)};
}

}  // namespace pair
