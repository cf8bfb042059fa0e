#pragma once

// Post-stratification weights and deterministic replication toward a target
// population (Population-Aligned Instance Replication).

#include <map>
#include <variant>

#include "pair/types.hpp"

namespace pair {

/// Population share per stratum. Shares are positive and sum to one.
struct PopulationBenchmark {
  std::map<StratumId, double> shares;

  void validate() const;
};

/// Share of annotations per stratum in a dataset.
struct PoolShares {
  std::map<StratumId, double> shares;
};

struct StratumWeight {
  double raw = 0.0;         // P_s / S_s
  double normalized = 0.0;  // raw * K
  int replicas = 0;         // round(normalized) - 1
};

struct WeightTable {
  std::map<StratumId, StratumWeight> strata;
  double k = 1.0;
  bool has_normalized = false;
  bool has_counts = false;
};

/// K = 1 / min(raw weights), so the smallest normalized weight is exactly one.
struct MinToOne {};
struct ExplicitK {
  double k = 1.0;
};
using NormalizePolicy = std::variant<MinToOne, ExplicitK>;

PoolShares pool_shares(const Dataset& dataset);

/// Throws when a benchmark stratum has no annotations in the pool.
WeightTable raw_weights(const PopulationBenchmark& benchmark, const PoolShares& pool);

WeightTable normalize(WeightTable weights, const NormalizePolicy& policy = MinToOne{});

/// Rounds half away from zero. Throws when any count would be negative.
WeightTable replication_counts(WeightTable weights);

struct AdjustResult {
  Dataset dataset;
  WeightTable weights;
};

/// Each record of stratum s is followed by replicas[s] copies tagged
/// source = replica. Replica ids are "<original>#r<k>", k from 1.
AdjustResult apply_pair(const Dataset& dataset, const PopulationBenchmark& benchmark,
                        const NormalizePolicy& policy = MinToOne{});

/// Replication from an already computed table (counts must be filled).
Dataset replicate(const Dataset& dataset, const WeightTable& weights);

}  // namespace pair
