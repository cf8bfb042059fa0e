#pragma once

// Gold tables, bias shifts and annotation-pool sampling.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pair/types.hpp"

namespace pair {

struct BiasSpec {
  double beta = 0.0;
  std::map<StratumId, Direction> direction;

  /// Two strata: A shifted down, B shifted up.
  static BiasSpec two_type(double beta);
};

struct PoolComposition {
  std::map<StratumId, int> counts;
};

/// Raw annotations for one item, prior to aggregation.
struct RawItem {
  std::string item_id;
  std::string text;
  std::vector<int> labels;
};

/// Proportion of positive labels per item. With `subsample`, exactly that many
/// labels are drawn without replacement per item (items with fewer are
/// rejected). Draws are keyed on (seed, item position).
GoldTable derive_gold(const std::vector<RawItem>& raw, std::optional<int> subsample = {},
                      std::uint64_t seed = 0);

/// Indices (into the item's label list) that derive_gold retains for an item.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t m, std::uint64_t seed,
                                           std::uint64_t item_index);

/// minus: max(p - beta, 0); plus: min(p + beta, 1).
double shift_probability(double p, double beta, Direction direction) noexcept;

/// Bernoulli draws per (item, stratum, slot) from the shifted probability.
/// Slot j of stratum s for item i always uses the same random stream, so a
/// larger composition extends a smaller one rather than resampling it.
Dataset sample_pool(const GoldTable& gold, const PoolComposition& comp, const BiasSpec& bias,
                    std::uint64_t seed, Task task = Task::OL);

struct Suite {
  Dataset representative;  // 6 A + 6 B per item
  Dataset nonrep1;         // 6 A + 3 B
  Dataset nonrep2;         // 9 A + 3 B
};

/// Builds the three sampled recipes. The adjusted recipe comes from applying
/// PAIR to nonrep1.
Suite build_suite(const GoldTable& gold, double beta, std::uint64_t seed, Task task = Task::OL);

/// Entries with lo <= p_gold <= hi.
GoldTable filter_difficult(const GoldTable& gold, double lo, double hi);

struct UniformShape {
  double a = 0.0;
  double b = 1.0;
};
/// Skewed toward zero with the given mean (Beta(0.5, 0.5 (1 - mean) / mean)).
struct RareShape {
  double mean = 0.167;
};
using GoldShape = std::variant<UniformShape, RareShape>;

/// n synthetic items with p_gold quantized to twelfths (k_reference = 12).
/// Uniform draws that round outside [a, b] are moved to the nearest twelfth
/// inside the interval.
GoldTable synth_gold(int n, const GoldShape& shape, std::uint64_t seed);

/// Fills texts with tokens "w<j>": j < vocab_size / 2 are toxic-indicative and
/// each token is toxic-indicative with probability p_gold.
GoldTable synth_text(GoldTable gold, int vocab_size, int tokens_per_item, std::uint64_t seed);

/// True for tokens produced from the toxic-indicative half of the vocabulary.
bool is_toxic_token(std::string_view token, int vocab_size);

}  // namespace pair
