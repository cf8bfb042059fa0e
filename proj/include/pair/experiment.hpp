#pragma once

// Simulation-study orchestration: configuration, item splits, per-cell runs,
// sweeps and the flat report format.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pair/metrics.hpp"
#include "pair/pair_adjust.hpp"
#include "pair/simulation.hpp"
#include "pair/trainer.hpp"

namespace pair {

struct SplitCounts {
  std::size_t train = 2000;
  std::size_t dev = 500;
  std::size_t test = 500;

  std::size_t total() const noexcept { return train + dev + test; }
};

struct SyntheticGold {
  int n = 3000;
  GoldShape shape = UniformShape{0.0, 1.0};
  int vocab_size = 200;
  int tokens_per_item = 50;
  std::uint64_t seed = 7;
};

/// A gold table file (item_id, text, p_gold, k_reference per line).
struct GoldFile {
  std::filesystem::path path;
};

/// A raw per-item annotation file; gold is derived with 12-of-k subsampling.
struct AnnotationSource {
  std::filesystem::path path;
};

using GoldSource = std::variant<SyntheticGold, GoldFile, AnnotationSource>;

struct DifficultRange {
  double lo = 0.4;
  double hi = 0.6;
};

struct ExperimentConfig {
  Task task = Task::OL;
  std::vector<double> betas{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
  std::vector<std::uint64_t> seeds{10, 42, 512, 1010, 3344};
  SplitCounts split;
  std::uint64_t split_seed = 2024;
  GoldSource gold = SyntheticGold{};
  std::vector<Recipe> recipes{Recipe::representative, Recipe::nonrep1, Recipe::nonrep2,
                              Recipe::adjusted};
  PopulationBenchmark benchmark{{{"A", 0.5}, {"B", 0.5}}};
  Hyper hyper;
  double f1_threshold = 0.5;
  GoldRule f1_rule = GoldRule::majority;
  std::optional<DifficultRange> difficult;
  std::filesystem::path output_dir = "out";
  int workers = 1;

  /// Throws on betas outside [0, 0.5], empty seeds or recipes, and invalid
  /// benchmark or hyperparameters.
  void validate() const;
};

/// Parses the JSON config format; absent keys keep their defaults.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Splits {
  GoldTable train;
  GoldTable dev;
  GoldTable test;
};

/// Uniform item-level partition. Each split keeps the table's item order.
Splits split_items(const GoldTable& gold, const SplitCounts& counts, std::uint64_t seed);

/// Split sizes scaled to n items, remainder to the test split.
SplitCounts scale_split(const SplitCounts& counts, std::size_t n);

struct IngestResult {
  GoldTable gold;
  std::vector<RawItem> raw;
  std::size_t malformed = 0;  // unparseable rows plus items with too few labels
};

/// Reads an annotation file and derives gold for `task` from 12 labels per
/// item drawn without replacement.
IngestResult ingest_external(const std::filesystem::path& path, Task task,
                             std::uint64_t seed = 0, int subsample = 12);

/// Gold table, after the optional difficulty filter, and its split.
struct Study {
  GoldTable gold;
  Splits splits;
};

Study prepare_study(const ExperimentConfig& config);

struct ResultRow {
  Task task = Task::OL;
  Recipe recipe = Recipe::custom;
  double beta = 0.0;
  std::uint64_t seed = 0;
  double acb = 0.0;
  double f1 = 0.0;
  double positive_proportion = 0.0;
  double wall_time = 0.0;  // seconds
  bool ok = true;
  std::string error;
};

/// The full dataset of one recipe, over every item of `gold`.
Dataset recipe_dataset(const GoldTable& gold, Recipe recipe, double beta, std::uint64_t seed,
                       Task task, const PopulationBenchmark& benchmark);

/// Records whose item is in `items`, in original order.
Dataset restrict_to(const Dataset& dataset, const GoldTable& items);

/// Builds the suite, applies PAIR for the adjusted recipe, trains on the train
/// split with development-loss epoch selection and scores the test split.
/// Errors are rethrown with (recipe, beta, seed) context.
ResultRow run_cell(const ExperimentConfig& config, const Study& study, double beta,
                   std::uint64_t seed, Recipe recipe);

struct SweepResult {
  std::vector<ResultRow> rows;  // sorted by (task, recipe, beta, seed)
  std::vector<AggregateReport> aggregates;
  std::size_t failed = 0;
};

/// Every recipe x beta x seed cell, run on up to config.workers threads.
/// Failed cells are kept as rows with ok = false.
SweepResult sweep(const ExperimentConfig& config);
SweepResult sweep(const ExperimentConfig& config, const Study& study);

/// Aggregates successful rows per (task, recipe, beta).
std::vector<AggregateReport> aggregate_rows(const std::vector<ResultRow>& rows);

/// Flat CSV: one row per cell, then one per aggregate. No timings, so identical
/// configs give identical bytes.
void write_report(std::ostream& out, const SweepResult& result);
/// task,recipe,beta,seed,wall_time_s
void write_timings(std::ostream& out, const SweepResult& result);
/// Cell rows of a report file (aggregate rows are ignored).
std::vector<ResultRow> read_report(std::istream& in);

}  // namespace pair
