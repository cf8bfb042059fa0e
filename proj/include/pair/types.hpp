#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pair {

using StratumId = std::string;

enum class Task { OL, HS };
enum class Recipe { representative, nonrep1, nonrep2, adjusted, custom };
enum class Source { original, replica };
enum class Direction { minus, plus };

std::string_view to_string(Task t) noexcept;
std::string_view to_string(Recipe r) noexcept;
std::string_view to_string(Source s) noexcept;
std::string_view to_string(Direction d) noexcept;

// These throw pair::Error on unknown names.
Task parse_task(std::string_view s);
Recipe parse_recipe(std::string_view s);
Source parse_source(std::string_view s);
Direction parse_direction(std::string_view s);

/// One reference item: text plus the proportion of reference annotators who
/// labeled it positive.
struct GoldEntry {
  std::string item_id;
  std::string text;  // whitespace-separated tokens
  double p_gold = 0.0;
  int k_reference = 1;

  bool operator==(const GoldEntry&) const = default;
};

struct GoldTable {
  std::vector<GoldEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }

  /// Throws on p_gold outside [0,1], k_reference < 1 or duplicate item ids.
  void validate() const;

  bool operator==(const GoldTable&) const = default;
};

struct AnnotationRecord {
  std::string annotation_id;
  std::string item_id;
  StratumId stratum;
  std::uint8_t label = 0;
  Source source = Source::original;
  std::optional<std::string> replica_of;

  bool operator==(const AnnotationRecord&) const = default;
};

struct DatasetMeta {
  Task task = Task::OL;
  Recipe recipe = Recipe::custom;
  double beta = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const DatasetMeta&) const = default;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<AnnotationRecord> records;

  bool empty() const noexcept { return records.empty(); }

  /// Throws when a replica does not point at an original with the same
  /// (item, stratum, label), or when a label is not binary.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

/// Predicted probability per item id.
using PredictionSet = std::map<std::string, double>;

/// Records grouped by item, in first-appearance order.
std::vector<std::pair<std::string, std::vector<const AnnotationRecord*>>>
group_by_item(const Dataset& dataset);

/// Per-item count of records in each stratum.
std::map<std::string, std::map<StratumId, int>> item_stratum_counts(const Dataset& dataset);

}  // namespace pair
