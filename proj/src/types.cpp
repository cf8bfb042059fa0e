#include "pair/types.hpp"

#include <array>
#include <set>
#include <unordered_map>
#include <utility>

#include <fmt/format.h>

#include "pair/error.hpp"

namespace pair {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& names,
             std::string_view what) {
  for (const auto& [name, value] : names) {
    if (name == s) return value;
  }
  throw Error(fmt::format("unknown {} '{}'", what, s));
}

constexpr std::array<std::pair<std::string_view, Task>, 2> kTasks{{{"OL", Task::OL},
                                                                   {"HS", Task::HS}}};
constexpr std::array<std::pair<std::string_view, Recipe>, 5> kRecipes{
    {{"representative", Recipe::representative},
     {"nonrep1", Recipe::nonrep1},
     {"nonrep2", Recipe::nonrep2},
     {"adjusted", Recipe::adjusted},
     {"custom", Recipe::custom}}};
constexpr std::array<std::pair<std::string_view, Source>, 2> kSources{
    {{"original", Source::original}, {"replica", Source::replica}}};
constexpr std::array<std::pair<std::string_view, Direction>, 2> kDirections{
    {{"minus", Direction::minus}, {"plus", Direction::plus}}};

template <typename E, std::size_t N>
std::string_view name_of(E value, const std::array<std::pair<std::string_view, E>, N>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

}  // namespace

std::string_view to_string(Task t) noexcept { return name_of(t, kTasks); }
std::string_view to_string(Recipe r) noexcept { return name_of(r, kRecipes); }
std::string_view to_string(Source s) noexcept { return name_of(s, kSources); }
std::string_view to_string(Direction d) noexcept { return name_of(d, kDirections); }

Task parse_task(std::string_view s) { return parse_enum(s, kTasks, "task"); }
Recipe parse_recipe(std::string_view s) { return parse_enum(s, kRecipes, "recipe"); }
Source parse_source(std::string_view s) { return parse_enum(s, kSources, "source"); }
Direction parse_direction(std::string_view s) { return parse_enum(s, kDirections, "direction"); }

void GoldTable::validate() const {
  std::set<std::string_view> seen;
  for (const auto& e : entries) {
    if (!(e.p_gold >= 0.0 && e.p_gold <= 1.0)) {
      throw Error(fmt::format("item '{}': p_gold {} outside [0,1]", e.item_id, e.p_gold));
    }
    if (e.k_reference < 1) {
      throw Error(fmt::format("item '{}': k_reference must be positive", e.item_id));
    }
    if (!seen.insert(e.item_id).second) {
      throw Error(fmt::format("duplicate item_id '{}'", e.item_id));
    }
  }
}

void Dataset::validate() const {
  std::unordered_map<std::string_view, const AnnotationRecord*> originals;
  for (const auto& r : records) {
    if (r.label > 1) {
      throw Error(fmt::format("annotation '{}': non-binary label", r.annotation_id));
    }
    if (r.source == Source::original) {
      if (r.replica_of) {
        throw Error(fmt::format("annotation '{}': original with replica_of", r.annotation_id));
      }
      if (!originals.emplace(r.annotation_id, &r).second) {
        throw Error(fmt::format("duplicate annotation_id '{}'", r.annotation_id));
      }
    }
  }
  for (const auto& r : records) {
    if (r.source != Source::replica) continue;
    if (!r.replica_of) {
      throw Error(fmt::format("replica '{}' has no replica_of", r.annotation_id));
    }
    auto it = originals.find(*r.replica_of);
    if (it == originals.end()) {
      throw Error(fmt::format("replica '{}' references unknown annotation '{}'",
                              r.annotation_id, *r.replica_of));
    }
    const auto& o = *it->second;
    if (o.item_id != r.item_id || o.stratum != r.stratum || o.label != r.label) {
      throw Error(fmt::format("replica '{}' disagrees with original '{}'", r.annotation_id,
                              o.annotation_id));
    }
  }
}

std::vector<std::pair<std::string, std::vector<const AnnotationRecord*>>>
group_by_item(const Dataset& dataset) {
  std::vector<std::pair<std::string, std::vector<const AnnotationRecord*>>> groups;
  std::unordered_map<std::string_view, std::size_t> where;
  for (const auto& r : dataset.records) {
    auto [it, inserted] = where.emplace(r.item_id, groups.size());
    if (inserted) groups.emplace_back(r.item_id, std::vector<const AnnotationRecord*>{});
    groups[it->second].second.push_back(&r);
  }
  return groups;
}

std::map<std::string, std::map<StratumId, int>> item_stratum_counts(const Dataset& dataset) {
  std::map<std::string, std::map<StratumId, int>> counts;
  for (const auto& r : dataset.records) ++counts[r.item_id][r.stratum];
  return counts;
}

}  // namespace pair
