#include "pair/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "pair/error.hpp"
#include "pair/rng.hpp"

namespace pair {

namespace {

constexpr int kTwelfths = 12;

std::string item_id_for(std::size_t index) { return fmt::format("i{:06d}", index); }

std::string stage(std::string_view name, Task task) {
  return fmt::format("{}/{}", name, to_string(task));
}

std::uint64_t slot_key(std::string_view stratum, int slot) {
  return mix64(hash_tag(stratum) + static_cast<std::uint64_t>(slot));
}

std::uint8_t draw_label(std::uint64_t seed, const std::string& stage_tag, std::size_t item,
                        std::string_view stratum, int slot, double p) {
  Stream s(seed, stage_tag, item, slot_key(stratum, slot));
  return s.bernoulli(p) ? 1 : 0;
}

AnnotationRecord make_record(const std::string& item_id, const StratumId& stratum, int slot,
                             std::uint8_t label) {
  AnnotationRecord r;
  r.annotation_id = fmt::format("{}/{}{}", item_id, stratum, slot);
  r.item_id = item_id;
  r.stratum = stratum;
  r.label = label;
  return r;
}

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 0.5)) {
    throw Error(fmt::format("beta {} outside [0, 0.5]", beta));
  }
}

}  // namespace

BiasSpec BiasSpec::two_type(double beta) {
  return BiasSpec{beta, {{"A", Direction::minus}, {"B", Direction::plus}}};
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t m, std::uint64_t seed,
                                           std::uint64_t item_index) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Stream s(seed, "subsample", item_index, 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::swap(idx[i], idx[i + s.below(n - i)]);
  }
  idx.resize(m);
  return idx;
}

GoldTable derive_gold(const std::vector<RawItem>& raw, std::optional<int> subsample,
                      std::uint64_t seed) {
  if (subsample && *subsample < 1) throw Error("subsample size must be positive");
  GoldTable gold;
  gold.entries.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& item = raw[i];
    if (item.labels.empty()) {
      throw Error(fmt::format("item '{}' has no annotations", item.item_id));
    }
    for (int l : item.labels) {
      if (l != 0 && l != 1) {
        throw Error(fmt::format("item '{}': non-binary label {}", item.item_id, l));
      }
    }
    std::vector<int> kept = item.labels;
    if (subsample) {
      const auto m = static_cast<std::size_t>(*subsample);
      if (item.labels.size() < m) {
        throw Error(fmt::format("item '{}' has {} annotations, fewer than the subsample size {}",
                                item.item_id, item.labels.size(), m));
      }
      kept.clear();
      for (auto j : subsample_indices(item.labels.size(), m, seed, i)) {
        kept.push_back(item.labels[j]);
      }
    }
    const int positives = std::accumulate(kept.begin(), kept.end(), 0);
    const int k = static_cast<int>(kept.size());
    gold.entries.push_back(
        {item.item_id, item.text, static_cast<double>(positives) / k, k});
  }
  gold.validate();
  return gold;
}

double shift_probability(double p, double beta, Direction direction) noexcept {
  return direction == Direction::minus ? std::max(p - beta, 0.0) : std::min(p + beta, 1.0);
}

Dataset sample_pool(const GoldTable& gold, const PoolComposition& comp, const BiasSpec& bias,
                    std::uint64_t seed, Task task) {
  if (gold.empty()) throw Error("cannot sample from an empty gold table");
  check_beta(bias.beta);
  int total = 0;
  for (const auto& [stratum, count] : comp.counts) {
    if (count < 0) throw Error(fmt::format("negative count for stratum '{}'", stratum));
    if (!bias.direction.contains(stratum)) {
      throw Error(fmt::format("stratum '{}' has no bias direction", stratum));
    }
    total += count;
  }
  if (total < 1) throw Error("pool composition must have at least one annotation per item");

  const std::string tag = stage("sample", task);
  Dataset out;
  out.meta = {task, Recipe::custom, bias.beta, seed};
  out.records.reserve(gold.size() * static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& entry = gold.entries[i];
    for (const auto& [stratum, count] : comp.counts) {
      const double p = shift_probability(entry.p_gold, bias.beta, bias.direction.at(stratum));
      for (int slot = 0; slot < count; ++slot) {
        out.records.push_back(
            make_record(entry.item_id, stratum, slot, draw_label(seed, tag, i, stratum, slot, p)));
      }
    }
  }
  return out;
}

Suite build_suite(const GoldTable& gold, double beta, std::uint64_t seed, Task task) {
  check_beta(beta);
  const BiasSpec bias = BiasSpec::two_type(beta);
  Suite suite;
  suite.representative = sample_pool(gold, PoolComposition{{{"A", 6}, {"B", 6}}}, bias, seed, task);
  suite.representative.meta.recipe = Recipe::representative;

  suite.nonrep1.meta = {task, Recipe::nonrep1, beta, seed};
  suite.nonrep2.meta = {task, Recipe::nonrep2, beta, seed};
  suite.nonrep1.records.reserve(gold.size() * 9);
  suite.nonrep2.records.reserve(gold.size() * 12);

  const std::string sample_tag = stage("sample", task);
  const std::string delete_tag = stage("delete", task);
  const auto& rep = suite.representative.records;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    // Representative layout per item: A0..A5 then B0..B5.
    const std::size_t base = i * 12;
    const auto dropped = subsample_indices(6, 3, mix64(seed ^ hash_tag(delete_tag)), i);
    std::array<bool, 6> keep{true, true, true, true, true, true};
    for (auto d : dropped) keep[d] = false;

    for (int a = 0; a < 6; ++a) {
      suite.nonrep1.records.push_back(rep[base + static_cast<std::size_t>(a)]);
      suite.nonrep2.records.push_back(rep[base + static_cast<std::size_t>(a)]);
    }
    const auto& entry = gold.entries[i];
    const double p_a = shift_probability(entry.p_gold, beta, Direction::minus);
    for (int slot = 6; slot < 9; ++slot) {
      suite.nonrep2.records.push_back(make_record(
          entry.item_id, "A", slot, draw_label(seed, sample_tag, i, "A", slot, p_a)));
    }
    for (std::size_t b = 0; b < 6; ++b) {
      if (!keep[b]) continue;
      suite.nonrep1.records.push_back(rep[base + 6 + b]);
      suite.nonrep2.records.push_back(rep[base + 6 + b]);
    }
  }
  return suite;
}

GoldTable filter_difficult(const GoldTable& gold, double lo, double hi) {
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) {
    throw Error(fmt::format("invalid difficulty bounds [{}, {}]", lo, hi));
  }
  GoldTable out;
  std::copy_if(gold.entries.begin(), gold.entries.end(), std::back_inserter(out.entries),
               [&](const GoldEntry& e) { return lo <= e.p_gold && e.p_gold <= hi; });
  return out;
}

GoldTable synth_gold(int n, const GoldShape& shape, std::uint64_t seed) {
  if (n < 1) throw Error("synthetic gold table needs n >= 1");
  GoldTable gold;
  gold.entries.reserve(static_cast<std::size_t>(n));

  auto emit = [&](std::size_t i, int twelfths) {
    gold.entries.push_back({item_id_for(i), "", twelfths / double(kTwelfths), kTwelfths});
  };

  if (const auto* u = std::get_if<UniformShape>(&shape)) {
    if (!(0.0 <= u->a && u->a <= u->b && u->b <= 1.0)) {
      throw Error(fmt::format("uniform({}, {}) is not a sub-interval of [0,1]", u->a, u->b));
    }
    const int k_lo = static_cast<int>(std::ceil(u->a * kTwelfths - 1e-9));
    const int k_hi = static_cast<int>(std::floor(u->b * kTwelfths + 1e-9));
    if (k_lo > k_hi) {
      throw Error(fmt::format("uniform({}, {}) contains no multiple of 1/12", u->a, u->b));
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      Stream s(seed, "gold/uniform", i, 0);
      const double x = u->a + (u->b - u->a) * s.uniform();
      emit(i, std::clamp(static_cast<int>(std::lround(x * kTwelfths)), k_lo, k_hi));
    }
  } else {
    const double mean = std::get<RareShape>(shape).mean;
    if (!(mean > 0.0 && mean < 1.0)) {
      throw Error(fmt::format("rare shape mean {} outside (0,1)", mean));
    }
    const double alpha = 0.5;
    const double beta = alpha * (1.0 - mean) / mean;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      Stream s(seed, "gold/rare", i, 0);
      std::gamma_distribution<double> ga(alpha, 1.0);
      std::gamma_distribution<double> gb(beta, 1.0);
      const double x = ga(s);
      const double y = gb(s);
      const double p = (x + y) > 0.0 ? x / (x + y) : 0.0;
      emit(i, static_cast<int>(std::lround(p * kTwelfths)));
    }
  }
  return gold;
}

GoldTable synth_text(GoldTable gold, int vocab_size, int tokens_per_item, std::uint64_t seed) {
  if (tokens_per_item < 1) throw Error("tokens_per_item must be at least 1");
  if (vocab_size < 2) throw Error("vocab_size must be at least 2");
  const auto toxic_half = static_cast<std::uint64_t>(vocab_size / 2);
  const auto benign_half = static_cast<std::uint64_t>(vocab_size) - toxic_half;
  for (std::size_t i = 0; i < gold.entries.size(); ++i) {
    auto& e = gold.entries[i];
    Stream s(seed, "text", i, 0);
    std::string text;
    text.reserve(static_cast<std::size_t>(tokens_per_item) * 6);
    for (int t = 0; t < tokens_per_item; ++t) {
      const std::uint64_t j =
          s.bernoulli(e.p_gold) ? s.below(toxic_half) : toxic_half + s.below(benign_half);
      if (t > 0) text.push_back(' ');
      fmt::format_to(std::back_inserter(text), "w{}", j);
    }
    e.text = std::move(text);
  }
  return gold;
}

bool is_toxic_token(std::string_view token, int vocab_size) {
  if (token.size() < 2 || token.front() != 'w') return false;
  int j = 0;
  for (char c : token.substr(1)) {
    if (c < '0' || c > '9') return false;
    j = j * 10 + (c - '0');
  }
  return j < vocab_size / 2;
}

}  // namespace pair
