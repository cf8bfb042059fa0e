#include "pair/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pair/error.hpp"
#include "pair/io.hpp"
#include "pair/rng.hpp"

namespace pair {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (betas.empty()) throw Error("config: betas must not be empty");
  for (double b : betas) {
    if (!(b >= 0.0 && b <= 0.5)) throw Error(fmt::format("config: beta {} outside [0, 0.5]", b));
  }
  if (seeds.empty()) throw Error("config: seeds must not be empty");
  if (recipes.empty()) throw Error("config: recipes must not be empty");
  for (auto r : recipes) {
    if (r == Recipe::custom) throw Error("config: recipe 'custom' cannot be swept");
  }
  if (split.train == 0) throw Error("config: the train split must not be empty");
  if (split.test == 0) throw Error("config: the test split must not be empty");
  if (!(f1_threshold > 0.0 && f1_threshold < 1.0)) throw Error("config: f1 threshold outside (0,1)");
  if (difficult && !(0.0 <= difficult->lo && difficult->lo <= difficult->hi && difficult->hi <= 1.0)) {
    throw Error("config: invalid difficult range");
  }
  if (workers < 1) throw Error("config: workers must be >= 1");
  benchmark.validate();
  hyper.validate();
  if (const auto* s = std::get_if<SyntheticGold>(&gold)) {
    if (static_cast<std::size_t>(s->n) != split.total() && !difficult) {
      throw Error(fmt::format("config: split counts sum to {} but the gold table has {} items",
                              split.total(), s->n));
    }
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(fmt::format("config: {}", e.what()));
  }
  ExperimentConfig c;
  try {
    if (j.contains("task")) c.task = parse_task(j["task"].get<std::string>());
    if (j.contains("betas")) c.betas = j["betas"].get<std::vector<double>>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("split")) {
      const auto& s = j["split"];
      c.split = {s.value("train", c.split.train), s.value("dev", c.split.dev),
                 s.value("test", c.split.test)};
    }
    c.split_seed = j.value("split_seed", c.split_seed);
    if (j.contains("gold")) {
      const auto& g = j["gold"];
      if (g.contains("file")) {
        c.gold = GoldFile{g["file"].get<std::string>()};
      } else if (g.contains("annotations")) {
        c.gold = AnnotationSource{g["annotations"].get<std::string>()};
      } else {
        SyntheticGold s;
        s.n = g.value("n", s.n);
        s.vocab_size = g.value("vocab_size", s.vocab_size);
        s.tokens_per_item = g.value("tokens_per_item", s.tokens_per_item);
        s.seed = g.value("seed", s.seed);
        const std::string shape = g.value("shape", std::string("uniform"));
        if (shape == "uniform") {
          s.shape = UniformShape{g.value("a", 0.0), g.value("b", 1.0)};
        } else if (shape == "rare") {
          s.shape = RareShape{g.value("mean", 0.167)};
        } else {
          throw Error(fmt::format("config: unknown gold shape '{}'", shape));
        }
        c.gold = s;
      }
    }
    if (j.contains("recipes")) {
      c.recipes.clear();
      for (const auto& r : j["recipes"]) c.recipes.push_back(parse_recipe(r.get<std::string>()));
    }
    if (j.contains("benchmark")) c.benchmark = io::parse_benchmark(j["benchmark"].dump());
    if (j.contains("hyper")) {
      const auto& h = j["hyper"];
      c.hyper.epochs = h.value("epochs", c.hyper.epochs);
      c.hyper.learning_rate = h.value("learning_rate", c.hyper.learning_rate);
      c.hyper.lr_decay = h.value("lr_decay", c.hyper.lr_decay);
      c.hyper.hash_dim = h.value("hash_dim", c.hyper.hash_dim);
    }
    if (j.contains("f1")) {
      c.f1_threshold = j["f1"].value("threshold", c.f1_threshold);
      if (j["f1"].contains("gold_rule")) {
        c.f1_rule = parse_gold_rule(j["f1"]["gold_rule"].get<std::string>());
      }
    }
    if (j.contains("difficult") && !j["difficult"].is_null()) {
      c.difficult = DifficultRange{j["difficult"].value("lo", 0.4), j["difficult"].value("hi", 0.6)};
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    c.workers = j.value("workers", c.workers);
  } catch (const json::exception& e) {
    throw Error(fmt::format("config: {}", e.what()));
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Splits split_items(const GoldTable& gold, const SplitCounts& counts, std::uint64_t seed) {
  if (counts.total() != gold.size()) {
    throw Error(fmt::format("split counts sum to {} but the table has {} items", counts.total(),
                            gold.size()));
  }
  std::vector<std::size_t> order(gold.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Stream s(seed, "split", 0, 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[s.below(i)]);

  std::vector<int> which(gold.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    which[order[k]] = k < counts.train ? 0 : (k < counts.train + counts.dev ? 1 : 2);
  }
  Splits out;
  GoldTable* parts[3] = {&out.train, &out.dev, &out.test};
  for (std::size_t i = 0; i < gold.size(); ++i) parts[which[i]]->entries.push_back(gold.entries[i]);
  return out;
}

SplitCounts scale_split(const SplitCounts& counts, std::size_t n) {
  const double total = static_cast<double>(counts.total());
  SplitCounts out;
  out.train = static_cast<std::size_t>(std::llround(n * (counts.train / total)));
  out.dev = static_cast<std::size_t>(std::llround(n * (counts.dev / total)));
  out.train = std::min(out.train, n);
  out.dev = std::min(out.dev, n - out.train);
  out.test = n - out.train - out.dev;
  return out;
}

IngestResult ingest_external(const std::filesystem::path& path, Task task, std::uint64_t seed,
                             int subsample) {
  auto file = io::read_annotation_file(path);
  IngestResult result;
  result.malformed = file.malformed;
  auto& items = task == Task::OL ? file.ol : file.hs;
  for (auto& item : items) {
    if (item.labels.size() < static_cast<std::size_t>(subsample)) {
      ++result.malformed;
    } else {
      result.raw.push_back(std::move(item));
    }
  }
  if (result.raw.empty()) {
    throw Error(fmt::format("'{}' has no item with at least {} labels", path.string(), subsample));
  }
  // OL and HS draw their subsamples independently.
  const std::uint64_t task_seed = mix64(seed ^ hash_tag(to_string(task)));
  result.gold = derive_gold(result.raw, subsample, task_seed);
  return result;
}

Study prepare_study(const ExperimentConfig& config) {
  GoldTable gold;
  if (const auto* s = std::get_if<SyntheticGold>(&config.gold)) {
    gold = synth_text(synth_gold(s->n, s->shape, s->seed), s->vocab_size, s->tokens_per_item,
                      mix64(s->seed + 1));
  } else if (const auto* f = std::get_if<GoldFile>(&config.gold)) {
    gold = io::load_gold(f->path);
  } else {
    gold = ingest_external(std::get<AnnotationSource>(config.gold).path, config.task).gold;
  }
  SplitCounts counts = config.split;
  if (config.difficult) {
    gold = filter_difficult(gold, config.difficult->lo, config.difficult->hi);
    if (gold.empty()) throw Error("difficult filter removed every item");
    counts = scale_split(config.split, gold.size());
  }
  Study study;
  study.splits = split_items(gold, counts, config.split_seed);
  study.gold = std::move(gold);
  return study;
}

Dataset recipe_dataset(const GoldTable& gold, Recipe recipe, double beta, std::uint64_t seed,
                       Task task, const PopulationBenchmark& benchmark) {
  Suite suite = build_suite(gold, beta, seed, task);
  switch (recipe) {
    case Recipe::representative:
      return std::move(suite.representative);
    case Recipe::nonrep1:
      return std::move(suite.nonrep1);
    case Recipe::nonrep2:
      return std::move(suite.nonrep2);
    case Recipe::adjusted:
      return apply_pair(suite.nonrep1, benchmark).dataset;
    case Recipe::custom:
      break;
  }
  throw Error("recipe 'custom' has no construction rule");
}

Dataset restrict_to(const Dataset& dataset, const GoldTable& items) {
  std::unordered_set<std::string_view> keep;
  for (const auto& e : items.entries) keep.insert(e.item_id);
  Dataset out;
  out.meta = dataset.meta;
  for (const auto& r : dataset.records) {
    if (keep.contains(r.item_id)) out.records.push_back(r);
  }
  return out;
}

namespace {

ResultRow make_row(Task task, Recipe recipe, double beta, std::uint64_t seed) {
  ResultRow row;
  row.task = task;
  row.recipe = recipe;
  row.beta = beta;
  row.seed = seed;
  return row;
}

}  // namespace

ResultRow run_cell(const ExperimentConfig& config, const Study& study, double beta,
                   std::uint64_t seed, Recipe recipe) {
  const auto start = std::chrono::steady_clock::now();
  ResultRow row = make_row(config.task, recipe, beta, seed);
  try {
    const Dataset full =
        recipe_dataset(study.gold, recipe, beta, seed, config.task, config.benchmark);
    const Dataset train_data = restrict_to(full, study.splits.train);
    const Dataset dev_data = restrict_to(full, study.splits.dev);
    const Model model = train(train_data, study.gold, config.hyper, seed,
                              dev_data.empty() ? nullptr : &dev_data);
    const PredictionSet preds = predict(model, study.splits.test);
    row.acb = acb(preds, study.splits.test);
    row.f1 = f1(preds, study.splits.test, config.f1_threshold, config.f1_rule).value;
    row.positive_proportion = positive_proportion(train_data);
  } catch (const std::exception& e) {
    throw Error(fmt::format("cell (recipe={}, beta={}, seed={}): {}", to_string(recipe), beta,
                            seed, e.what()));
  }
  row.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

namespace {

auto row_key(const ResultRow& r) { return std::tuple(r.task, r.recipe, r.beta, r.seed); }

}  // namespace

std::vector<AggregateReport> aggregate_rows(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<Task, Recipe, double>, std::vector<MetricsReport>> groups;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    groups[{r.task, r.recipe, r.beta}].push_back(
        {r.task, r.recipe, r.beta, r.acb, r.f1, r.positive_proportion, 0, r.seed});
  }
  std::vector<AggregateReport> out;
  for (const auto& [_, runs] : groups) out.push_back(aggregate(runs));
  return out;
}

SweepResult sweep(const ExperimentConfig& config) { return sweep(config, prepare_study(config)); }

SweepResult sweep(const ExperimentConfig& config, const Study& study) {
  config.validate();
  struct Cell {
    Recipe recipe;
    double beta;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto recipe : config.recipes) {
    for (double beta : config.betas) {
      for (auto seed : config.seeds) cells.push_back({recipe, beta, seed});
    }
  }
  std::vector<ResultRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& c = cells[i];
      try {
        rows[i] = run_cell(config, study, c.beta, c.seed, c.recipe);
      } catch (const std::exception& e) {
        rows[i] = make_row(config.task, c.recipe, c.beta, c.seed);
        rows[i].ok = false;
        rows[i].error = e.what();
      }
    }
  };
  const auto n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), cells.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }
  std::sort(rows.begin(), rows.end(),
            [](const ResultRow& a, const ResultRow& b) { return row_key(a) < row_key(b); });
  SweepResult result;
  result.failed = static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return !r.ok; }));
  result.aggregates = aggregate_rows(rows);
  result.rows = std::move(rows);
  return result;
}

namespace {

constexpr const char* kReportHeader =
    "kind,task,recipe,beta,seed,acb,f1,positive_proportion,acb_std,f1_std,"
    "positive_proportion_std,n_seeds,status";

std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

void write_report(std::ostream& out, const SweepResult& result) {
  out << kReportHeader << '\n';
  for (const auto& r : result.rows) {
    if (r.ok) {
      out << fmt::format("cell,{},{},{:.4f},{},{:.10f},{:.10f},{:.10f},,,,,ok\n",
                         to_string(r.task), to_string(r.recipe), r.beta, r.seed, r.acb, r.f1,
                         r.positive_proportion);
    } else {
      out << fmt::format("cell,{},{},{:.4f},{},,,,,,,,failed: {}\n", to_string(r.task),
                         to_string(r.recipe), r.beta, r.seed, sanitize(r.error));
    }
  }
  for (const auto& a : result.aggregates) {
    out << fmt::format(
        "aggregate,{},{},{:.4f},,{:.10f},{:.10f},{:.10f},{:.10f},{:.10f},{:.10f},{},ok\n",
        to_string(a.task), to_string(a.recipe), a.beta, a.acb.mean, a.f1.mean,
        a.positive_proportion.mean, a.acb.std, a.f1.std, a.positive_proportion.std,
        a.seeds.size());
  }
}

void write_timings(std::ostream& out, const SweepResult& result) {
  out << "task,recipe,beta,seed,wall_time_s\n";
  for (const auto& r : result.rows) {
    out << fmt::format("{},{},{:.4f},{},{:.3f}\n", to_string(r.task), to_string(r.recipe),
                       r.beta, r.seed, r.wall_time);
  }
}

std::vector<ResultRow> read_report(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("kind,", 0) != 0) {
    throw Error("not a report file (missing header)");
  }
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 13) throw Error(fmt::format("report line {}: expected 13 fields", lineno));
    if (f[0] != "cell") continue;
    try {
      ResultRow r;
      r.task = parse_task(f[1]);
      r.recipe = parse_recipe(f[2]);
      r.beta = std::stod(f[3]);
      r.seed = std::stoull(f[4]);
      r.ok = f[12] == "ok";
      if (r.ok) {
        r.acb = std::stod(f[5]);
        r.f1 = std::stod(f[6]);
        r.positive_proportion = std::stod(f[7]);
      } else {
        r.error = f[12];
      }
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(fmt::format("report line {}: malformed number", lineno));
    }
  }
  return rows;
}

}  // namespace pair
