// pairsim: command-line front end for the simulation study.

#include <fmt/core.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "pair/error.hpp"
#include "pair/experiment.hpp"
#include "pair/io.hpp"
#include "pair/metrics.hpp"

namespace fs = std::filesystem;
using namespace pair;

namespace {

struct Globals {
  std::string config;
  std::string out_dir;
  int workers = 0;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const Globals& g) {
  ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (!g.out_dir.empty()) c.output_dir = g.out_dir;
  if (g.workers > 0) c.workers = g.workers;
  if (g.seed) c.seeds = {*g.seed};
  c.validate();
  return c;
}

fs::path out_path(const ExperimentConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  return c.output_dir / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text << '\n';
}

int cmd_simulate(const Globals& g, double beta) {
  const ExperimentConfig c = load(g);
  const std::uint64_t seed = c.seeds.front();
  const Study study = prepare_study(c);
  io::save_gold(out_path(c, "gold.jsonl"), study.gold);
  io::save_gold(out_path(c, "train_gold.jsonl"), study.splits.train);
  io::save_gold(out_path(c, "dev_gold.jsonl"), study.splits.dev);
  io::save_gold(out_path(c, "test_gold.jsonl"), study.splits.test);
  for (auto r : c.recipes) {
    const Dataset d = recipe_dataset(study.gold, r, beta, seed, c.task, c.benchmark);
    const auto name = fmt::format("{}.jsonl", to_string(r));
    io::save_dataset(out_path(c, name), d);
    fmt::print("{:<15} {:>7} records  positive proportion {:.4f}\n", to_string(r),
               d.records.size(), positive_proportion(d));
  }
  fmt::print("wrote {} items to {}\n", study.gold.size(), c.output_dir.string());
  return 0;
}

int cmd_adjust(const Globals& g, const std::string& input, const std::string& benchmark,
               std::optional<double> k, const std::string& output) {
  const ExperimentConfig c = load(g);
  const Dataset d = io::load_dataset(input);
  const PopulationBenchmark bench = benchmark.empty() ? c.benchmark : io::load_benchmark(benchmark);
  const NormalizePolicy policy = k ? NormalizePolicy{ExplicitK{*k}} : NormalizePolicy{MinToOne{}};
  const AdjustResult r = apply_pair(d, bench, policy);
  const fs::path dest = output.empty() ? out_path(c, "adjusted.jsonl") : fs::path(output);
  io::save_dataset(dest, r.dataset);
  write_text(dest.parent_path() / "weights.json", io::weight_table_json(r.weights));
  for (const auto& [s, w] : r.weights.strata) {
    fmt::print("{:<6} raw {:.6f}  normalized {:.6f}  replicas {}\n", s, w.raw, w.normalized,
               w.replicas);
  }
  fmt::print("K = {:.6f}; {} -> {} records\n", r.weights.k, d.records.size(),
             r.dataset.records.size());
  return 0;
}

int cmd_train(const Globals& g, const std::string& dataset, const std::string& texts,
              const std::string& dev, const std::string& output) {
  const ExperimentConfig c = load(g);
  const Dataset d = io::load_dataset(dataset);
  const GoldTable t = io::load_gold(texts);
  std::optional<Dataset> dev_set;
  if (!dev.empty()) dev_set = io::load_dataset(dev);
  TrainHistory h;
  const Model m = train(d, t, c.hyper, c.seeds.front(), dev_set ? &*dev_set : nullptr, &h);
  for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
    if (h.dev_loss.empty()) {
      fmt::print("epoch {:>2}  train {:.5f}\n", e + 1, h.train_loss[e]);
    } else {
      fmt::print("epoch {:>2}  train {:.5f}  dev {:.5f}\n", e + 1, h.train_loss[e], h.dev_loss[e]);
    }
  }
  fmt::print("selected epoch {}\n", h.selected_epoch);
  io::save_model(output.empty() ? out_path(c, "model.bin") : fs::path(output), m);
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& model, const std::string& gold) {
  const ExperimentConfig c = load(g);
  const Model m = io::load_model(model);
  const GoldTable test = io::load_gold(gold);
  const PredictionSet preds = predict(m, test);
  const double a = acb(preds, test);
  const F1Score f = f1(preds, test, c.f1_threshold, c.f1_rule);
  write_text(out_path(c, "predictions.json"), io::predictions_json(preds));
  nlohmann::json j{{"acb", a},
                   {"f1", f.value},
                   {"precision", f.precision},
                   {"recall", f.recall},
                   {"f1_undefined", f.undefined},
                   {"gold_rule", to_string(c.f1_rule)},
                   {"n_items", test.size()}};
  write_text(out_path(c, "metrics.json"), j.dump(2));
  fmt::print("ACB {:.6f}  F1 {:.6f}  ({} items)\n", a, f.value, test.size());
  return 0;
}

void print_aggregates(const std::vector<AggregateReport>& aggregates) {
  fmt::print("{:<4} {:<15} {:>6}  {:>17}  {:>17}  {:>17}\n", "task", "recipe", "beta", "acb",
             "f1", "positive_prop");
  for (const auto& a : aggregates) {
    fmt::print("{:<4} {:<15} {:>6.3f}  {:.4f} +/- {:.4f}  {:.4f} +/- {:.4f}  {:.4f} +/- {:.4f}\n",
               to_string(a.task), to_string(a.recipe), a.beta, a.acb.mean, a.acb.std, a.f1.mean,
               a.f1.std, a.positive_proportion.mean, a.positive_proportion.std);
  }
}

int report_failures(const std::vector<ResultRow>& rows) {
  int failed = 0;
  for (const auto& r : rows) {
    if (r.ok) continue;
    ++failed;
    fmt::print(stderr, "failed cell {} {} beta={} seed={}: {}\n", to_string(r.task),
               to_string(r.recipe), r.beta, r.seed, r.error);
  }
  return failed;
}

int cmd_sweep(const Globals& g) {
  const ExperimentConfig c = load(g);
  const SweepResult r = sweep(c);
  {
    std::ofstream out(out_path(c, "report.csv"), std::ios::binary);
    write_report(out, r);
  }
  {
    std::ofstream out(out_path(c, "timings.csv"), std::ios::binary);
    write_timings(out, r);
  }
  print_aggregates(r.aggregates);
  report_failures(r.rows);
  fmt::print("{} cells, {} failed; report in {}\n", r.rows.size(), r.failed,
             (c.output_dir / "report.csv").string());
  return r.failed == 0 ? 0 : 1;
}

int cmd_report(const std::string& input) {
  std::ifstream in(input);
  if (!in) throw Error(fmt::format("cannot read {}", input));
  const auto rows = read_report(in);
  print_aggregates(aggregate_rows(rows));
  return report_failures(rows) == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annotation-bias simulation and population-aligned replication"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("-c,--config", g.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("-o,--out-dir", g.out_dir, "Output directory (overrides config)");
  app.add_option("-w,--workers", g.workers, "Worker threads for sweep")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("-s,--seed", seed, "Use this single seed");
  app.fallthrough();

  auto* sim = app.add_subcommand("simulate", "Synthesize gold and recipe datasets for one beta");
  double beta = 0.3;
  sim->add_option("--beta", beta, "Bias offset")->check(CLI::Range(0.0, 0.5));

  auto* adj = app.add_subcommand("adjust", "Apply replication to a dataset");
  std::string adj_in, adj_bench, adj_out;
  std::optional<double> adj_k;
  adj->add_option("input", adj_in, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  adj->add_option("-b,--benchmark", adj_bench, "Benchmark JSON (default: config)")
      ->check(CLI::ExistingFile);
  adj->add_option("-k", adj_k, "Explicit normalization constant instead of 1/min(raw)");
  adj->add_option("--output", adj_out, "Adjusted dataset path");

  auto* tr = app.add_subcommand("train", "Train the logistic model on a dataset");
  std::string tr_data, tr_texts, tr_dev, tr_out;
  tr->add_option("dataset", tr_data, "Training dataset JSONL")->required()->check(CLI::ExistingFile);
  tr->add_option("-t,--texts", tr_texts, "Gold JSONL holding item texts")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--dev", tr_dev, "Development dataset for epoch selection")
      ->check(CLI::ExistingFile);
  tr->add_option("--output", tr_out, "Model path");

  auto* ev = app.add_subcommand("evaluate", "Score a model against a gold table");
  std::string ev_model, ev_gold;
  ev->add_option("model", ev_model, "Model file")->required()->check(CLI::ExistingFile);
  ev->add_option("-g,--gold", ev_gold, "Gold JSONL")->required()->check(CLI::ExistingFile);

  app.add_subcommand("sweep", "Run every recipe x beta x seed cell");

  auto* rep = app.add_subcommand("report", "Aggregate an existing report file");
  std::string rep_in;
  rep->add_option("input", rep_in, "report.csv")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    if (*sim) return cmd_simulate(g, beta);
    if (*adj) return cmd_adjust(g, adj_in, adj_bench, adj_k, adj_out);
    if (*tr) return cmd_train(g, tr_data, tr_texts, tr_dev, tr_out);
    if (*ev) return cmd_evaluate(g, ev_model, ev_gold);
    if (*rep) return cmd_report(rep_in);
    return cmd_sweep(g);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
