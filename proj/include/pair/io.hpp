#pragma once

// File formats. Gold tables and datasets are line-delimited JSON; the model is a
// versioned little-endian binary dump.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pair/pair_adjust.hpp"
#include "pair/simulation.hpp"
#include "pair/trainer.hpp"

namespace pair::io {

void write_gold(std::ostream& out, const GoldTable& gold);
GoldTable read_gold(std::istream& in);
void save_gold(const std::filesystem::path& path, const GoldTable& gold);
GoldTable load_gold(const std::filesystem::path& path);

/// First line is {"meta": {...}}, then one annotation record per line.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

/// JSON object stratum -> share; validated on load.
PopulationBenchmark parse_benchmark(const std::string& json_text);
PopulationBenchmark load_benchmark(const std::filesystem::path& path);
std::string benchmark_json(const PopulationBenchmark& benchmark);

std::string weight_table_json(const WeightTable& weights);

void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

std::string predictions_json(const PredictionSet& preds);

/// Per-item rows of an annotation file: {"item_id", "text", "ol": [..], "hs": [..]}.
struct AnnotationFile {
  std::vector<RawItem> ol;
  std::vector<RawItem> hs;
  std::size_t malformed = 0;
};

/// Rows that fail to parse, lack a field, or carry non-binary labels are
/// skipped and counted. Throws when the file is unreadable or nothing parses.
AnnotationFile read_annotation_file(const std::filesystem::path& path);

}  // namespace pair::io
