#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "loadpat/ingest.hpp"

namespace loadpat {

struct PipelineConfig {
  std::string load_path;
  std::string metadata_path;
  LoadSchema load_schema;
  Aggregation aggregation = Aggregation::Mean;
  MetadataSchema metadata;
  std::size_t min_days = 20;

  int k_min = 2;
  int k_max = 15;
  int restarts = 25;
  int max_iters = 300;
  double tol = 1e-6;
  bool allow_knee_fallback = true;

  int bins = 5;

  std::vector<int> hidden_layers = {16, 16};
  double learning_rate = 0.05;
  int epochs = 5000;
  double init_scale = 1.0;
  double train_fraction = 0.8;

  std::uint64_t seed = 2017;
  std::vector<DayType> day_types = {DayType::Workday, DayType::Weekend};
  bool parallel = true;
};

/// Parses a JSON config document. Unknown keys and out-of-range values throw
/// Error{BadConfig}.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

std::string dump_config(const PipelineConfig& cfg);

/// Checks numeric preconditions and, if `check_paths`, input file existence.
void validate(const PipelineConfig& cfg, bool check_paths);

}  // namespace loadpat
