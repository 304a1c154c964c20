#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "loadpat/clustering.hpp"
#include "loadpat/config.hpp"
#include "loadpat/report.hpp"

namespace loadpat {

namespace fs = std::filesystem;

/// File layout of a run directory.
struct RunDir {
  fs::path root;

  fs::path resolved_config() const { return root / "config.resolved.json"; }
  fs::path rejections() const { return root / "rejections.csv"; }
  fs::path retention() const { return root / "retention.json"; }
  fs::path labels() const { return root / "labels.json"; }
  fs::path socio() const { return root / "socio.csv"; }
  fs::path profiles(DayType d) const { return root / ("profiles_" + std::string(to_string(d)) + ".csv"); }
  fs::path knee(DayType d) const { return root / ("knee_" + std::string(to_string(d)) + ".csv"); }
  fs::path cluster(DayType d) const { return root / ("cluster_" + std::string(to_string(d)) + ".json"); }
  fs::path shares(DayType d) const { return root / ("shares_" + std::string(to_string(d)) + ".csv"); }
  fs::path split(DayType d) const { return root / ("split_" + std::string(to_string(d)) + ".json"); }
  fs::path selection_csv(DayType d) const { return root / ("selection_" + std::string(to_string(d)) + ".csv"); }
  fs::path selection_json(DayType d) const { return root / ("selection_" + std::string(to_string(d)) + ".json"); }
  fs::path models(DayType d, const std::string& branch) const {
    return root / ("models_" + std::string(to_string(d)) + "_" + branch + ".json");
  }
  fs::path predictions(DayType d) const { return root / ("predictions_" + std::string(to_string(d)) + ".csv"); }
  fs::path report_txt() const { return root / "report.txt"; }
  fs::path report_csv() const { return root / "report.csv"; }
};

inline constexpr const char* kBranchAll = "all";
inline constexpr const char* kBranchSelected = "selected";
inline constexpr const char* kBranchBaseline = "baseline";

struct TrainTestSplit {
  std::vector<std::string> train;  // sorted
  std::vector<std::string> test;   // sorted
};

/// Seeded split by consumer, stratified on each consumer's dominant pattern.
TrainTestSplit split_train_test(std::span<const PatternShares> shares, double train_fraction, std::uint64_t seed);

/// Pipeline stages. Each reads its inputs from the run directory (or the
/// configured input files for ingest) and writes its outputs there.
/// Module errors are rethrown as StageError naming the stage.
void stage_ingest(const PipelineConfig& cfg, const RunDir& run, std::ostream* log = nullptr);
KneeCurve stage_cluster(const PipelineConfig& cfg, const RunDir& run, DayType day, std::ostream* log = nullptr);
void stage_select(const PipelineConfig& cfg, const RunDir& run, DayType day, std::ostream* log = nullptr);
void stage_train(const PipelineConfig& cfg, const RunDir& run, DayType day, std::ostream* log = nullptr);
void stage_predict(const PipelineConfig& cfg, const RunDir& run, DayType day, std::ostream* log = nullptr);
EvaluationReport stage_evaluate(const PipelineConfig& cfg, const RunDir& run, std::ostream* log = nullptr);

/// ingest -> cluster -> select -> train -> predict -> evaluate.
EvaluationReport run_pipeline(const PipelineConfig& cfg, const fs::path& out_dir, std::ostream* log = nullptr);

}  // namespace loadpat
