#pragma once

// Text persistence of models and intermediate tables. Doubles are written in
// shortest round-trip form so that reloading reproduces them bit for bit.

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "loadpat/clustering.hpp"
#include "loadpat/feature_selection.hpp"
#include "loadpat/ingest.hpp"
#include "loadpat/predictor.hpp"

namespace loadpat {

nlohmann::json to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const nlohmann::json& j);

void write_knee_csv(std::ostream& out, const KneeCurve& curve);

void write_shares_csv(std::ostream& out, std::span<const PatternShares> shares);
std::vector<PatternShares> read_shares_csv(std::istream& in, const std::string& day_type);

nlohmann::json to_json(std::span<const LabelMap> maps);
std::vector<LabelMap> label_maps_from_json(const nlohmann::json& j);

EncodedMetadata read_socio_csv(std::istream& in, std::vector<LabelMap> maps);

struct ModelBundle {
  std::string day_type;
  std::string branch;  // "all" or "selected"
  std::vector<PatternPredictor> predictors;
  std::vector<double> final_losses;
};

nlohmann::json to_json(const ModelBundle& bundle);
ModelBundle model_bundle_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SelectionReport& report);
FeatureSubset feature_subset_from_json(const nlohmann::json& j);

void write_predictions_csv(std::ostream& out, const std::string& branch, std::span<const SharePrediction> preds,
                           bool header);
/// Reads rows of one branch, in file order.
std::vector<SharePrediction> read_predictions_csv(std::istream& in, const std::string& branch);

}  // namespace loadpat
