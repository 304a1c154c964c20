#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "loadpat/clustering.hpp"
#include "loadpat/feature_selection.hpp"
#include "loadpat/ingest.hpp"

namespace loadpat {

/// Ordered feature blocks of a one-hot input vector.
struct Encoding {
  std::vector<std::string> features;
  std::vector<int> arities;

  std::size_t width() const;
  static Encoding from_maps(std::span<const LabelMap> maps, std::span<const std::string> features);
};

struct EncodedInput {
  std::string consumer_id;
  std::vector<double> values;
};

/// Throws Error{MissingFeature} or Error{LabelOutOfRange}.
EncodedInput one_hot(const SocioRecord& record, const Encoding& encoding);

/// Feedforward network with a sigmoid on every layer, output width 1.
/// weights[l] is (layer_sizes[l+1] x layer_sizes[l]) row-major.
struct MlpModel {
  int pattern = 0;
  std::vector<int> layer_sizes;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  std::size_t layers() const { return weights.size(); }
  std::size_t input_width() const { return layer_sizes.empty() ? 0 : static_cast<std::size_t>(layer_sizes.front()); }
  std::size_t parameter_count() const;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Uniform weights in +-init_scale/sqrt(fan_in), zero biases. Throws Error{BadShape}.
MlpModel init_mlp(std::span<const int> layer_sizes, std::uint64_t seed, double init_scale = 1.0);

/// Throws Error{ShapeMismatch}.
double forward(const MlpModel& model, std::span<const double> x);

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
};

double loss_mse(std::span<const double> preds, std::span<const double> targets);
double loss(const MlpModel& model, const Dataset& data);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

/// Exact gradient of the batch MSE by backpropagation.
Gradients gradient(const MlpModel& model, const Dataset& data);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 5000;
  std::uint64_t seed = 0;
  double init_scale = 1.0;
  double train_fraction = 0.8;
};

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_trace;  // batch loss at the start of each epoch
};

/// Full-batch gradient descent. Throws Error{Diverged} on a non-finite loss.
TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& cfg);

/// One trained network per pattern together with its input encoding.
struct PatternPredictor {
  Encoding encoding;
  MlpModel model;
};

struct SharePrediction {
  std::string consumer_id;
  std::vector<double> raw;
  std::vector<double> normalized;
};

SharePrediction predict_shares(std::span<const PatternPredictor> predictors, const SocioRecord& record);

/// Mean training share vector, renormalized to sum to 1. Throws Error{Empty}.
std::vector<double> baseline_predict(std::span<const PatternShares> training);

}  // namespace loadpat
