#include "loadpat/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadpat/error.hpp"
#include "loadpat/rng.hpp"

namespace loadpat {

std::size_t Encoding::width() const {
  return static_cast<std::size_t>(std::accumulate(arities.begin(), arities.end(), 0));
}

Encoding Encoding::from_maps(std::span<const LabelMap> maps, std::span<const std::string> features) {
  Encoding enc;
  for (const auto& f : features) {
    auto it = std::find_if(maps.begin(), maps.end(), [&](const LabelMap& m) { return m.feature == f; });
    if (it == maps.end()) throw Error(ErrorCode::MissingFeature, "no label map for feature '" + f + "'");
    enc.features.push_back(f);
    enc.arities.push_back(it->arity());
  }
  return enc;
}

EncodedInput one_hot(const SocioRecord& record, const Encoding& encoding) {
  EncodedInput out{record.consumer_id, std::vector<double>(encoding.width(), 0.0)};
  std::size_t offset = 0;
  for (std::size_t f = 0; f < encoding.features.size(); ++f) {
    auto label = record.label(encoding.features[f]);
    if (!label)
      throw Error(ErrorCode::MissingFeature,
                  "consumer '" + record.consumer_id + "' lacks feature '" + encoding.features[f] + "'");
    if (*label < 0 || *label >= encoding.arities[f])
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(*label) + " of '" + encoding.features[f] +
                                                  "' outside arity " + std::to_string(encoding.arities[f]));
    out.values[offset + static_cast<std::size_t>(*label)] = 1.0;
    offset += static_cast<std::size_t>(encoding.arities[f]);
  }
  return out;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

MlpModel init_mlp(std::span<const int> layer_sizes, std::uint64_t seed, double init_scale) {
  if (layer_sizes.size() < 2 || layer_sizes.back() != 1 ||
      std::any_of(layer_sizes.begin(), layer_sizes.end(), [](int s) { return s < 1; }))
    throw Error(ErrorCode::BadShape, "layer sizes must be positive with a final width of 1");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale))
    throw Error(ErrorCode::BadShape, "init_scale must be finite and non-negative");
  MlpModel m;
  m.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const auto fan_in = static_cast<std::size_t>(layer_sizes[l]);
    const auto fan_out = static_cast<std::size_t>(layer_sizes[l + 1]);
    const double bound = init_scale / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> w(fan_in * fan_out);
    for (auto& v : w) v = bound * dist(rng);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(fan_out, 0.0);
  }
  return m;
}

namespace {

void check_input(const MlpModel& model, std::size_t width) {
  if (model.layers() == 0 || width != model.input_width())
    throw Error(ErrorCode::ShapeMismatch, "input width " + std::to_string(width) + " does not match network input " +
                                              std::to_string(model.input_width()));
}

/// Layer outputs o_0 = x, o_l = sigmoid(W_l o_{l-1} + b_l).
std::vector<std::vector<double>> activations(const MlpModel& model, std::span<const double> x) {
  std::vector<std::vector<double>> acts;
  acts.reserve(model.layers() + 1);
  acts.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < model.layers(); ++l) {
    const auto& in = acts.back();
    const std::size_t fan_in = in.size();
    const auto fan_out = static_cast<std::size_t>(model.layer_sizes[l + 1]);
    std::vector<double> out(fan_out);
    for (std::size_t o = 0; o < fan_out; ++o) {
      double z = model.biases[l][o];
      const double* w = model.weights[l].data() + o * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) z += w[i] * in[i];
      out[o] = sigmoid(z);
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

void check_data(const MlpModel& model, const Dataset& data) {
  if (data.targets.empty()) throw Error(ErrorCode::Empty, "empty dataset");
  if (data.inputs.size() != data.targets.size())
    throw Error(ErrorCode::ShapeMismatch, "dataset inputs and targets differ in length");
  for (const auto& x : data.inputs) check_input(model, x.size());
}

}  // namespace

double forward(const MlpModel& model, std::span<const double> x) {
  check_input(model, x.size());
  return activations(model, x).back()[0];
}

double loss_mse(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size()) throw Error(ErrorCode::LengthMismatch, "predictions and targets differ in length");
  if (preds.empty()) throw Error(ErrorCode::Empty, "no predictions");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double r = targets[i] - preds[i];
    s += r * r;
  }
  return s / static_cast<double>(preds.size());
}

double loss(const MlpModel& model, const Dataset& data) {
  check_data(model, data);
  std::vector<double> preds;
  preds.reserve(data.size());
  for (const auto& x : data.inputs) preds.push_back(activations(model, x).back()[0]);
  return loss_mse(preds, data.targets);
}

namespace {

/// Accumulates the batch gradient into `g` and returns the batch loss.
double backprop(const MlpModel& model, const Dataset& data, Gradients& g) {
  const std::size_t layers = model.layers();
  g.weights.resize(layers);
  g.biases.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    g.weights[l].assign(model.weights[l].size(), 0.0);
    g.biases[l].assign(model.biases[l].size(), 0.0);
  }
  const double scale = 2.0 / static_cast<double>(data.size());
  double loss_sum = 0.0;
  std::vector<double> delta, next;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto acts = activations(model, data.inputs[s]);
    const double out = acts.back()[0];
    const double residual = out - data.targets[s];
    loss_sum += residual * residual;
    // dL/dz at the output, sigmoid'(z) = o (1 - o)
    delta.assign(1, scale * residual * out * (1.0 - out));
    for (std::size_t l = layers; l-- > 0;) {
      const auto& in = acts[l];
      const std::size_t fan_in = in.size();
      for (std::size_t o = 0; o < delta.size(); ++o) {
        g.biases[l][o] += delta[o];
        double* gw = g.weights[l].data() + o * fan_in;
        for (std::size_t i = 0; i < fan_in; ++i) gw[i] += delta[o] * in[i];
      }
      if (l == 0) break;
      next.assign(fan_in, 0.0);
      for (std::size_t o = 0; o < delta.size(); ++o) {
        const double* w = model.weights[l].data() + o * fan_in;
        for (std::size_t i = 0; i < fan_in; ++i) next[i] += w[i] * delta[o];
      }
      for (std::size_t i = 0; i < fan_in; ++i) next[i] *= in[i] * (1.0 - in[i]);
      delta.swap(next);
    }
  }
  return loss_sum / static_cast<double>(data.size());
}

}  // namespace

Gradients gradient(const MlpModel& model, const Dataset& data) {
  check_data(model, data);
  Gradients g;
  backprop(model, data, g);
  return g;
}

TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorCode::BadConfig, "learning_rate must be positive");
  if (cfg.epochs < 0) throw Error(ErrorCode::BadConfig, "epochs must be non-negative");
  check_data(model, data);
  TrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));
  Gradients g;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double l = backprop(model, data, g);
    if (!std::isfinite(l)) throw Error(ErrorCode::Diverged, "training loss became non-finite at epoch " + std::to_string(epoch));
    result.loss_trace.push_back(l);
    for (std::size_t layer = 0; layer < model.layers(); ++layer) {
      for (std::size_t i = 0; i < model.weights[layer].size(); ++i)
        model.weights[layer][i] -= cfg.learning_rate * g.weights[layer][i];
      for (std::size_t i = 0; i < model.biases[layer].size(); ++i)
        model.biases[layer][i] -= cfg.learning_rate * g.biases[layer][i];
    }
  }
  for (const auto& w : model.weights)
    if (!std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); }))
      throw Error(ErrorCode::Diverged, "trained weights are non-finite");
  result.model = std::move(model);
  return result;
}

SharePrediction predict_shares(std::span<const PatternPredictor> predictors, const SocioRecord& record) {
  if (predictors.empty()) throw Error(ErrorCode::Empty, "no pattern predictors");
  SharePrediction p;
  p.consumer_id = record.consumer_id;
  for (const auto& pred : predictors) p.raw.push_back(forward(pred.model, one_hot(record, pred.encoding).values));
  double total = 0.0;
  for (double r : p.raw) total += r;
  for (double r : p.raw) p.normalized.push_back(r / total);
  return p;
}

std::vector<double> baseline_predict(std::span<const PatternShares> training) {
  if (training.empty()) throw Error(ErrorCode::Empty, "baseline needs at least one training consumer");
  const std::size_t k = training.front().shares.size();
  std::vector<double> mean(k, 0.0);
  for (const auto& s : training) {
    if (s.shares.size() != k) throw Error(ErrorCode::ShapeMismatch, "share vectors differ in length");
    for (std::size_t j = 0; j < k; ++j) mean[j] += s.shares[j];
  }
  double total = 0.0;
  for (auto& m : mean) {
    m /= static_cast<double>(training.size());
    total += m;
  }
  for (auto& m : mean) m /= total;
  return mean;
}

}  // namespace loadpat
