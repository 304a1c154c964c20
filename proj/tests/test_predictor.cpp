#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "loadpat/error.hpp"
#include "loadpat/predictor.hpp"
#include "oracles.hpp"

using namespace loadpat;

namespace {

Encoding two_features() {
  Encoding e;
  e.features = {"a", "b"};
  e.arities = {3, 2};
  return e;
}

Dataset random_dataset(std::size_t n, std::size_t width, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> x(width);
    for (auto& v : x) v = u(rng);
    d.inputs.push_back(std::move(x));
    d.targets.push_back(u(rng));
  }
  return d;
}

}  // namespace

TEST_CASE("one-hot encoding") {
  const auto enc = two_features();
  CHECK(enc.width() == 5);
  const auto x = one_hot(SocioRecord{"c", {{"b", 1}, {"a", 2}}}, enc);
  CHECK(x.consumer_id == "c");
  CHECK(x.values == std::vector<double>{0, 0, 1, 0, 1});
  CHECK(one_hot(SocioRecord{"c", {{"a", 0}, {"b", 0}}}, enc).values == std::vector<double>{1, 0, 0, 1, 0});
  CHECK_THROWS_AS(one_hot(SocioRecord{"c", {{"a", 3}, {"b", 0}}}, enc), Error);
  CHECK_THROWS_AS(one_hot(SocioRecord{"c", {{"a", 0}}}, enc), Error);

  const std::vector<LabelMap> maps{LabelMap{"a", FeatureKind::Categorical, {"x", "y", "z"}, {}},
                                   LabelMap{"b", FeatureKind::Categorical, {"p", "q"}, {}}};
  const std::vector<std::string> only_b{"b"};
  const auto eb = Encoding::from_maps(maps, only_b);
  CHECK(eb.features == only_b);
  CHECK(eb.arities == std::vector<int>{2});
}

TEST_CASE("initialization") {
  const std::vector<int> sizes{4, 3, 1};
  const auto a = init_mlp(sizes, 9);
  const auto b = init_mlp(sizes, 9);
  CHECK(a.weights == b.weights);
  CHECK(a.parameter_count() == 4 * 3 + 3 + 3 + 1);
  CHECK(a.weights[0].size() == 12);
  for (double w : a.weights[0]) CHECK(std::abs(w) <= 0.5);
  for (const auto& bias : a.biases)
    for (double v : bias) CHECK(v == 0.0);
  CHECK(init_mlp(sizes, 10).weights != a.weights);

  const auto z = init_mlp(sizes, 9, 0.0);
  for (const auto& w : z.weights)
    for (double v : w) CHECK(v == 0.0);

  CHECK_THROWS_AS(init_mlp(std::vector<int>{4}, 1), Error);
  CHECK_THROWS_AS(init_mlp(std::vector<int>{4, 0, 1}, 1), Error);
  CHECK_THROWS_AS(init_mlp(std::vector<int>{4, 3, 2}, 1), Error);
}

TEST_CASE("forward pass") {
  const auto z = init_mlp(std::vector<int>{3, 4, 1}, 1, 0.0);
  CHECK(forward(z, std::vector<double>{1, 2, 3}) == 0.5);
  CHECK_THROWS_AS(forward(z, std::vector<double>{1, 2}), Error);

  auto m = init_mlp(std::vector<int>{1, 1, 1}, 1);
  m.weights = {{0.5}, {1.5}};
  m.biases = {{-0.2}, {0.1}};
  const double h = 1.0 / (1.0 + std::exp(-(0.5 * 2.0 - 0.2)));
  const double y = 1.0 / (1.0 + std::exp(-(1.5 * h + 0.1)));
  CHECK(forward(m, std::vector<double>{2.0}) == doctest::Approx(y).epsilon(1e-15));
}

TEST_CASE("mean squared error") {
  CHECK(loss_mse(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}) == 0.25);
  CHECK(loss_mse(std::vector<double>{0.2}, std::vector<double>{0.2}) == 0.0);
  CHECK_THROWS_AS(loss_mse(std::vector<double>{}, std::vector<double>{}), Error);
  CHECK_THROWS_AS(loss_mse(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST_CASE("gradients") {
  std::mt19937_64 rng(3);
  auto m = init_mlp(std::vector<int>{5, 4, 3, 1}, 77);
  const auto data = random_dataset(12, 5, rng);
  CHECK(loss(m, data) == doctest::Approx(oracle::mlp_loss(m, data)).epsilon(1e-14));

  const auto g = gradient(m, data);
  CHECK(oracle::gradient_check(m, data, g) < 1e-5);

  // Batch gradient equals the mean of per-example gradients.
  Gradients sum = g;
  for (auto& w : sum.weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : sum.biases) std::fill(b.begin(), b.end(), 0.0);
  for (std::size_t s = 0; s < data.size(); ++s) {
    Dataset one{{data.inputs[s]}, {data.targets[s]}};
    const auto gs = gradient(m, one);
    for (std::size_t l = 0; l < sum.weights.size(); ++l) {
      for (std::size_t i = 0; i < sum.weights[l].size(); ++i) sum.weights[l][i] += gs.weights[l][i] / data.size();
      for (std::size_t i = 0; i < sum.biases[l].size(); ++i) sum.biases[l][i] += gs.biases[l][i] / data.size();
    }
  }
  for (std::size_t l = 0; l < sum.weights.size(); ++l)
    for (std::size_t i = 0; i < sum.weights[l].size(); ++i)
      CHECK(sum.weights[l][i] == doctest::Approx(g.weights[l][i]).epsilon(1e-12));

  // Zero gradient when every prediction hits its target.
  Dataset exact = data;
  for (std::size_t s = 0; s < exact.size(); ++s) exact.targets[s] = forward(m, exact.inputs[s]);
  const auto g0 = gradient(m, exact);
  for (const auto& w : g0.weights)
    for (double v : w) CHECK(v == 0.0);
}

TEST_CASE("training") {
  Dataset toy;
  toy.inputs = {{1, 0}, {0, 1}};
  toy.targets = {0.9, 0.1};

  const auto m0 = init_mlp(std::vector<int>{2, 16, 1}, 5);
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK(train(m0, toy, cfg).model.weights == m0.weights);

  cfg.learning_rate = 0.5;
  cfg.epochs = 2000;
  const auto fit = train(m0, toy, cfg);
  CHECK(loss(fit.model, toy) < 0.01);
  CHECK(fit.loss_trace.size() == 2000);

  cfg.learning_rate = 0.05;
  cfg.epochs = 500;
  for (double l : train(m0, toy, cfg).loss_trace) CHECK(std::isfinite(l));

  cfg.learning_rate = 1e-3;
  cfg.epochs = 100;
  const auto slow = train(m0, toy, cfg).loss_trace;
  for (std::size_t i = 1; i < slow.size(); ++i) CHECK(slow[i] <= slow[i - 1]);

  cfg.learning_rate = 0.5;
  cfg.epochs = 300;
  CHECK(train(m0, toy, cfg).model.weights == train(m0, toy, cfg).model.weights);
}

TEST_CASE("share prediction renormalizes") {
  Encoding enc;
  enc.features = {"a"};
  enc.arities = {2};
  std::vector<PatternPredictor> preds;
  for (double bias : {0.0, std::log(3.0)}) {
    auto m = init_mlp(std::vector<int>{2, 1}, 1, 0.0);
    m.biases[0][0] = bias;
    preds.push_back({enc, m});
  }
  const auto p = predict_shares(preds, SocioRecord{"c", {{"a", 1}}});
  CHECK(p.raw[0] == 0.5);
  CHECK(p.raw[1] == doctest::Approx(0.75));
  CHECK(p.normalized[0] == doctest::Approx(0.4));
  CHECK(p.normalized[1] == doctest::Approx(0.6));
  CHECK(std::accumulate(p.normalized.begin(), p.normalized.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("baseline is the mean training share vector") {
  std::vector<PatternShares> train(2);
  train[0].shares = {0.2, 0.8};
  train[1].shares = {0.6, 0.4};
  const auto b = baseline_predict(train);
  CHECK(b[0] == doctest::Approx(0.4));
  CHECK(b[1] == doctest::Approx(0.6));
  CHECK_THROWS_AS(baseline_predict(std::vector<PatternShares>{}), Error);
}
