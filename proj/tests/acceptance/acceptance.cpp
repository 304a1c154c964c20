// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "loadpat/clustering.hpp"
#include "loadpat/feature_selection.hpp"
#include "loadpat/ingest.hpp"
#include "loadpat/pipeline.hpp"
#include "loadpat/predictor.hpp"
#include "loadpat/report.hpp"
#include "loadpat/rng.hpp"
#include "loadpat/synthetic.hpp"
#include "oracles.hpp"

using namespace loadpat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) out.require(false, "runtime over budget");
  if (!out.ok) ++failures;
  std::printf("%s  %-28s %8.2fs (budget %gs)%s%s\n", out.ok ? "PASS" : "FAIL", name.c_str(), secs, budget_s,
              out.detail.empty() ? "" : "  ", out.detail.c_str());
  std::fflush(stdout);
}

std::vector<int> random_labels(std::size_t n, int arity, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, arity - 1);
  std::vector<int> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

CategoricalColumn column(std::vector<int> labels, int arity, std::string name = "c") {
  return CategoricalColumn::from_labels(std::move(name), std::move(labels), arity);
}

DiscretizedTarget as_target(std::vector<int> bins) {
  DiscretizedTarget t;
  t.bins = std::move(bins);
  for (int b = 0; b <= 5; ++b) t.bin_edges.push_back(b / 5.0);
  return t;
}

Outcome normalization() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> load(0.0, 8.0), scale(0.1, 50.0), shift(0.0, 10.0);
  int checked = 0;
  for (int day = 0; day < 1000; ++day) {
    DailyLoadProfile p;
    p.consumer_id = "c";
    for (auto& h : p.hours) h = load(rng);
    const auto n = normalize_profile(p);
    if (!n) continue;
    ++checked;
    const auto lo = std::min_element(p.hours.begin(), p.hours.end()) - p.hours.begin();
    const auto hi = std::max_element(p.hours.begin(), p.hours.end()) - p.hours.begin();
    o.require(n->values[lo] == 0.0 && n->values[hi] == 1.0, "extremes not exactly 0 and 1");
    for (double v : n->values) o.require(v >= 0.0 && v <= 1.0, "value outside [0,1]");

    DailyLoadProfile q = p;
    const double a = scale(rng), b = shift(rng);
    for (auto& h : q.hours) h = a * h + b;
    const auto m = normalize_profile(q);
    o.require(m.has_value(), "rescaled day became degenerate");
    if (m)
      for (int h = 0; h < kHoursPerDay; ++h)
        o.require(std::abs(m->values[h] - n->values[h]) <= 1e-12, "not invariant under affine rescaling");
  }
  o.require(checked == 1000, "unexpected degenerate day");
  return o;
}

Outcome kmeans_oracle() {
  Outcome o;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> npts(4, 10), kdist(2, 3);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const int n = npts(rng), k = kdist(rng);
    std::vector<std::vector<double>> pts(n, std::vector<double>(24));
    PointMatrix pm;
    pm.dim = 24;
    for (auto& p : pts) {
      for (auto& v : p) v = u(rng);
      pm.push_back(p);
    }
    KMeansOptions opts;
    opts.k = k;
    opts.seed = rng();
    const auto model = kmeans(pm, opts);
    const double best = oracle::kmeans_global_optimum(pts, k);
    worst = std::max(worst, std::abs(model.inertia - best));
    o.require(std::abs(model.inertia - best) <= 1e-9,
              "instance " + std::to_string(inst) + ": inertia " + std::to_string(model.inertia) + " vs optimum " +
                  std::to_string(best));
    // Every restart's trace must descend.
    for (int r = 0; r < opts.restarts; ++r) {
      const auto run = kmeans_single_run(pm, k, derive_seed(opts.seed, static_cast<std::uint64_t>(r)),
                                         opts.max_iters, opts.tol, false);
      for (std::size_t i = 1; i < run.inertia_trace.size(); ++i)
        o.require(run.inertia_trace[i] <= run.inertia_trace[i - 1] * (1 + 1e-12), "inertia increased");
    }
  }
  if (o.ok) o.detail = "max |gap| " + std::to_string(worst);
  return o;
}

Outcome knee_recovery() {
  Outcome o;
  const auto templates = default_templates(3);
  int hits = 0;
  std::string ks;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<NormalizedProfile> profiles;
    for (int i = 0; i < 300; ++i) {
      DailyLoadProfile raw;
      raw.consumer_id = "c";
      for (int h = 0; h < kHoursPerDay; ++h) raw.hours[h] = templates[i % 3][h] + noise(rng);
      if (auto n = normalize_profile(raw)) profiles.push_back(*n);
    }
    KneeOptions opts;
    opts.k_max = 10;
    opts.seed = seed;
    const auto curve = select_k(PointMatrix::from_profiles(profiles), opts);
    if (curve.k_star == 3) ++hits;
    ks += std::to_string(curve.k_star) + (seed < 10 ? "," : "");
  }
  o.require(hits >= 9, "K* = 3 on only " + std::to_string(hits) + "/10 seeds");
  o.detail = "K* per seed: " + ks;
  return o;
}

Outcome information() {
  Outcome o;
  o.require(entropy(column({0, 1, 0, 1}, 2)) == 1.0, "H(uniform binary) != 1");
  o.require(entropy(column({0, 1, 2, 3}, 4)) == 2.0, "H(uniform 4-ary) != 2");
  std::mt19937_64 rng(404);
  // Product-form joints: every (u,v) combination appears equally often.
  for (int t = 0; t < 50; ++t) {
    const int au = 2 + t % 3, av = 2 + (t / 3) % 3, reps = 1 + t % 4;
    std::vector<int> a, b;
    for (int i = 0; i < au; ++i)
      for (int j = 0; j < av; ++j)
        for (int r = 0; r < reps; ++r) {
          a.push_back(i);
          b.push_back(j);
        }
    o.require(std::abs(mutual_information(column(a, au), column(b, av))) <= 1e-12, "MI of product joint != 0");
  }
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 5 + rng() % 60;
    const int au = 1 + static_cast<int>(rng() % 5), av = 1 + static_cast<int>(rng() % 5);
    const auto u = column(random_labels(n, au, rng), au);
    const auto v = column(random_labels(n, av, rng), av);
    const double hu = entropy(u), hv = entropy(v), mi = mutual_information(u, v);
    o.require(std::abs(mutual_information(u, u) - hu) <= 1e-12, "MI(u,u) != H(u)");
    o.require(mi <= std::min(hu, hv) + 1e-12, "MI exceeds min entropy");
    o.require(mi >= -1e-12, "negative MI");
    o.require(std::abs(mi - oracle::mutual_information_bits(u.labels, v.labels)) <= 1e-12, "MI disagrees with oracle");
    const double s = symmetric_uncertainty(u, v);
    o.require(std::abs(s - symmetric_uncertainty(v, u)) <= 1e-12, "SU not symmetric");
    o.require(s >= 0.0 && s <= 1.0 + 1e-12, "SU outside [0,1]");
    if (hu > 0) o.require(std::abs(symmetric_uncertainty(u, u) - 1.0) <= 1e-12, "SU(u,u) != 1");
  }
  return o;
}

Outcome subset_oracle() {
  Outcome o;
  std::mt19937_64 rng(505);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 20 + rng() % 60;
    std::vector<CategoricalColumn> features;
    std::vector<std::vector<int>> raw;
    for (int f = 0; f < 4; ++f) {
      const int arity = 2 + static_cast<int>(rng() % 4);
      raw.push_back(random_labels(n, arity, rng));
      features.push_back(column(raw.back(), arity, "f" + std::to_string(f)));
    }
    auto bins = random_labels(n, 5, rng);
    // Make some instances informative.
    if (inst % 2 == 0)
      for (std::size_t i = 0; i < n; ++i)
        if (rng() % 3 != 0) bins[i] = raw[inst % 4][i] % 5;
    const auto subset = select_subset(features, as_target(bins));
    const double best = oracle::best_subset_merit(raw, bins);
    o.require(std::abs(subset.merit - best) <= 1e-12, "instance " + std::to_string(inst) + ": merit " +
                                                          std::to_string(subset.merit) + " vs " + std::to_string(best));
  }
  // Duplicate-feature redundancy.
  const auto base = random_labels(80, 3, rng);
  std::vector<int> bins(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) bins[i] = base[i] == 0 ? 0 : 4;
  const std::vector<CategoricalColumn> dup{column(base, 3, "a"), column(base, 3, "b"),
                                           column(random_labels(80, 2, rng), 2, "z")};
  const auto chosen = select_subset(dup, as_target(bins));
  o.require(chosen.members == std::vector<std::string>{"a"}, "duplicate pair not collapsed to a singleton");
  return o;
}

Outcome gradient_check() {
  Outcome o;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    std::vector<int> sizes{2 + static_cast<int>(rng() % 8)};
    const int hidden = 1 + static_cast<int>(rng() % 2);
    for (int h = 0; h < hidden; ++h) sizes.push_back(1 + static_cast<int>(rng() % 16));
    sizes.push_back(1);
    const auto model = init_mlp(sizes, rng(), 1.0 + 2.0 * u(rng));
    Dataset data;
    for (int s = 0; s < 16; ++s) {
      std::vector<double> x(sizes.front());
      for (auto& v : x) v = u(rng);
      data.inputs.push_back(std::move(x));
      data.targets.push_back(u(rng));
    }
    const double err = oracle::gradient_check(model, data, gradient(model, data));
    worst = std::max(worst, err);
    o.require(err < 1e-5, "model " + std::to_string(t) + ": relative error " + std::to_string(err));
  }
  if (o.ok) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst relative error %.2e", worst);
    o.detail = buf;
  }
  return o;
}

Outcome simplex() {
  Outcome o;
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const int k = 2 + static_cast<int>(rng() % 14);
    Encoding enc;
    SocioRecord rec{"c", {}};
    for (int f = 0; f < 3; ++f) {
      const int arity = 2 + static_cast<int>(rng() % 4);
      enc.features.push_back("f" + std::to_string(f));
      enc.arities.push_back(arity);
      rec.attributes.emplace_back(enc.features.back(), static_cast<int>(rng() % arity));
    }
    std::vector<PatternPredictor> preds;
    for (int p = 0; p < k; ++p) {
      const std::vector<int> sizes{static_cast<int>(enc.width()), 1 + static_cast<int>(rng() % 16), 1};
      auto m = init_mlp(sizes, rng(), 5.0 * u(rng));
      for (auto& b : m.biases)
        for (auto& v : b) v = 6.0 * (u(rng) - 0.5);
      preds.push_back({enc, std::move(m)});
    }
    const auto s = predict_shares(preds, rec);
    double sum = 0.0;
    for (double v : s.normalized) {
      sum += v;
      o.require(v >= 0.0, "negative share");
    }
    o.require(std::abs(sum - 1.0) <= 1e-9, "shares do not sum to 1");
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct EndToEnd {
  fs::path root;
  PipelineConfig cfg;
  EvaluationReport report;
};

EndToEnd prepare_fixture() {
  EndToEnd e;
  e.root = fs::temp_directory_path() / ("loadpat_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(e.root);
  fs::create_directories(e.root);
  SynthOptions opts;
  opts.seed = 1;
  opts.n_consumers = 200;
  opts.n_days = 60;
  opts.decoys = 4;
  opts.templates = default_templates(3);
  {
    std::ofstream loads(e.root / "loads.csv"), meta(e.root / "metadata.csv");
    make_synthetic_fixture(opts, loads, meta);
  }
  e.cfg.load_path = (e.root / "loads.csv").string();
  e.cfg.metadata_path = (e.root / "metadata.csv").string();
  e.cfg.min_days = 8;
  e.cfg.k_max = 10;
  e.cfg.learning_rate = 0.5;
  e.cfg.seed = opts.seed;
  return e;
}

Outcome end_to_end(EndToEnd& e) {
  Outcome o;
  e.report = run_pipeline(e.cfg, e.root / "run_a");
  std::string detail;
  for (const auto& s : e.report.sections) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s K=%zu w/ %.5f w/o %.5f base %.5f; ", s.day_type.c_str(), s.rows.size(),
                  s.average_with, s.average_without, s.baseline);
    detail += buf;
    o.require(s.average_with < s.average_without, s.day_type + ": with-selection not below without-selection");
    o.require(s.average_without < s.baseline, s.day_type + ": without-selection not below baseline");
    o.require(s.average_with <= 0.5 * s.baseline, s.day_type + ": with-selection above half the baseline");
  }
  if (detail.size() >= 2) detail.resize(detail.size() - 2);
  if (o.ok) o.detail = detail;
  else o.detail += " (" + detail + ")";
  return o;
}

Outcome report_arithmetic() {
  Outcome o;
  const auto wd = summarize_averages("workday", 0.01644, 0.00659, 0.01910);
  const auto we = summarize_averages("weekend", 0.01262, 0.00580, 0.03100);
  auto near = [&](double got, double want, const std::string& what) {
    o.require(std::abs(100.0 * got - want) <= 1.0, what + " = " + std::to_string(100.0 * got) + "%");
  };
  near(wd.reductions.with_vs_baseline, 65.0, "workday vs baseline");
  near(we.reductions.with_vs_baseline, 81.0, "weekend vs baseline");
  near(wd.reductions.with_vs_without, 60.0, "workday vs without selection");
  near(we.reductions.with_vs_without, 54.0, "weekend vs without selection");
  const auto table = render_table(EvaluationReport{{wd, we}});
  o.require(table.find("65.5%") != std::string::npos && table.find("81.3%") != std::string::npos,
            "rendered table lacks the reduction cells");
  return o;
}

Outcome determinism(const EndToEnd& e) {
  Outcome o;
  run_pipeline(e.cfg, e.root / "run_b");
  const RunDir a{e.root / "run_a"}, b{e.root / "run_b"};
  std::vector<std::pair<fs::path, fs::path>> files{{a.report_txt(), b.report_txt()}, {a.report_csv(), b.report_csv()}};
  for (DayType d : e.cfg.day_types)
    for (const char* branch : {kBranchAll, kBranchSelected})
      files.emplace_back(a.models(d, branch), b.models(d, branch));
  for (const auto& [fa, fb] : files) {
    const auto x = slurp(fa);
    o.require(!x.empty(), fa.filename().string() + " missing");
    o.require(x == slurp(fb), fa.filename().string() + " differs between runs");
  }
  return o;
}

}  // namespace

int main() {
  criterion("normalization", 1, normalization);
  criterion("kmeans-global-optimum", 30, kmeans_oracle);
  criterion("knee-recovery", 30, knee_recovery);
  criterion("information-theory", 5, information);
  criterion("subset-selection-oracle", 10, subset_oracle);
  criterion("gradient-check", 10, gradient_check);
  criterion("simplex", 5, simplex);

  EndToEnd e;
  criterion("end-to-end-planted", 300, [&] {
    e = prepare_fixture();
    return end_to_end(e);
  });
  criterion("report-arithmetic", 1, report_arithmetic);
  criterion("determinism", 300, [&] { return determinism(e); });
  if (!e.root.empty()) fs::remove_all(e.root);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
