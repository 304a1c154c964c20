#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "loadpat/config.hpp"
#include "loadpat/error.hpp"
#include "loadpat/pipeline.hpp"
#include "loadpat/report.hpp"
#include "loadpat/synthetic.hpp"

using namespace loadpat;
namespace fs = std::filesystem;

namespace {

PatternShares shares_of(std::string id, std::vector<double> s) {
  PatternShares p;
  p.consumer_id = std::move(id);
  p.shares = std::move(s);
  return p;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("loadpat_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("evaluate per-pattern MSE") {
  const std::vector<SharePrediction> preds{{"a", {}, {0.6, 0.4}}, {"b", {}, {0.5, 0.5}}};
  const std::vector<PatternShares> actual{shares_of("a", {1.0, 0.0}), shares_of("b", {0.5, 0.5})};
  const auto mse = evaluate(preds, actual);
  CHECK(mse.per_pattern[0] == doctest::Approx(0.08));
  CHECK(mse.per_pattern[1] == doctest::Approx(0.08));
  CHECK(mse.average == doctest::Approx(0.08));

  const std::vector<PatternShares> swapped{actual[1], actual[0]};
  CHECK_THROWS_AS(evaluate(preds, swapped), Error);
}

TEST_CASE("report arithmetic from a full table") {
  const std::vector<PatternRow> workday{{0.00911, 0.00501, 0}, {0.01690, 0.00714, 0}, {0.02420, 0.00867, 0},
                                        {0.01420, 0.00627, 0}, {0.01610, 0.00588, 0}, {0.02690, 0.00910, 0},
                                        {0.00769, 0.00404, 0}};
  const std::vector<PatternRow> weekend{{0.01320, 0.00407, 0}, {0.01130, 0.00491, 0}, {0.01310, 0.00692, 0},
                                        {0.00342, 0.00279, 0}, {0.01220, 0.00984, 0}, {0.02880, 0.00864, 0},
                                        {0.00634, 0.00346, 0}};
  const auto wd = summarize("workday", workday);
  const auto we = summarize("weekend", weekend);
  CHECK(wd.average_without == doctest::Approx(0.01644).epsilon(5e-6 / 0.01644));
  CHECK(wd.average_with == doctest::Approx(0.00659).epsilon(5e-6 / 0.00659));
  CHECK(we.average_without == doctest::Approx(0.01262).epsilon(5e-6 / 0.01262));
  CHECK(we.average_with == doctest::Approx(0.00580).epsilon(5e-6 / 0.00580));

  double sum = 0.0;
  for (const auto& r : workday) sum += r.without_selection;
  CHECK(std::abs(wd.average_without - sum / 7) < 1e-12);
  CHECK(std::abs(wd.reductions.with_vs_without - (wd.average_without - wd.average_with) / wd.average_without) < 1e-12);

  const auto table = render_table(EvaluationReport{{wd, we}});
  for (int g = 1; g <= 7; ++g) CHECK(table.find("G" + std::to_string(g)) != std::string::npos);
  CHECK(table.find("G8") == std::string::npos);
  CHECK(table.find("Average MSE") != std::string::npos);

  const auto csv = render_csv(EvaluationReport{{wd, we}});
  CHECK(csv.rfind("day_type,row,without_selection,with_selection,baseline\n", 0) == 0);
}

TEST_CASE("reductions from published averages") {
  const auto wd = summarize_averages("workday", 0.01644, 0.00659, 0.01910);
  const auto we = summarize_averages("weekend", 0.01262, 0.00580, 0.03100);
  CHECK(wd.reductions.with_vs_baseline == doctest::Approx(0.655).epsilon(0.01));
  CHECK(we.reductions.with_vs_baseline == doctest::Approx(0.813).epsilon(0.01));
  CHECK(wd.reductions.with_vs_without == doctest::Approx(0.599).epsilon(0.01));
  CHECK(we.reductions.with_vs_without == doctest::Approx(0.540).epsilon(0.01));
  CHECK(percent_reduction(2.0, 0.5) == 0.75);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"({"seed": 5, "k_max": 9})");
  CHECK(cfg.seed == 5);
  CHECK(cfg.k_max == 9);
  CHECK(cfg.k_min == 2);
  CHECK(parse_config(dump_config(cfg)).k_max == 9);
  CHECK(dump_config(parse_config(dump_config(cfg))) == dump_config(cfg));

  auto expect_config_error = [](const std::string& text) {
    try {
      parse_config(text);
      FAIL("accepted: " << text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
    }
  };
  expect_config_error(R"({"sed": 5})");
  expect_config_error(R"({"load_schema": {"column": "x"}})");
  expect_config_error(R"({"seed": "five"})");
  expect_config_error("{not json");
}

TEST_CASE("train/test split") {
  std::vector<PatternShares> shares;
  for (int i = 0; i < 50; ++i)
    shares.push_back(shares_of("c" + std::to_string(100 + i), i < 30 ? std::vector<double>{0.9, 0.1}
                                                                     : std::vector<double>{0.2, 0.8}));
  const auto a = split_train_test(shares, 0.8, 11);
  const auto b = split_train_test(shares, 0.8, 11);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train.size() == 40);
  CHECK(a.test.size() == 10);
  int first_pattern_test = 0;
  for (const auto& id : a.test)
    if (id < "c130") ++first_pattern_test;
  CHECK(first_pattern_test == 6);
  std::set<std::string> all(a.train.begin(), a.train.end());
  for (const auto& id : a.test) CHECK(all.insert(id).second);
  CHECK(all.size() == 50);
  CHECK(split_train_test(shares, 0.8, 12).test != a.test);
}

TEST_CASE("synthetic fixture is seeded") {
  SynthOptions opts;
  opts.n_consumers = 5;
  opts.n_days = 3;
  std::ostringstream l1, m1, l2, m2;
  const auto t1 = make_synthetic_fixture(opts, l1, m1);
  make_synthetic_fixture(opts, l2, m2);
  CHECK(l1.str() == l2.str());
  CHECK(m1.str() == m2.str());
  CHECK(t1.templates.size() == 3);
  CHECK(t1.informative == std::vector<std::string>{"occupancy", "education"});
  CHECK(t1.decoys.size() == 4);
  opts.seed = 2;
  std::ostringstream l3, m3;
  make_synthetic_fixture(opts, l3, m3);
  CHECK(l3.str() != l1.str());
}

TEST_CASE("small pipeline run") {
  TempDir dir("pipeline");
  SynthOptions opts;
  opts.n_consumers = 40;
  opts.n_days = 21;
  opts.noise = 0.0;
  {
    std::ofstream loads(dir.path / "loads.csv"), meta(dir.path / "metadata.csv");
    make_synthetic_fixture(opts, loads, meta);
  }
  PipelineConfig cfg;
  cfg.load_path = (dir.path / "loads.csv").string();
  cfg.metadata_path = (dir.path / "metadata.csv").string();
  cfg.min_days = 4;
  cfg.k_max = 8;
  cfg.restarts = 5;
  cfg.epochs = 200;
  cfg.learning_rate = 0.5;

  const RunDir run{dir.path / "run"};
  const auto report = run_pipeline(cfg, run.root);
  REQUIRE(report.sections.size() == 2);
  for (DayType d : {DayType::Workday, DayType::Weekend}) {
    CHECK(fs::exists(run.cluster(d)));
    CHECK(fs::exists(run.models(d, kBranchAll)));
    CHECK(fs::exists(run.models(d, kBranchSelected)));
    CHECK(fs::exists(run.predictions(d)));
  }
  // Noise-free profiles from three templates: three patterns on workdays.
  CHECK(report.sections[0].rows.size() == 3);

  // Re-running evaluation from persisted artifacts reproduces the report.
  const auto txt = slurp(run.report_txt());
  stage_evaluate(cfg, run);
  CHECK(slurp(run.report_txt()) == txt);

  PipelineConfig broken = cfg;
  broken.metadata_path = (dir.path / "missing.csv").string();
  CHECK_THROWS_AS(run_pipeline(broken, dir.path / "run2"), Error);
}
