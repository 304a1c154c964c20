// loadpat: load-pattern clustering and share prediction pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <json.hpp>

#include "loadpat/config.hpp"
#include "loadpat/error.hpp"
#include "loadpat/pipeline.hpp"
#include "loadpat/synthetic.hpp"

namespace fs = std::filesystem;
using namespace loadpat;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "run";
  std::string day_type = "both";
};

PipelineConfig resolve_config(const GlobalOptions& g, bool require_explicit) {
  fs::path path = g.config;
  if (path.empty()) {
    if (require_explicit) throw Error(ErrorCode::BadConfig, "--config is required for this command");
    path = RunDir{g.out}.resolved_config();
  }
  auto cfg = load_config(path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.day_type == "workday")
    cfg.day_types = {DayType::Workday};
  else if (g.day_type == "weekend")
    cfg.day_types = {DayType::Weekend};
  else if (g.day_type == "both")
    cfg.day_types = {DayType::Workday, DayType::Weekend};
  else
    throw Error(ErrorCode::BadConfig, "--day-type must be workday, weekend or both");
  return cfg;
}

int exit_code(ErrorKind kind) { return static_cast<int>(kind); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster daily load profiles and predict pattern shares from household attributes"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Pipeline config (JSON)");
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--out", g.out, "Run directory")->capture_default_str();
  app.add_option("--day-type", g.day_type, "workday, weekend or both")
      ->check(CLI::IsMember({"workday", "weekend", "both"}))
      ->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Parse, aggregate, filter and normalize the input tables");
  auto* cluster = app.add_subcommand("cluster", "Choose K at the knee and cluster normalized profiles");
  auto* select = app.add_subcommand("select-features", "Split consumers and select features per pattern");
  auto* train_cmd = app.add_subcommand("train", "Train per-pattern networks with and without selection");
  auto* predict = app.add_subcommand("predict", "Predict test-consumer pattern shares");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Write the per-pattern MSE report");
  auto* run = app.add_subcommand("run", "Run the full pipeline");

  SynthOptions synth_opts;
  int n_templates = 3;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic fixture with planted structure");
  synth->add_option("--consumers", synth_opts.n_consumers)->capture_default_str();
  synth->add_option("--days", synth_opts.n_days)->capture_default_str();
  synth->add_option("--templates", n_templates)->capture_default_str();
  synth->add_option("--noise", synth_opts.noise)->capture_default_str();
  synth->add_option("--decoys", synth_opts.decoys)->capture_default_str();
  synth->add_option("--incomplete-rate", synth_opts.incomplete_day_rate)->capture_default_str();
  synth->add_option("--start-date", synth_opts.start_date)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorKind::Config);
  }

  try {
    const RunDir dir{g.out};
    std::ostream* log = &std::cerr;

    if (synth->parsed()) {
      if (g.seed) synth_opts.seed = *g.seed;
      synth_opts.templates = default_templates(n_templates);
      fs::create_directories(dir.root);
      std::ofstream loads(dir.root / "loads.csv"), meta(dir.root / "metadata.csv");
      const auto truth = make_synthetic_fixture(synth_opts, loads, meta);
      nlohmann::json mixtures = nlohmann::json::object();
      for (const auto& [id, m] : truth.mixtures) mixtures[id] = m;
      std::ofstream(dir.root / "truth.json") << nlohmann::json{{"templates", truth.templates},
                                                               {"informative", truth.informative},
                                                               {"decoys", truth.decoys},
                                                               {"mixtures", mixtures}}
                                                    .dump(1)
                                             << '\n';
      PipelineConfig cfg;
      cfg.load_path = (dir.root / "loads.csv").string();
      cfg.metadata_path = (dir.root / "metadata.csv").string();
      cfg.min_days = 8;
      cfg.k_max = 10;
      cfg.learning_rate = 0.5;
      cfg.seed = synth_opts.seed;
      std::ofstream(dir.root / "config.json") << dump_config(cfg);
      std::cerr << "synth: wrote fixture to " << dir.root << '\n';
      return 0;
    }

    const bool explicit_cfg = ingest->parsed() || run->parsed();
    const auto cfg = resolve_config(g, explicit_cfg);
    if (run->parsed()) {
      run_pipeline(cfg, dir.root, log);
    } else if (ingest->parsed()) {
      stage_ingest(cfg, dir, log);
    } else if (evaluate_cmd->parsed()) {
      stage_evaluate(cfg, dir, log);
    } else {
      for (DayType day : cfg.day_types) {
        if (cluster->parsed()) stage_cluster(cfg, dir, day, log);
        if (select->parsed()) stage_select(cfg, dir, day, log);
        if (train_cmd->parsed()) stage_train(cfg, dir, day, log);
        if (predict->parsed()) stage_predict(cfg, dir, day, log);
      }
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(ErrorKind::Data);
  }
}
