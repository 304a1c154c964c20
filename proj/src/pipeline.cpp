#include "loadpat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"
#include "loadpat/feature_selection.hpp"
#include "loadpat/persist.hpp"
#include "loadpat/predictor.hpp"
#include "loadpat/rng.hpp"

namespace loadpat {

using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + p.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + p.string() + "'");
  return out;
}

json read_json(const fs::path& p) {
  auto in = open_in(p);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ShapeMismatch, "malformed '" + p.string() + "': " + e.what());
  }
}

void write_json(const fs::path& p, const json& j) {
  auto out = open_out(p);
  out << j.dump(1) << '\n';
}

template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

void note(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << '\n';
}

std::vector<PatternShares> load_shares(const RunDir& run, DayType day) {
  auto in = open_in(run.shares(day));
  return read_shares_csv(in, to_string(day));
}

EncodedMetadata load_socio(const RunDir& run) {
  auto maps = label_maps_from_json(read_json(run.labels()));
  auto in = open_in(run.socio());
  return read_socio_csv(in, std::move(maps));
}

TrainTestSplit load_split(const RunDir& run, DayType day) {
  const auto j = read_json(run.split(day));
  try {
    return {j.at("train").get<std::vector<std::string>>(), j.at("test").get<std::vector<std::string>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ShapeMismatch, std::string("malformed split: ") + e.what());
  }
}

std::vector<PatternShares> subset_of(const std::vector<PatternShares>& shares, std::span<const std::string> ids) {
  std::map<std::string_view, const PatternShares*> by_id;
  for (const auto& s : shares) by_id.emplace(s.consumer_id, &s);
  std::vector<PatternShares> out;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::ConsumerMismatch, "no shares for consumer '" + id + "'");
    out.push_back(*it->second);
  }
  return out;
}

const SocioRecord& record_of(const EncodedMetadata& meta, const std::string& id) {
  auto it = std::lower_bound(meta.records.begin(), meta.records.end(), id,
                             [](const SocioRecord& r, const std::string& v) { return r.consumer_id < v; });
  if (it == meta.records.end() || it->consumer_id != id)
    throw Error(ErrorCode::MissingAttribute, "no metadata for consumer '" + id + "'");
  return *it;
}

std::vector<std::string> all_feature_names(const EncodedMetadata& meta) {
  std::vector<std::string> names;
  for (const auto& m : meta.maps) names.push_back(m.feature);
  return names;
}

}  // namespace

TrainTestSplit split_train_test(std::span<const PatternShares> shares, double train_fraction, std::uint64_t seed) {
  std::map<int, std::vector<std::string>> strata;
  for (const auto& s : shares) strata[s.dominant()].push_back(s.consumer_id);
  Rng rng(seed);
  TrainTestSplit split;
  for (auto& [pattern, ids] : strata) {
    std::sort(ids.begin(), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ids.size())));
    for (std::size_t i = 0; i < ids.size(); ++i) (i < n_train ? split.train : split.test).push_back(ids[i]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  if (split.train.empty() || split.test.empty())
    throw Error(ErrorCode::Empty, "train/test split left one side empty");
  return split;
}

void stage_ingest(const PipelineConfig& cfg, const RunDir& run, std::ostream* log) {
  in_stage("ingest", [&] {
    validate(cfg, true);
    fs::create_directories(run.root);
    {
      auto out = open_out(run.resolved_config());
      out << dump_config(cfg);
    }

    auto load_in = open_in(cfg.load_path);
    auto parsed = parse_load_csv(load_in, cfg.load_schema);
    note(log, "ingest: " + std::to_string(parsed.readings.size()) + " readings, " +
                  std::to_string(parsed.rejections.size()) + " rejected rows");
    {
      auto out = open_out(run.rejections());
      out << "line,reason\n";
      for (const auto& r : parsed.rejections) out << r.line << ',' << to_string(r.reason) << '\n';
    }

    auto aggregated = aggregate_hourly(parsed.readings, cfg.aggregation);
    parsed.readings.clear();
    parsed.readings.shrink_to_fit();

    // Flat days carry no shape; they are not valid days for the filter.
    std::vector<DailyLoadProfile> shaped;
    std::size_t degenerate = 0;
    for (auto& p : aggregated.profiles) {
      if (normalize_profile(p))
        shaped.push_back(std::move(p));
      else
        ++degenerate;
    }

    auto meta_in = open_in(cfg.metadata_path);
    const auto raw_meta = parse_metadata_csv(meta_in, cfg.metadata.delimiter);
    const int id_col = [&] {
      for (std::size_t i = 0; i < raw_meta.header.size(); ++i)
        if (raw_meta.header[i] == cfg.metadata.id_column) return static_cast<int>(i);
      throw Error(ErrorCode::MissingColumn, "metadata lacks id column '" + cfg.metadata.id_column + "'");
    }();
    std::set<std::string> with_meta;
    for (const auto& row : raw_meta.rows) with_meta.insert(row[id_col]);

    std::vector<std::string> missing_meta;
    {
      std::set<std::string> seen;
      std::vector<DailyLoadProfile> kept;
      for (auto& p : shaped) {
        if (with_meta.count(p.consumer_id)) {
          kept.push_back(std::move(p));
        } else if (seen.insert(p.consumer_id).second) {
          missing_meta.push_back(p.consumer_id);
        }
      }
      shaped = std::move(kept);
    }

    auto filtered = filter_complete(shaped, cfg.min_days);
    note(log, "ingest: retained " + std::to_string(filtered.report.retained_consumers) + " of " +
                  std::to_string(filtered.report.total_consumers) + " consumers");

    std::set<std::string> retained_ids;
    for (const auto& c : filtered.report.consumers)
      if (c.retained) retained_ids.insert(c.consumer_id);
    RawMetadata retained_meta{raw_meta.header, {}};
    for (const auto& row : raw_meta.rows)
      if (retained_ids.count(row[id_col])) retained_meta.rows.push_back(row);
    const auto meta = encode_metadata(retained_meta, cfg.metadata);

    json consumers = json::array();
    for (const auto& c : filtered.report.consumers)
      consumers.push_back({{"consumer_id", c.consumer_id},
                           {"workday_days", c.workday_days},
                           {"weekend_days", c.weekend_days},
                           {"retained", c.retained}});
    write_json(run.retention(), json{{"min_days_per_consumer", filtered.report.min_days_per_consumer},
                                     {"total_consumers", filtered.report.total_consumers},
                                     {"retained_consumers", filtered.report.retained_consumers},
                                     {"rejected_rows", parsed.rejections.size()},
                                     {"complete_days", aggregated.report.complete_days},
                                     {"incomplete_days", aggregated.report.incomplete_days},
                                     {"duplicate_readings", aggregated.report.duplicate_readings},
                                     {"degenerate_days", degenerate},
                                     {"consumers_without_metadata", missing_meta},
                                     {"consumers", consumers}});
    write_json(run.labels(), to_json(std::span<const LabelMap>(meta.maps)));
    {
      auto out = open_out(run.socio());
      write_socio_csv(out, meta);
    }

    auto split = split_day_type(filtered.retained);
    for (DayType d : {DayType::Workday, DayType::Weekend}) {
      const auto& set = d == DayType::Workday ? split.workday : split.weekend;
      auto normalized = normalize_all(set);
      auto out = open_out(run.profiles(d));
      write_normalized_csv(out, normalized.profiles);
    }
    return 0;
  });
}

KneeCurve stage_cluster(const PipelineConfig& cfg, const RunDir& run, DayType day, std::ostream* log) {
  return in_stage("cluster", [&] {
    std::vector<NormalizedProfile> profiles;
    {
      auto in = open_in(run.profiles(day));
      profiles = read_normalized_csv(in);
    }
    const auto points = PointMatrix::from_profiles(profiles);
    const std::uint64_t seed = derive_seed(cfg.seed, std::string("cluster/") + to_string(day));
    KneeOptions ko{cfg.k_min, cfg.k_max, seed, cfg.restarts, cfg.max_iters, cfg.tol, cfg.parallel};
    auto curve = select_k(points, ko);
    {
      auto out = open_out(run.knee(day));
      write_knee_csv(out, curve);
    }
    if (curve.no_knee && !cfg.allow_knee_fallback)
      throw Error(ErrorCode::NoKnee, std::string("no knee in the ") + to_string(day) + " inertia curve");
    note(log, std::string("cluster: ") + to_string(day) + " K* = " + std::to_string(curve.k_star) +
                  (curve.no_knee ? " (no knee, fallback to k_min)" : ""));

    KMeansOptions opts{curve.k_star, knee_seed_for(seed, curve.k_star), cfg.restarts, cfg.max_iters, cfg.tol,
                       cfg.parallel};
    auto model = kmeans(points, opts);
    model.day_type = to_string(day);
    auto jm = to_json(model);
    jm["knee_fallback"] = curve.no_knee;
    write_json(run.cluster(day), jm);

    const auto meta = load_socio(run);
    std::vector<std::string> ids;
    for (const auto& r : meta.records) ids.push_back(r.consumer_id);
    const auto shares = pattern_shares(model, profiles, ids);
    auto out = open_out(run.shares(day));
    write_shares_csv(out, shares);
    return curve;
  });
}

void stage_select(const PipelineConfig& cfg, const RunDir& run, DayType day, std::ostream* log) {
  in_stage("select-features", [&] {
    const auto shares = load_shares(run, day);
    const auto meta = load_socio(run);
    const auto split =
        split_train_test(shares, cfg.train_fraction, derive_seed(cfg.seed, std::string("split/") + to_string(day)));
    write_json(run.split(day), json{{"train", split.train}, {"test", split.test}});

    const auto train_shares = subset_of(shares, split.train);
    const auto columns = feature_columns(meta, split.train);
    const int k = train_shares.empty() ? 0 : static_cast<int>(train_shares.front().shares.size());

    json reports = json::array();
    auto csv_out = open_out(run.selection_csv(day));
    csv_out << "pattern,feature,su_target,rank,selected\n";
    for (int pattern = 0; pattern < k; ++pattern) {
      const auto target = discretize_target(train_shares, pattern, cfg.bins);
      const auto rep = select_features(columns, target, cfg.parallel);
      reports.push_back(to_json(rep));

      std::vector<std::size_t> order(rep.feature_names.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return rep.target_su[a] > rep.target_su[b]; });
      for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& name = rep.feature_names[order[r]];
        const bool chosen =
            std::find(rep.subset.members.begin(), rep.subset.members.end(), name) != rep.subset.members.end();
        csv_out << pattern + 1 << ',' << name << ',' << csv::format_double(rep.target_su[order[r]]) << ',' << r + 1
                << ',' << (chosen ? 1 : 0) << '\n';
      }
      std::string members;
      for (const auto& m : rep.subset.members) members += (members.empty() ? "" : ",") + m;
      note(log, std::string("select: ") + to_string(day) + " G" + std::to_string(pattern + 1) + " -> {" + members +
                    "} merit " + csv::format_double(rep.subset.merit));
    }
    write_json(run.selection_json(day), json{{"day_type", to_string(day)}, {"bins", cfg.bins}, {"patterns", reports}});
    return 0;
  });
}

void stage_train(const PipelineConfig& cfg, const RunDir& run, DayType day, std::ostream* log) {
  in_stage("train", [&] {
    const auto shares = load_shares(run, day);
    const auto meta = load_socio(run);
    const auto split = load_split(run, day);
    const auto train_shares = subset_of(shares, split.train);
    const auto selection = read_json(run.selection_json(day));
    const std::size_t k = train_shares.front().shares.size();
    if (selection.at("patterns").size() != k)
      throw Error(ErrorCode::ShapeMismatch, "selection report and shares disagree on pattern count");

    TrainConfig tc{cfg.learning_rate, cfg.epochs, 0, cfg.init_scale, cfg.train_fraction};
    for (const char* branch : {kBranchAll, kBranchSelected}) {
      std::vector<Encoding> encodings;
      for (std::size_t p = 0; p < k; ++p) {
        const auto features = std::string(branch) == kBranchAll
                                  ? all_feature_names(meta)
                                  : feature_subset_from_json(selection.at("patterns").at(p)).members;
        encodings.push_back(Encoding::from_maps(meta.maps, features));
      }

      ModelBundle bundle;
      bundle.day_type = to_string(day);
      bundle.branch = branch;
      bundle.predictors.resize(k);
      bundle.final_losses.resize(k);
      std::vector<std::exception_ptr> failures(k);

      // Each pattern's network sees only its own encoding and target column.
#pragma omp parallel for schedule(dynamic, 1) if (cfg.parallel)
      for (std::size_t p = 0; p < k; ++p) {
        try {
          Dataset data;
          for (const auto& s : train_shares) {
            data.inputs.push_back(one_hot(record_of(meta, s.consumer_id), encodings[p]).values);
            data.targets.push_back(s.shares[p]);
          }
          std::vector<int> sizes{static_cast<int>(encodings[p].width())};
          sizes.insert(sizes.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
          sizes.push_back(1);
          const auto tag = std::string("train/") + to_string(day) + "/" + std::to_string(p);
          auto model = init_mlp(sizes, derive_seed(cfg.seed, tag), cfg.init_scale);
          model.pattern = static_cast<int>(p);
          auto result = train(std::move(model), data, tc);
          bundle.final_losses[p] = loss(result.model, data);
          bundle.predictors[p] = PatternPredictor{encodings[p], std::move(result.model)};
        } catch (...) {
          failures[p] = std::current_exception();
        }
      }
      for (auto& f : failures)
        if (f) std::rethrow_exception(f);

      write_json(run.models(day, branch), to_json(bundle));
      std::string losses;
      for (double l : bundle.final_losses) losses += " " + csv::format_double(l);
      note(log, std::string("train: ") + to_string(day) + " " + branch + " final losses" + losses);
    }
    return 0;
  });
}

void stage_predict(const PipelineConfig&, const RunDir& run, DayType day, std::ostream* log) {
  in_stage("predict", [&] {
    const auto shares = load_shares(run, day);
    const auto meta = load_socio(run);
    const auto split = load_split(run, day);
    const auto train_shares = subset_of(shares, split.train);

    auto out = open_out(run.predictions(day));
    bool header = true;
    for (const char* branch : {kBranchAll, kBranchSelected}) {
      const auto bundle = model_bundle_from_json(read_json(run.models(day, branch)));
      std::vector<SharePrediction> preds;
      for (const auto& id : split.test) preds.push_back(predict_shares(bundle.predictors, record_of(meta, id)));
      write_predictions_csv(out, branch, preds, header);
      header = false;
    }
    const auto base = baseline_predict(train_shares);
    std::vector<SharePrediction> preds;
    for (const auto& id : split.test) preds.push_back({id, base, base});
    write_predictions_csv(out, kBranchBaseline, preds, false);
    note(log, std::string("predict: ") + to_string(day) + " " + std::to_string(split.test.size()) + " test consumers");
    return 0;
  });
}

EvaluationReport stage_evaluate(const PipelineConfig& cfg, const RunDir& run, std::ostream* log) {
  return in_stage("evaluate", [&] {
    EvaluationReport report;
    for (DayType day : cfg.day_types) {
      const auto shares = load_shares(run, day);
      const auto split = load_split(run, day);
      const auto actual = subset_of(shares, split.test);
      auto read_branch = [&](const char* branch) {
        auto in = open_in(run.predictions(day));
        return evaluate(read_predictions_csv(in, branch), actual);
      };
      const auto without = read_branch(kBranchAll);
      const auto with = read_branch(kBranchSelected);
      const auto base = read_branch(kBranchBaseline);
      std::vector<PatternRow> rows;
      for (std::size_t p = 0; p < without.per_pattern.size(); ++p)
        rows.push_back({without.per_pattern[p], with.per_pattern[p], base.per_pattern[p]});
      report.sections.push_back(summarize(to_string(day), std::move(rows)));
    }
    {
      auto out = open_out(run.report_txt());
      out << render_table(report);
    }
    {
      auto out = open_out(run.report_csv());
      out << render_csv(report);
    }
    note(log, render_table(report));
    return report;
  });
}

EvaluationReport run_pipeline(const PipelineConfig& cfg, const fs::path& out_dir, std::ostream* log) {
  const RunDir run{out_dir};
  stage_ingest(cfg, run, log);
  for (DayType day : cfg.day_types) {
    stage_cluster(cfg, run, day, log);
    stage_select(cfg, run, day, log);
    stage_train(cfg, run, day, log);
    stage_predict(cfg, run, day, log);
  }
  return stage_evaluate(cfg, run, log);
}

}  // namespace loadpat
