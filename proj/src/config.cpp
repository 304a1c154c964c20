#include "loadpat/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "loadpat/error.hpp"

namespace loadpat {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadConfig, what); }

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) bad(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) bad("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("bad value for '") + key + "': " + e.what());
  }
}

char read_delimiter(const json& obj, char fallback) {
  if (!obj.contains("delimiter")) return fallback;
  const auto s = obj.at("delimiter").get<std::string>();
  if (s.size() != 1) bad("delimiter must be a single character");
  return s[0];
}

FeatureSpec read_feature(const json& j) {
  reject_unknown(j, {"name", "kind", "edges", "quantiles", "categories"}, "metadata feature");
  FeatureSpec f;
  read(j, "name", f.name);
  if (f.name.empty()) bad("metadata feature needs a name");
  std::string kind = "categorical";
  read(j, "kind", kind);
  auto k = parse_feature_kind(kind);
  if (!k) bad("unknown feature kind '" + kind + "'");
  f.kind = *k;
  read(j, "edges", f.edges);
  read(j, "quantiles", f.quantiles);
  read(j, "categories", f.categories);
  return f;
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  try {
  reject_unknown(doc,
                 {"load_path", "metadata_path", "load_schema", "delimiter", "aggregation", "metadata", "min_days",
                  "k_min", "k_max", "restarts", "max_iters", "tol", "allow_knee_fallback", "bins", "hidden_layers",
                  "learning_rate", "epochs", "init_scale", "train_fraction", "seed", "day_types", "parallel"},
                 "config");
  read(doc, "load_path", cfg.load_path);
  read(doc, "metadata_path", cfg.metadata_path);
  cfg.load_schema.delimiter = read_delimiter(doc, ',');
  if (doc.contains("load_schema")) {
    const auto& s = doc.at("load_schema");
    reject_unknown(s, {"id", "timestamp", "load"}, "load_schema");
    read(s, "id", cfg.load_schema.id_column);
    read(s, "timestamp", cfg.load_schema.timestamp_column);
    read(s, "load", cfg.load_schema.load_column);
  }
  if (doc.contains("aggregation")) {
    const auto a = doc.at("aggregation").get<std::string>();
    if (a == "mean")
      cfg.aggregation = Aggregation::Mean;
    else if (a == "sum")
      cfg.aggregation = Aggregation::Sum;
    else
      bad("aggregation must be 'mean' or 'sum'");
  }
  if (doc.contains("metadata")) {
    const auto& m = doc.at("metadata");
    reject_unknown(m, {"id_column", "features", "delimiter"}, "metadata");
    read(m, "id_column", cfg.metadata.id_column);
    cfg.metadata.delimiter = read_delimiter(m, ',');
    if (m.contains("features")) {
      if (!m.at("features").is_array()) bad("metadata.features must be an array");
      for (const auto& f : m.at("features")) cfg.metadata.features.push_back(read_feature(f));
    }
  }
  read(doc, "min_days", cfg.min_days);
  read(doc, "k_min", cfg.k_min);
  read(doc, "k_max", cfg.k_max);
  read(doc, "restarts", cfg.restarts);
  read(doc, "max_iters", cfg.max_iters);
  read(doc, "tol", cfg.tol);
  read(doc, "allow_knee_fallback", cfg.allow_knee_fallback);
  read(doc, "bins", cfg.bins);
  read(doc, "hidden_layers", cfg.hidden_layers);
  read(doc, "learning_rate", cfg.learning_rate);
  read(doc, "epochs", cfg.epochs);
  read(doc, "init_scale", cfg.init_scale);
  read(doc, "train_fraction", cfg.train_fraction);
  read(doc, "seed", cfg.seed);
  read(doc, "parallel", cfg.parallel);
  if (doc.contains("day_types")) {
    cfg.day_types.clear();
    for (const auto& d : doc.at("day_types")) {
      auto t = parse_day_type(d.get<std::string>());
      if (!t) bad("unknown day type '" + d.get<std::string>() + "'");
      cfg.day_types.push_back(*t);
    }
  }
  } catch (const json::exception& e) {
    bad(std::string("bad config value: ") + e.what());
  }
  validate(cfg, false);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const PipelineConfig& cfg) {
  json features = json::array();
  for (const auto& f : cfg.metadata.features) {
    json j{{"name", f.name}, {"kind", to_string(f.kind)}};
    if (!f.edges.empty()) j["edges"] = f.edges;
    if (f.kind == FeatureKind::Bracket) j["quantiles"] = f.quantiles;
    if (!f.categories.empty()) j["categories"] = f.categories;
    features.push_back(std::move(j));
  }
  json day_types = json::array();
  for (auto d : cfg.day_types) day_types.push_back(to_string(d));
  json doc{
      {"load_path", cfg.load_path},
      {"metadata_path", cfg.metadata_path},
      {"delimiter", std::string(1, cfg.load_schema.delimiter)},
      {"load_schema",
       {{"id", cfg.load_schema.id_column},
        {"timestamp", cfg.load_schema.timestamp_column},
        {"load", cfg.load_schema.load_column}}},
      {"aggregation", cfg.aggregation == Aggregation::Mean ? "mean" : "sum"},
      {"metadata",
       {{"id_column", cfg.metadata.id_column},
        {"delimiter", std::string(1, cfg.metadata.delimiter)},
        {"features", features}}},
      {"min_days", cfg.min_days},
      {"k_min", cfg.k_min},
      {"k_max", cfg.k_max},
      {"restarts", cfg.restarts},
      {"max_iters", cfg.max_iters},
      {"tol", cfg.tol},
      {"allow_knee_fallback", cfg.allow_knee_fallback},
      {"bins", cfg.bins},
      {"hidden_layers", cfg.hidden_layers},
      {"learning_rate", cfg.learning_rate},
      {"epochs", cfg.epochs},
      {"init_scale", cfg.init_scale},
      {"train_fraction", cfg.train_fraction},
      {"seed", cfg.seed},
      {"day_types", day_types},
      {"parallel", cfg.parallel},
  };
  return doc.dump(2) + "\n";
}

void validate(const PipelineConfig& cfg, bool check_paths) {
  if (cfg.min_days < 1) bad("min_days must be at least 1");
  if (cfg.k_min < 2 || cfg.k_max <= cfg.k_min) bad("need 2 <= k_min < k_max");
  if (cfg.restarts < 1 || cfg.max_iters < 1 || !(cfg.tol > 0.0)) bad("restarts, max_iters and tol must be positive");
  if (cfg.bins < 2) bad("bins must be at least 2");
  for (int h : cfg.hidden_layers)
    if (h < 1) bad("hidden layer widths must be positive");
  if (!(cfg.learning_rate > 0.0)) bad("learning_rate must be positive");
  if (cfg.epochs < 0) bad("epochs must be non-negative");
  if (!(cfg.init_scale >= 0.0)) bad("init_scale must be non-negative");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) bad("train_fraction must lie in (0, 1)");
  if (cfg.day_types.empty()) bad("day_types must not be empty");
  for (const auto& f : cfg.metadata.features)
    if (f.kind == FeatureKind::Bracket && f.edges.empty() && f.quantiles < 2)
      bad("feature '" + f.name + "' needs at least 2 quantile brackets");
  if (check_paths) {
    for (const auto* p : {&cfg.load_path, &cfg.metadata_path})
      if (p->empty() || !std::filesystem::exists(*p)) bad("input file '" + *p + "' does not exist");
  }
}

}  // namespace loadpat
