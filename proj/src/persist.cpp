#include "loadpat/persist.hpp"

#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"

namespace loadpat {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::ShapeMismatch, what); }

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    malformed(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

json to_json(const ClusterModel& model) {
  return json{{"day_type", model.day_type}, {"k", model.k},         {"dim", model.dim},
              {"seed", model.seed},         {"restarts", model.restarts}, {"iterations", model.iterations},
              {"inertia", model.inertia},   {"centroids", model.centroids}};
}

ClusterModel cluster_model_from_json(const json& j) {
  return guarded("cluster model", [&] {
    ClusterModel m;
    m.day_type = j.at("day_type").get<std::string>();
    m.k = j.at("k").get<int>();
    m.dim = j.at("dim").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.restarts = j.at("restarts").get<int>();
    m.iterations = j.at("iterations").get<int>();
    m.inertia = j.at("inertia").get<double>();
    m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    if (m.centroids.size() != static_cast<std::size_t>(m.k)) malformed("cluster model centroid count != k");
    for (const auto& c : m.centroids)
      if (c.size() != m.dim) malformed("cluster model centroid width != dim");
    return m;
  });
}

void write_knee_csv(std::ostream& out, const KneeCurve& curve) {
  out << "k,inertia,inertia_repaired,difference\n";
  for (std::size_t i = 0; i < curve.k_values.size(); ++i)
    out << curve.k_values[i] << ',' << csv::format_double(curve.inertias[i]) << ','
        << csv::format_double(curve.repaired[i]) << ',' << csv::format_double(curve.difference[i]) << '\n';
}

void write_shares_csv(std::ostream& out, std::span<const PatternShares> shares) {
  const std::size_t k = shares.empty() ? 0 : shares.front().shares.size();
  out << "consumer_id,n_days";
  for (std::size_t j = 0; j < k; ++j) out << ",count_" << j + 1;
  for (std::size_t j = 0; j < k; ++j) out << ",share_" << j + 1;
  out << '\n';
  for (const auto& s : shares) {
    out << s.consumer_id << ',' << s.n_days;
    for (int c : s.counts) out << ',' << c;
    for (double v : s.shares) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

std::vector<PatternShares> read_shares_csv(std::istream& in, const std::string& day_type) {
  auto header = csv::read_header(in, ',');
  if (!header || header->size() < 4 || (header->size() - 2) % 2 != 0) malformed("bad shares table header");
  const std::size_t k = (header->size() - 2) / 2;
  std::vector<PatternShares> out;
  std::string line;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line, ',');
    if (f.size() != header->size()) malformed("bad shares row: " + line);
    PatternShares s;
    s.consumer_id = std::string(f[0]);
    s.day_type = day_type;
    auto n = csv::parse_int(f[1]);
    if (!n) malformed("bad shares row: " + line);
    s.n_days = static_cast<std::size_t>(*n);
    for (std::size_t j = 0; j < k; ++j) {
      auto c = csv::parse_int(f[2 + j]);
      auto v = csv::parse_double(f[2 + k + j]);
      if (!c || !v) malformed("bad shares row: " + line);
      s.counts.push_back(static_cast<int>(*c));
      s.shares.push_back(*v);
    }
    out.push_back(std::move(s));
  }
  return out;
}

json to_json(std::span<const LabelMap> maps) {
  json arr = json::array();
  for (const auto& m : maps)
    arr.push_back({{"feature", m.feature}, {"kind", to_string(m.kind)}, {"categories", m.categories}, {"edges", m.edges}});
  return json{{"features", arr}};
}

std::vector<LabelMap> label_maps_from_json(const json& j) {
  return guarded("label maps", [&] {
    std::vector<LabelMap> maps;
    for (const auto& f : j.at("features")) {
      LabelMap m;
      m.feature = f.at("feature").get<std::string>();
      auto kind = parse_feature_kind(f.at("kind").get<std::string>());
      if (!kind) malformed("unknown feature kind in label maps");
      m.kind = *kind;
      m.categories = f.at("categories").get<std::vector<std::string>>();
      m.edges = f.at("edges").get<std::vector<double>>();
      maps.push_back(std::move(m));
    }
    return maps;
  });
}

EncodedMetadata read_socio_csv(std::istream& in, std::vector<LabelMap> maps) {
  auto header = csv::read_header(in, ',');
  if (!header || header->size() != maps.size() + 1) malformed("socio table does not match label maps");
  for (std::size_t i = 0; i < maps.size(); ++i)
    if ((*header)[i + 1] != maps[i].feature) malformed("socio table column order differs from label maps");
  EncodedMetadata meta;
  std::string line;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line, ',');
    if (f.size() != header->size()) malformed("bad socio row: " + line);
    SocioRecord r;
    r.consumer_id = std::string(f[0]);
    for (std::size_t i = 0; i < maps.size(); ++i) {
      auto v = csv::parse_int(f[i + 1]);
      if (!v) malformed("bad socio row: " + line);
      r.attributes.emplace_back(maps[i].feature, static_cast<int>(*v));
    }
    meta.records.push_back(std::move(r));
  }
  meta.maps = std::move(maps);
  return meta;
}

json to_json(const ModelBundle& bundle) {
  json patterns = json::array();
  for (std::size_t k = 0; k < bundle.predictors.size(); ++k) {
    const auto& p = bundle.predictors[k];
    json entry{{"pattern", p.model.pattern},
               {"features", p.encoding.features},
               {"arities", p.encoding.arities},
               {"layer_sizes", p.model.layer_sizes},
               {"weights", p.model.weights},
               {"biases", p.model.biases}};
    if (k < bundle.final_losses.size()) entry["final_train_loss"] = bundle.final_losses[k];
    patterns.push_back(std::move(entry));
  }
  return json{{"day_type", bundle.day_type}, {"branch", bundle.branch}, {"activation", "sigmoid"}, {"patterns", patterns}};
}

ModelBundle model_bundle_from_json(const json& j) {
  return guarded("model bundle", [&] {
    ModelBundle b;
    b.day_type = j.at("day_type").get<std::string>();
    b.branch = j.at("branch").get<std::string>();
    for (const auto& e : j.at("patterns")) {
      PatternPredictor p;
      p.encoding.features = e.at("features").get<std::vector<std::string>>();
      p.encoding.arities = e.at("arities").get<std::vector<int>>();
      p.model.pattern = e.at("pattern").get<int>();
      p.model.layer_sizes = e.at("layer_sizes").get<std::vector<int>>();
      p.model.weights = e.at("weights").get<std::vector<std::vector<double>>>();
      p.model.biases = e.at("biases").get<std::vector<std::vector<double>>>();
      const auto& ls = p.model.layer_sizes;
      if (ls.size() < 2 || p.model.weights.size() + 1 != ls.size() || p.model.biases.size() + 1 != ls.size() ||
          static_cast<std::size_t>(ls.front()) != p.encoding.width())
        malformed("model bundle shapes do not chain");
      for (std::size_t l = 0; l + 1 < ls.size(); ++l)
        if (p.model.weights[l].size() != static_cast<std::size_t>(ls[l]) * ls[l + 1] ||
            p.model.biases[l].size() != static_cast<std::size_t>(ls[l + 1]))
          malformed("model bundle layer shape mismatch");
      if (e.contains("final_train_loss")) b.final_losses.push_back(e.at("final_train_loss").get<double>());
      b.predictors.push_back(std::move(p));
    }
    return b;
  });
}

json to_json(const SelectionReport& report) {
  const std::size_t n = report.feature_names.size();
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) matrix[i][j] = report.su_matrix[i * n + j];
  return json{{"pattern", report.subset.pattern},
              {"features", report.feature_names},
              {"su_target", report.target_su},
              {"su_matrix", matrix},
              {"selected", report.subset.members},
              {"merit", report.subset.merit}};
}

FeatureSubset feature_subset_from_json(const json& j) {
  return guarded("selection report", [&] {
    FeatureSubset s;
    s.pattern = j.at("pattern").get<int>();
    s.members = j.at("selected").get<std::vector<std::string>>();
    s.merit = j.at("merit").get<double>();
    return s;
  });
}

void write_predictions_csv(std::ostream& out, const std::string& branch, std::span<const SharePrediction> preds,
                           bool header) {
  const std::size_t k = preds.empty() ? 0 : preds.front().raw.size();
  if (header) {
    out << "branch,consumer_id";
    for (std::size_t j = 0; j < k; ++j) out << ",raw_" << j + 1;
    for (std::size_t j = 0; j < k; ++j) out << ",share_" << j + 1;
    out << '\n';
  }
  for (const auto& p : preds) {
    out << branch << ',' << p.consumer_id;
    for (double v : p.raw) out << ',' << csv::format_double(v);
    for (double v : p.normalized) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

std::vector<SharePrediction> read_predictions_csv(std::istream& in, const std::string& branch) {
  auto header = csv::read_header(in, ',');
  if (!header || header->size() < 4 || (header->size() - 2) % 2 != 0) malformed("bad predictions header");
  const std::size_t k = (header->size() - 2) / 2;
  std::vector<SharePrediction> out;
  std::string line;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line, ',');
    if (f.size() != header->size()) malformed("bad predictions row: " + line);
    if (f[0] != branch) continue;
    SharePrediction p;
    p.consumer_id = std::string(f[1]);
    for (std::size_t j = 0; j < 2 * k; ++j) {
      auto v = csv::parse_double(f[2 + j]);
      if (!v) malformed("bad predictions row: " + line);
      (j < k ? p.raw : p.normalized).push_back(*v);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace loadpat
