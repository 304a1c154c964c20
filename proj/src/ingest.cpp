#include "loadpat/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"

namespace loadpat {

namespace chr = std::chrono;

const char* to_string(DayType t) { return t == DayType::Workday ? "workday" : "weekend"; }

std::optional<DayType> parse_day_type(std::string_view s) {
  if (s == "workday") return DayType::Workday;
  if (s == "weekend") return DayType::Weekend;
  return std::nullopt;
}

DayType day_type_of(Date date) {
  const chr::weekday wd{chr::sys_days{date}};
  return (wd == chr::Saturday || wd == chr::Sunday) ? DayType::Weekend : DayType::Workday;
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

namespace {

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<Date> parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!parse_fixed(s, 0, 4, y) || !parse_fixed(s, 5, 2, m) || !parse_fixed(s, 8, 2, d)) return std::nullopt;
  const Date date{chr::year{y}, chr::month{static_cast<unsigned>(m)}, chr::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  if (s.size() != 16 && s.size() != 19) return std::nullopt;
  auto date = parse_date(s.substr(0, 10));
  if (!date || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') return std::nullopt;
  Timestamp ts{*date, 0, 0, 0};
  if (!parse_fixed(s, 11, 2, ts.hour) || !parse_fixed(s, 14, 2, ts.minute)) return std::nullopt;
  if (s.size() == 19 && (s[16] != ':' || !parse_fixed(s, 17, 2, ts.second))) return std::nullopt;
  if (ts.hour > 23 || ts.minute > 59 || ts.second > 59) return std::nullopt;
  return ts;
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::MissingField: return "MissingField";
    case RejectReason::BadTimestamp: return "BadTimestamp";
    case RejectReason::Misaligned: return "Misaligned";
    case RejectReason::NonNumericLoad: return "NonNumericLoad";
    case RejectReason::NegativeLoad: return "NegativeLoad";
  }
  return "Unknown";
}

ParsedLoads parse_load_csv(std::istream& in, const LoadSchema& schema) {
  auto header = csv::read_header(in, schema.delimiter);
  if (!header) throw Error(ErrorCode::EmptyInput, "load table has no header");
  const int id_col = csv::find_column(*header, schema.id_column);
  const int ts_col = csv::find_column(*header, schema.timestamp_column);
  const int load_col = csv::find_column(*header, schema.load_column);
  for (auto [col, name] : {std::pair{id_col, &schema.id_column}, std::pair{ts_col, &schema.timestamp_column},
                           std::pair{load_col, &schema.load_column}}) {
    if (col < 0) throw Error(ErrorCode::MissingColumn, "load table lacks column '" + *name + "'");
  }
  const auto needed = static_cast<std::size_t>(std::max({id_col, ts_col, load_col}));

  ParsedLoads out;
  std::string line;
  std::size_t line_no = 1;
  std::size_t data_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    ++data_rows;
    const auto fields = csv::split(line, schema.delimiter);
    auto reject = [&](RejectReason r) { out.rejections.push_back({line_no, r, line}); };
    if (fields.size() <= needed || fields[id_col].empty()) {
      reject(RejectReason::MissingField);
      continue;
    }
    auto ts = parse_timestamp(fields[ts_col]);
    if (!ts) {
      reject(RejectReason::BadTimestamp);
      continue;
    }
    if (ts->minute % 5 != 0 || ts->second != 0) {
      reject(RejectReason::Misaligned);
      continue;
    }
    auto load = csv::parse_double(fields[load_col]);
    if (!load) {
      reject(RejectReason::NonNumericLoad);
      continue;
    }
    if (*load < 0.0) {
      reject(RejectReason::NegativeLoad);
      continue;
    }
    out.readings.push_back({std::string(fields[id_col]), *ts, *load});
  }
  if (data_rows == 0) throw Error(ErrorCode::EmptyInput, "load table has no data rows");
  return out;
}

AggregatedLoads aggregate_hourly(std::span<const RawReading> readings, Aggregation mode) {
  // Rank consumer ids so that packed integer keys sort in (id, date, slot) order.
  std::vector<std::string> ids;
  {
    std::unordered_map<std::string_view, int> seen;
    for (const auto& r : readings)
      if (seen.emplace(r.consumer_id, 0).second) ids.push_back(r.consumer_id);
    std::sort(ids.begin(), ids.end());
  }
  std::unordered_map<std::string_view, std::uint64_t> rank;
  for (std::size_t i = 0; i < ids.size(); ++i) rank.emplace(ids[i], i);

  constexpr std::int64_t kDayOffset = 1 << 22;
  std::vector<std::pair<std::uint64_t, std::size_t>> keys;
  keys.reserve(readings.size());
  for (std::size_t i = 0; i < readings.size(); ++i) {
    const auto& r = readings[i];
    const auto day = chr::sys_days{r.timestamp.date}.time_since_epoch().count() + kDayOffset;
    const auto slot = static_cast<std::uint64_t>(r.timestamp.hour * kSamplesPerHour + r.timestamp.minute / 5);
    const std::uint64_t key = (rank.at(r.consumer_id) << 33) | (static_cast<std::uint64_t>(day) << 9) | slot;
    keys.emplace_back(key, i);
  }
  std::sort(keys.begin(), keys.end());

  AggregatedLoads out;
  std::size_t i = 0;
  while (i < keys.size()) {
    const std::uint64_t day_key = keys[i].first >> 9;
    std::array<double, kHoursPerDay> sums{};
    std::array<int, kHoursPerDay> counts{};
    std::int64_t last_slot = -1;
    const RawReading& first = readings[keys[i].second];
    for (; i < keys.size() && (keys[i].first >> 9) == day_key; ++i) {
      const auto slot = static_cast<std::int64_t>(keys[i].first & 0x1ff);
      if (slot == last_slot) {
        ++out.report.duplicate_readings;  // first reading for a slot wins
        continue;
      }
      last_slot = slot;
      sums[slot / kSamplesPerHour] += readings[keys[i].second].load;
      ++counts[slot / kSamplesPerHour];
    }
    const bool complete =
        std::all_of(counts.begin(), counts.end(), [](int c) { return c == kSamplesPerHour; });
    if (!complete) {
      ++out.report.incomplete_days;
      continue;
    }
    ++out.report.complete_days;
    DailyLoadProfile p;
    p.consumer_id = first.consumer_id;
    p.date = first.timestamp.date;
    p.day_type = day_type_of(p.date);
    for (std::size_t h = 0; h < kHoursPerDay; ++h)
      p.hours[h] = mode == Aggregation::Mean ? sums[h] / kSamplesPerHour : sums[h];
    out.profiles.push_back(std::move(p));
  }
  return out;
}

DayTypeSplit split_day_type(std::span<const DailyLoadProfile> profiles) {
  DayTypeSplit out;
  for (const auto& p : profiles) {
    if (day_type_of(p.date) == DayType::Weekend) {
      out.weekend.push_back(p);
      out.weekend.back().day_type = DayType::Weekend;
    } else {
      out.workday.push_back(p);
      out.workday.back().day_type = DayType::Workday;
    }
  }
  return out;
}

FilteredProfiles filter_complete(std::span<const DailyLoadProfile> profiles, std::size_t min_days_per_consumer) {
  std::map<std::string, ConsumerDayCount> counts;
  for (const auto& p : profiles) {
    auto& c = counts[p.consumer_id];
    c.consumer_id = p.consumer_id;
    if (day_type_of(p.date) == DayType::Weekend)
      ++c.weekend_days;
    else
      ++c.workday_days;
  }
  FilteredProfiles out;
  out.report.min_days_per_consumer = min_days_per_consumer;
  out.report.total_consumers = counts.size();
  for (auto& [id, c] : counts) {
    c.retained = c.workday_days >= min_days_per_consumer && c.weekend_days >= min_days_per_consumer;
    if (c.retained) ++out.report.retained_consumers;
    out.report.consumers.push_back(c);
  }
  if (out.report.retained_consumers == 0)
    throw Error(ErrorCode::AllConsumersDropped,
                "no consumer has " + std::to_string(min_days_per_consumer) + " valid days per day type");
  for (const auto& p : profiles)
    if (counts.at(p.consumer_id).retained) out.retained.push_back(p);
  return out;
}

std::optional<NormalizedProfile> normalize_profile(const DailyLoadProfile& p) {
  const auto [lo_it, hi_it] = std::minmax_element(p.hours.begin(), p.hours.end());
  const double lo = *lo_it;
  const double spread = *hi_it - lo;
  if (!(spread > 0.0)) return std::nullopt;
  NormalizedProfile out{p.consumer_id, p.date, p.day_type, {}};
  for (std::size_t t = 0; t < kHoursPerDay; ++t) out.values[t] = (p.hours[t] - lo) / spread;
  return out;
}

NormalizedSet normalize_all(std::span<const DailyLoadProfile> profiles) {
  NormalizedSet out;
  out.profiles.reserve(profiles.size());
  for (const auto& p : profiles) {
    if (auto n = normalize_profile(p))
      out.profiles.push_back(std::move(*n));
    else
      ++out.degenerate_days;
  }
  return out;
}

void write_normalized_csv(std::ostream& out, std::span<const NormalizedProfile> profiles) {
  out << "consumer_id,date,day_type";
  for (std::size_t h = 0; h < kHoursPerDay; ++h) out << (h < 10 ? ",h0" : ",h") << h;
  out << '\n';
  for (const auto& p : profiles) {
    out << p.consumer_id << ',' << format_date(p.date) << ',' << to_string(p.day_type);
    for (double v : p.values) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

std::vector<NormalizedProfile> read_normalized_csv(std::istream& in) {
  auto header = csv::read_header(in, ',');
  if (!header || header->size() != 3 + kHoursPerDay)
    throw Error(ErrorCode::MissingColumn, "normalized profile table needs consumer_id,date,day_type,h00..h23");
  std::vector<NormalizedProfile> out;
  std::string line;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line, ',');
    if (f.size() != 3 + kHoursPerDay) throw Error(ErrorCode::ShapeMismatch, "bad profile row: " + line);
    NormalizedProfile p;
    p.consumer_id = std::string(f[0]);
    auto date = parse_date(f[1]);
    auto dt = parse_day_type(f[2]);
    if (!date || !dt) throw Error(ErrorCode::ShapeMismatch, "bad profile row: " + line);
    p.date = *date;
    p.day_type = *dt;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      auto v = csv::parse_double(f[3 + h]);
      if (!v) throw Error(ErrorCode::ShapeMismatch, "bad profile value: " + line);
      p.values[h] = *v;
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Age: return "age";
    case FeatureKind::Bracket: return "bracket";
    case FeatureKind::Categorical: return "categorical";
  }
  return "unknown";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view s) {
  if (s == "age") return FeatureKind::Age;
  if (s == "bracket") return FeatureKind::Bracket;
  if (s == "categorical") return FeatureKind::Categorical;
  return std::nullopt;
}

std::optional<int> age_class(double years) {
  if (!std::isfinite(years) || years < 0.0) return std::nullopt;
  if (years < 15.0) return 0;
  if (years < 25.0) return 1;
  if (years < 45.0) return 2;
  if (years < 65.0) return 3;
  return 4;
}

std::optional<int> SocioRecord::label(std::string_view feature) const {
  for (const auto& [name, value] : attributes)
    if (name == feature) return value;
  return std::nullopt;
}

RawMetadata parse_metadata_csv(std::istream& in, char delimiter) {
  RawMetadata out;
  auto header = csv::read_header(in, delimiter);
  if (!header) throw Error(ErrorCode::EmptyInput, "metadata table has no header");
  out.header = std::move(*header);
  std::string line;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    std::vector<std::string> row;
    for (auto f : csv::split(line, delimiter)) row.emplace_back(f);
    row.resize(out.header.size());
    out.rows.push_back(std::move(row));
  }
  if (out.rows.empty()) throw Error(ErrorCode::EmptyInput, "metadata table has no data rows");
  return out;
}

std::vector<double> quantile_edges(std::vector<double> values, int brackets) {
  std::vector<double> edges;
  if (values.empty() || brackets < 2) return edges;
  std::sort(values.begin(), values.end());
  const double n1 = static_cast<double>(values.size() - 1);
  for (int b = 1; b < brackets; ++b) {
    const double pos = n1 * b / brackets;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    edges.push_back(values[lo] + frac * (values[hi] - values[lo]));
  }
  return edges;
}

int bracket_of(double v, std::span<const double> edges) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

namespace {

std::vector<std::string> bracket_names(const std::vector<double>& edges) {
  std::vector<std::string> names;
  if (edges.empty()) return {"all"};
  names.push_back("<" + csv::format_double(edges.front()));
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    names.push_back("[" + csv::format_double(edges[i]) + "," + csv::format_double(edges[i + 1]) + ")");
  names.push_back(">=" + csv::format_double(edges.back()));
  return names;
}

bool all_numeric(const RawMetadata& table, int col) {
  for (const auto& row : table.rows)
    if (!csv::parse_double(row[col])) return false;
  return true;
}

std::vector<FeatureSpec> infer_features(const RawMetadata& table, const std::string& id_column) {
  std::vector<FeatureSpec> specs;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (name == id_column) continue;
    FeatureSpec spec;
    spec.name = name;
    if (name.find("age") == 0)
      spec.kind = FeatureKind::Age;
    else if (all_numeric(table, static_cast<int>(c)))
      spec.kind = FeatureKind::Bracket;
    else
      spec.kind = FeatureKind::Categorical;
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace

EncodedMetadata encode_metadata(const RawMetadata& table, const MetadataSchema& schema) {
  const int id_col = csv::find_column(table.header, schema.id_column);
  if (id_col < 0) throw Error(ErrorCode::MissingColumn, "metadata lacks id column '" + schema.id_column + "'");
  const auto specs = schema.features.empty() ? infer_features(table, schema.id_column) : schema.features;

  // Row order by consumer id; duplicate ids are a data error.
  std::vector<std::size_t> order(table.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return table.rows[a][id_col] < table.rows[b][id_col]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (table.rows[order[i]][id_col] == table.rows[order[i - 1]][id_col])
      throw Error(ErrorCode::UnknownCategory, "duplicate consumer id '" + table.rows[order[i]][id_col] + "'");

  EncodedMetadata out;
  out.records.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) out.records[i].consumer_id = table.rows[order[i]][id_col];

  for (const auto& spec : specs) {
    const int col = csv::find_column(table.header, spec.name);
    if (col < 0) throw Error(ErrorCode::MissingColumn, "metadata lacks feature column '" + spec.name + "'");
    LabelMap map{spec.name, spec.kind, {}, {}};
    std::vector<int> labels(order.size());

    auto value_at = [&](std::size_t i) -> const std::string& {
      const auto& v = table.rows[order[i]][col];
      if (csv::trim(v).empty())
        throw Error(ErrorCode::MissingAttribute,
                    "consumer '" + out.records[i].consumer_id + "' has no value for '" + spec.name + "'");
      return v;
    };
    auto unknown = [&](std::size_t i) {
      return Error(ErrorCode::UnknownCategory,
                   "value '" + table.rows[order[i]][col] + "' of '" + spec.name + "' fits no category");
    };

    switch (spec.kind) {
      case FeatureKind::Age: {
        map.categories.assign(kAgeClasses.begin(), kAgeClasses.end());
        for (std::size_t i = 0; i < order.size(); ++i) {
          const auto& v = value_at(i);
          if (auto years = csv::parse_double(v)) {
            auto cls = age_class(*years);
            if (!cls) throw unknown(i);
            labels[i] = *cls;
          } else {
            auto it = std::find(kAgeClasses.begin(), kAgeClasses.end(), csv::trim(v));
            if (it == kAgeClasses.end()) throw unknown(i);
            labels[i] = static_cast<int>(it - kAgeClasses.begin());
          }
        }
        break;
      }
      case FeatureKind::Bracket: {
        std::vector<double> values(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
          auto v = csv::parse_double(value_at(i));
          if (!v) throw unknown(i);
          values[i] = *v;
        }
        map.edges = spec.edges.empty() ? quantile_edges(values, spec.quantiles) : spec.edges;
        if (!std::is_sorted(map.edges.begin(), map.edges.end()))
          throw Error(ErrorCode::BadConfig, "bracket edges of '" + spec.name + "' are not sorted");
        map.categories = bracket_names(map.edges);
        for (std::size_t i = 0; i < order.size(); ++i) labels[i] = bracket_of(values[i], map.edges);
        break;
      }
      case FeatureKind::Categorical: {
        if (!spec.categories.empty()) {
          map.categories = spec.categories;
        } else {
          std::set<std::string> distinct;
          for (std::size_t i = 0; i < order.size(); ++i) distinct.emplace(csv::trim(value_at(i)));
          map.categories.assign(distinct.begin(), distinct.end());
        }
        for (std::size_t i = 0; i < order.size(); ++i) {
          const auto v = csv::trim(value_at(i));
          auto it = std::find(map.categories.begin(), map.categories.end(), v);
          if (it == map.categories.end()) throw unknown(i);
          labels[i] = static_cast<int>(it - map.categories.begin());
        }
        break;
      }
    }
    for (std::size_t i = 0; i < order.size(); ++i) out.records[i].attributes.emplace_back(spec.name, labels[i]);
    out.maps.push_back(std::move(map));
  }
  return out;
}

void write_socio_csv(std::ostream& out, const EncodedMetadata& meta) {
  out << "consumer_id";
  for (const auto& m : meta.maps) out << ',' << m.feature;
  out << '\n';
  for (const auto& r : meta.records) {
    out << r.consumer_id;
    for (const auto& [name, label] : r.attributes) out << ',' << label;
    out << '\n';
  }
}

}  // namespace loadpat
