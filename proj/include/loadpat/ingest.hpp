#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace loadpat {

inline constexpr std::size_t kHoursPerDay = 24;
inline constexpr int kSamplesPerHour = 12;

using Date = std::chrono::year_month_day;
using HourlyValues = std::array<double, kHoursPerDay>;

enum class DayType { Workday, Weekend };

const char* to_string(DayType t);
std::optional<DayType> parse_day_type(std::string_view s);

/// Monday-Friday are workdays; holidays are not special-cased.
DayType day_type_of(Date date);

std::string format_date(Date date);
std::optional<Date> parse_date(std::string_view s);

struct Timestamp {
  Date date;
  int hour = 0;
  int minute = 0;
  int second = 0;
};

/// Accepts "YYYY-MM-DDTHH:MM[:SS]" and the same with a space separator.
std::optional<Timestamp> parse_timestamp(std::string_view s);

struct RawReading {
  std::string consumer_id;
  Timestamp timestamp;
  double load = 0.0;  // kW
};

enum class RejectReason { MissingField, BadTimestamp, Misaligned, NonNumericLoad, NegativeLoad };
const char* to_string(RejectReason r);

struct Rejection {
  std::size_t line = 0;  // 1-based, header is line 1
  RejectReason reason;
  std::string text;
};

struct LoadSchema {
  std::string id_column = "consumer_id";
  std::string timestamp_column = "timestamp";
  std::string load_column = "load_kw";
  char delimiter = ',';
};

struct ParsedLoads {
  std::vector<RawReading> readings;
  std::vector<Rejection> rejections;
};

/// Throws Error{MissingColumn} or Error{EmptyInput}. Bad rows go to `rejections`.
ParsedLoads parse_load_csv(std::istream& in, const LoadSchema& schema);

struct DailyLoadProfile {
  std::string consumer_id;
  Date date;
  DayType day_type = DayType::Workday;
  HourlyValues hours{};
};

enum class Aggregation { Mean, Sum };

struct AggregationReport {
  std::size_t complete_days = 0;
  std::size_t incomplete_days = 0;
  std::size_t duplicate_readings = 0;
};

struct AggregatedLoads {
  std::vector<DailyLoadProfile> profiles;  // sorted by (consumer_id, date)
  AggregationReport report;
};

/// Buckets 5-minute readings into hours. An hour needs all 12 slots; a day
/// needs all 24 hours, otherwise it is counted as incomplete and skipped.
AggregatedLoads aggregate_hourly(std::span<const RawReading> readings,
                                 Aggregation mode = Aggregation::Mean);

struct DayTypeSplit {
  std::vector<DailyLoadProfile> workday;
  std::vector<DailyLoadProfile> weekend;
};

DayTypeSplit split_day_type(std::span<const DailyLoadProfile> profiles);

struct ConsumerDayCount {
  std::string consumer_id;
  std::size_t workday_days = 0;
  std::size_t weekend_days = 0;
  bool retained = false;
};

struct RetentionReport {
  std::size_t min_days_per_consumer = 0;
  std::vector<ConsumerDayCount> consumers;  // sorted by id
  std::size_t total_consumers = 0;
  std::size_t retained_consumers = 0;
};

struct FilteredProfiles {
  std::vector<DailyLoadProfile> retained;
  RetentionReport report;
};

/// Drops consumers with fewer than `min_days_per_consumer` valid days in
/// either day-type group. Throws Error{AllConsumersDropped}.
FilteredProfiles filter_complete(std::span<const DailyLoadProfile> profiles,
                                 std::size_t min_days_per_consumer);

struct NormalizedProfile {
  std::string consumer_id;
  Date date;
  DayType day_type = DayType::Workday;
  HourlyValues values{};
};

/// Min-max scaling over the day's load spread. Returns nullopt for a flat
/// (degenerate) day.
std::optional<NormalizedProfile> normalize_profile(const DailyLoadProfile& p);

struct NormalizedSet {
  std::vector<NormalizedProfile> profiles;
  std::size_t degenerate_days = 0;
};

NormalizedSet normalize_all(std::span<const DailyLoadProfile> profiles);

void write_normalized_csv(std::ostream& out, std::span<const NormalizedProfile> profiles);
std::vector<NormalizedProfile> read_normalized_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Household metadata

enum class FeatureKind { Age, Bracket, Categorical };
const char* to_string(FeatureKind k);
std::optional<FeatureKind> parse_feature_kind(std::string_view s);

inline constexpr std::array<const char*, 5> kAgeClasses = {
    "under 15", "15 to 24", "25 to 44", "45 to 64", "older than 65"};

/// Left-inclusive bins [0,15) [15,25) [25,45) [45,65) [65,inf).
/// Returns nullopt for negative or non-finite ages.
std::optional<int> age_class(double years);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Categorical;
  std::vector<double> edges;            // interior bracket boundaries; empty => quantiles
  int quantiles = 5;                    // bracket count when edges are derived
  std::vector<std::string> categories;  // fixed label order; empty => sorted distinct values
};

struct MetadataSchema {
  std::string id_column = "consumer_id";
  std::vector<FeatureSpec> features;  // empty => inferred from the header
  char delimiter = ',';
};

struct RawMetadata {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawMetadata parse_metadata_csv(std::istream& in, char delimiter = ',');

struct LabelMap {
  std::string feature;
  FeatureKind kind = FeatureKind::Categorical;
  std::vector<std::string> categories;  // label i names categories[i]
  std::vector<double> edges;            // bracket features only

  int arity() const { return static_cast<int>(categories.size()); }
};

struct SocioRecord {
  std::string consumer_id;
  std::vector<std::pair<std::string, int>> attributes;

  std::optional<int> label(std::string_view feature) const;
};

struct EncodedMetadata {
  std::vector<SocioRecord> records;  // sorted by consumer id
  std::vector<LabelMap> maps;        // in feature order
};

/// Equal-frequency interior edges (linear interpolation between order statistics).
std::vector<double> quantile_edges(std::vector<double> values, int brackets);

/// Index of the bracket holding `v`: the number of interior edges <= v.
int bracket_of(double v, std::span<const double> edges);

/// Throws Error{UnknownCategory}, Error{MissingAttribute} or Error{MissingColumn}.
EncodedMetadata encode_metadata(const RawMetadata& table, const MetadataSchema& schema);

void write_socio_csv(std::ostream& out, const EncodedMetadata& meta);

}  // namespace loadpat
