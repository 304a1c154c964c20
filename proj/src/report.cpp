#include "loadpat/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"

namespace loadpat {

PatternMse evaluate(std::span<const SharePrediction> predictions, std::span<const PatternShares> actual) {
  if (predictions.size() != actual.size())
    throw Error(ErrorCode::ConsumerMismatch, "prediction and actual consumer sets differ in size");
  if (actual.empty()) throw Error(ErrorCode::Empty, "no consumers to evaluate");
  const std::size_t k = actual.front().shares.size();
  PatternMse out;
  out.per_pattern.assign(k, 0.0);
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (predictions[i].consumer_id != actual[i].consumer_id)
      throw Error(ErrorCode::ConsumerMismatch,
                  "prediction for '" + predictions[i].consumer_id + "' aligned with '" + actual[i].consumer_id + "'");
    if (predictions[i].normalized.size() != k || actual[i].shares.size() != k)
      throw Error(ErrorCode::ShapeMismatch, "share vectors differ in length");
    for (std::size_t j = 0; j < k; ++j) {
      const double r = actual[i].shares[j] - predictions[i].normalized[j];
      out.per_pattern[j] += r * r;
    }
  }
  for (auto& m : out.per_pattern) m /= static_cast<double>(actual.size());
  double total = 0.0;
  for (double m : out.per_pattern) total += m;
  out.average = total / static_cast<double>(k);
  return out;
}

double percent_reduction(double reference, double value) { return (reference - value) / reference; }

namespace {

Reductions reductions_of(double without, double with, double baseline) {
  return {percent_reduction(baseline, with), percent_reduction(baseline, without), percent_reduction(without, with)};
}

}  // namespace

DayTypeReport summarize(std::string day_type, std::vector<PatternRow> rows) {
  if (rows.empty()) throw Error(ErrorCode::Empty, "report section needs at least one pattern row");
  DayTypeReport r;
  r.day_type = std::move(day_type);
  double without = 0.0, with = 0.0, base = 0.0;
  for (const auto& row : rows) {
    without += row.without_selection;
    with += row.with_selection;
    base += row.baseline;
  }
  const double n = static_cast<double>(rows.size());
  r.average_without = without / n;
  r.average_with = with / n;
  r.baseline = base / n;
  r.rows = std::move(rows);
  r.reductions = reductions_of(r.average_without, r.average_with, r.baseline);
  return r;
}

DayTypeReport summarize_averages(std::string day_type, double average_without, double average_with,
                                 double baseline) {
  DayTypeReport r;
  r.day_type = std::move(day_type);
  r.average_without = average_without;
  r.average_with = average_with;
  r.baseline = baseline;
  r.reductions = reductions_of(average_without, average_with, baseline);
  return r;
}

namespace {

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5f", v);
  return buf;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string render_table(const EvaluationReport& report) {
  constexpr std::size_t kLabel = 22;
  constexpr std::size_t kCol = 14;
  std::size_t patterns = 0;
  for (const auto& s : report.sections) patterns = std::max(patterns, s.rows.size());

  std::ostringstream out;
  out << pad_right("", kLabel);
  for (const auto& s : report.sections) {
    std::string name = s.day_type;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    out << pad(name, kCol) << pad("", kCol);
  }
  out << '\n' << pad_right("Pattern", kLabel);
  for (std::size_t i = 0; i < report.sections.size(); ++i) out << pad("w/o Selection", kCol) << pad("w/ Selection", kCol);
  out << '\n';

  auto row = [&](const std::string& label, auto&& cells) {
    out << pad_right(label, kLabel);
    for (const auto& s : report.sections) {
      auto [a, b] = cells(s);
      out << pad(a, kCol) << pad(b, kCol);
    }
    out << '\n';
  };

  for (std::size_t k = 0; k < patterns; ++k) {
    row("G" + std::to_string(k + 1), [&](const DayTypeReport& s) {
      if (k >= s.rows.size()) return std::pair<std::string, std::string>{"", ""};
      return std::pair{cell(s.rows[k].without_selection), cell(s.rows[k].with_selection)};
    });
  }
  row("Average MSE", [](const DayTypeReport& s) { return std::pair{cell(s.average_without), cell(s.average_with)}; });
  row("Baseline", [](const DayTypeReport& s) { return std::pair{cell(s.baseline), std::string()}; });
  row("Reduction vs baseline", [](const DayTypeReport& s) {
    return std::pair{pct(s.reductions.without_vs_baseline), pct(s.reductions.with_vs_baseline)};
  });
  row("Reduction vs w/o sel.",
      [](const DayTypeReport& s) { return std::pair{std::string(), pct(s.reductions.with_vs_without)}; });
  return out.str();
}

std::string render_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "day_type,row,without_selection,with_selection,baseline\n";
  for (const auto& s : report.sections) {
    for (std::size_t k = 0; k < s.rows.size(); ++k)
      out << s.day_type << ",G" << k + 1 << ',' << csv::format_double(s.rows[k].without_selection) << ','
          << csv::format_double(s.rows[k].with_selection) << ',' << csv::format_double(s.rows[k].baseline) << '\n';
    out << s.day_type << ",average," << csv::format_double(s.average_without) << ','
        << csv::format_double(s.average_with) << ',' << csv::format_double(s.baseline) << '\n';
    out << s.day_type << ",reduction_vs_baseline," << csv::format_double(s.reductions.without_vs_baseline) << ','
        << csv::format_double(s.reductions.with_vs_baseline) << ",\n";
    out << s.day_type << ",reduction_vs_without,," << csv::format_double(s.reductions.with_vs_without) << ",\n";
  }
  return out.str();
}

}  // namespace loadpat
