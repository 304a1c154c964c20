#pragma once

#include <span>
#include <string>
#include <vector>

#include "loadpat/clustering.hpp"
#include "loadpat/predictor.hpp"

namespace loadpat {

struct PatternMse {
  std::vector<double> per_pattern;
  double average = 0.0;
};

/// Per-pattern MSE over consumers. Predictions and actuals must list the
/// same consumers in the same order, else Error{ConsumerMismatch}.
PatternMse evaluate(std::span<const SharePrediction> predictions, std::span<const PatternShares> actual);

/// (reference - value) / reference
double percent_reduction(double reference, double value);

struct PatternRow {
  double without_selection = 0.0;
  double with_selection = 0.0;
  double baseline = 0.0;
};

struct Reductions {
  double with_vs_baseline = 0.0;
  double without_vs_baseline = 0.0;
  double with_vs_without = 0.0;
};

struct DayTypeReport {
  std::string day_type;
  std::vector<PatternRow> rows;  // empty when built from averages only
  double average_without = 0.0;
  double average_with = 0.0;
  double baseline = 0.0;
  Reductions reductions;
};

/// Averages over the pattern rows and the derived reduction cells.
DayTypeReport summarize(std::string day_type, std::vector<PatternRow> rows);

/// Report section from already-averaged figures.
DayTypeReport summarize_averages(std::string day_type, double average_without, double average_with,
                                 double baseline);

struct EvaluationReport {
  std::vector<DayTypeReport> sections;
};

/// Aligned text table: one G<k> row per pattern, then average, baseline and
/// reduction rows, one column pair per day type.
std::string render_table(const EvaluationReport& report);

/// Machine-readable form: day_type,row,without_selection,with_selection,baseline
std::string render_csv(const EvaluationReport& report);

}  // namespace loadpat
