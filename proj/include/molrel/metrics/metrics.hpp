#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "molrel/core/error.hpp"

namespace molrel::metrics {

/// Metric with no defined value for the input (e.g. AUROC of a single class).
/// Reports show it as a missing cell, never as 0.
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

struct PredictionRecord {
  double probability = 0.0;  // ȳ
  int label = 0;             // 0 or 1
  std::size_t task = 0;
};

/// Records for every labelled cell of a row-major (rows x tasks) probability
/// table; cells labelled chem::kMissingLabel (-1) are skipped.
std::vector<PredictionRecord> make_records(std::span<const double> probabilities, std::span<const std::int8_t> labels,
                                           std::size_t tasks);

struct CalibrationBin {
  double low = 0.0, high = 0.0;  // confidence range [low, high), last bin closed
  double mean_confidence = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double ece = 0.0;
  std::size_t total = 0;
};

/// Confidence max(ȳ, 1−ȳ) binned into `bins` equal-width bins over [0.5, 1];
/// prediction is [ȳ ≥ 0.5]. Throws ConfigError on empty input.
CalibrationReport ece(std::span<const PredictionRecord> records, std::size_t bins = 10);

/// Mann–Whitney statistic with mid-ranks: P(s_pos > s_neg) + P(equal)/2.
/// Throws UndefinedMetric without both classes.
double auroc(std::span<const PredictionRecord> records);

struct ClassificationMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  bool precision_undefined = false;  // no predicted positives; precision and f1 set to 0
  bool recall_undefined = false;     // no actual positives; recall and f1 set to 0
};

/// Positive prediction when ȳ ≥ threshold. Throws ConfigError on empty input.
ClassificationMetrics classification_metrics(std::span<const PredictionRecord> records, double threshold = 0.5);

struct ConfusionBin {
  double low = 0.0, high = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct ConfusionHistogram {
  std::vector<ConfusionBin> bins;

  ClassificationMetrics totals() const;
};

/// Bins ȳ over [0, 1] (last bin closed) and splits each bin by outcome at 0.5.
ConfusionHistogram confusion_histogram(std::span<const PredictionRecord> records, std::size_t bins = 20);

struct ScreeningSummary {
  std::size_t below = 0;  // ȳ < low
  std::size_t above = 0;  // ȳ > high
  std::size_t total = 0;
  double low = 0.05, high = 0.95;
  std::vector<std::size_t> histogram;  // equal-width bins over [0, 1]

  double extreme_fraction() const { return total ? static_cast<double>(below + above) / static_cast<double>(total) : 0.0; }
};

/// Throws ConfigError when a probability lies outside [0, 1].
ScreeningSummary screening_summary(std::span<const double> probabilities, double low = 0.05, double high = 0.95,
                                   std::size_t bins = 20);

/// Equal-width bin of x ∈ [lo, hi] among `bins`, decided by comparing with the
/// bin edges lo + (hi − lo)·b/bins; x = hi falls in the last bin.
std::size_t bin_index(double x, double lo, double hi, std::size_t bins);

/// Per-task metrics, then the unweighted mean over tasks. AUROC is averaged
/// over the tasks where it is defined and is empty when none is.
struct DatasetMetrics {
  double ece = 0.0;
  std::optional<double> auroc;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t tasks = 0;
  std::size_t auroc_tasks = 0;
  std::vector<std::size_t> undefined_auroc_tasks;
};

DatasetMetrics evaluate(std::span<const PredictionRecord> records, std::size_t tasks);

/// Mean and population standard deviation; empty values give n = 0.
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

nlohmann::json to_json(const CalibrationReport& report);
nlohmann::json to_json(const ClassificationMetrics& m);
nlohmann::json to_json(const ConfusionHistogram& h);
nlohmann::json to_json(const ScreeningSummary& s);
nlohmann::json to_json(const DatasetMetrics& m);
nlohmann::json to_json(const Summary& s);

/// Header bin_low,bin_high,tp,fp,tn,fn then one row per bin.
std::string confusion_csv(const ConfusionHistogram& h);
/// Header bin_low,bin_high,count.
std::string screening_csv(const ScreeningSummary& s);
/// Stacked bar chart of TP/FP/TN/FN per bin.
std::string confusion_svg(const ConfusionHistogram& h, const std::string& title);
/// Bar chart of the screening histogram with the two thresholds marked.
std::string screening_svg(const ScreeningSummary& s, const std::string& title);

}  // namespace molrel::metrics
