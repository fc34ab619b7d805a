#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "psa/corpus.hpp"

namespace psa {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double accuracy = 0.0;
};

/// Counts with `positive` treated as the positive class.
ConfusionMatrix confusion(std::span<const Polarity> predictions, std::span<const Polarity> golds,
                          Polarity positive);

/// precision = TP/(TP+FP), recall = TP/(TP+FN), F = 2PR/(P+R),
/// accuracy = (TP+TN)/total. A zero denominator yields 0 for that metric.
Metrics metrics(const ConfusionMatrix& cm);

double f_measure(double precision, double recall) noexcept;

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  ConfusionMatrix counts;
};

struct MetricsReport {
  std::array<ClassMetrics, kNumPolarities> per_class;  // indexed by class_index()
  ClassMetrics macro;  // unweighted mean of per-class values; counts unused
  double accuracy = 0.0;
  std::size_t examples = 0;

  const ClassMetrics& of(Polarity p) const { return per_class[class_index(p)]; }
};

MetricsReport evaluate_per_class(std::span<const Polarity> predictions,
                                 std::span<const Polarity> golds);

struct NamedReport {
  std::string name;
  MetricsReport report;
};

/// Two decimals, exact decimal rounding of the stored binary value with
/// ties to even.
std::string format_metric(double value);
/// Percentage with two decimals, e.g. 0.7849 -> "78.49".
std::string format_percent(double fraction);

/// Plain-text table: one block per model with Negative / Positive / AVG rows.
std::string render_report(std::span<const NamedReport> reports);

/// Machine-readable `report/1` JSON with full-precision metrics and counts.
std::string render_report_json(std::span<const NamedReport> reports);

inline constexpr const char* kReportSchema = "report/1";

}  // namespace psa
