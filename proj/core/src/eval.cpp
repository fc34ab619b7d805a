#include "psa/eval.hpp"

#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "psa/errors.hpp"

namespace psa {

ConfusionMatrix confusion(std::span<const Polarity> predictions, std::span<const Polarity> golds,
                          Polarity positive) {
  if (predictions.size() != golds.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(predictions.size()) +
                                               " predictions for " + std::to_string(golds.size()) +
                                               " gold labels");
  }
  if (predictions.empty()) throw Error(ErrorKind::LengthMismatch, "no predictions to score");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool pred = predictions[i] == positive;
    const bool gold = golds[i] == positive;
    if (pred && gold) {
      ++cm.tp;
    } else if (pred) {
      ++cm.fp;
    } else if (gold) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double f_measure(double precision, double recall) noexcept {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * (precision * recall) / sum;
}

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix is empty");
  Metrics m;
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  m.f_measure = f_measure(m.precision, m.recall);
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  return m;
}

MetricsReport evaluate_per_class(std::span<const Polarity> predictions,
                                 std::span<const Polarity> golds) {
  MetricsReport report;
  report.examples = predictions.size();
  for (std::size_t c = 0; c < kNumPolarities; ++c) {
    const auto cm = confusion(predictions, golds, polarity_from_index(c));
    const Metrics m = metrics(cm);
    report.per_class[c] = {m.precision, m.recall, m.f_measure, cm};
    report.macro.precision += m.precision / static_cast<double>(kNumPolarities);
    report.macro.recall += m.recall / static_cast<double>(kNumPolarities);
    report.macro.f_measure += m.f_measure / static_cast<double>(kNumPolarities);
    if (c == 0) report.accuracy = m.accuracy;
  }
  return report;
}

std::string format_metric(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string format_percent(double fraction) { return format_metric(fraction * 100.0); }

std::string render_report(std::span<const NamedReport> reports) {
  std::ostringstream out;
  char line[128];
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& [name, r] = reports[i];
    if (i) out << '\n';
    out << name << '\n';
    std::snprintf(line, sizeof line, "%-10s %-10s %-8s %-10s %s\n", "", "Precision", "Recall",
                  "F-measure", "Accuracy(%)");
    out << line;
    for (Polarity p : {Polarity::negative, Polarity::positive}) {
      const auto& c = r.of(p);
      std::snprintf(line, sizeof line, "%-10s %-10s %-8s %s\n",
                    p == Polarity::negative ? "Negative" : "Positive", format_metric(c.precision).c_str(),
                    format_metric(c.recall).c_str(), format_metric(c.f_measure).c_str());
      out << line;
    }
    std::snprintf(line, sizeof line, "%-10s %-10s %-8s %-10s %s\n", "AVG",
                  format_metric(r.macro.precision).c_str(), format_metric(r.macro.recall).c_str(),
                  format_metric(r.macro.f_measure).c_str(), format_percent(r.accuracy).c_str());
    out << line;
  }
  return out.str();
}

std::string render_report_json(std::span<const NamedReport> reports) {
  using nlohmann::json;
  json models = json::array();
  for (const auto& [name, r] : reports) {
    json classes = json::object();
    for (Polarity p : {Polarity::negative, Polarity::positive}) {
      const auto& c = r.of(p);
      classes[std::string(to_name(p))] = {
          {"precision", c.precision},
          {"recall", c.recall},
          {"f_measure", c.f_measure},
          {"confusion", {{"tp", c.counts.tp}, {"fp", c.counts.fp}, {"fn", c.counts.fn}, {"tn", c.counts.tn}}},
      };
    }
    models.push_back({
        {"name", name},
        {"examples", r.examples},
        {"accuracy", r.accuracy},
        {"macro", {{"precision", r.macro.precision}, {"recall", r.macro.recall}, {"f_measure", r.macro.f_measure}}},
        {"classes", std::move(classes)},
    });
  }
  json doc = {{"schema", kReportSchema}, {"models", std::move(models)}};
  return doc.dump(2) + "\n";
}

}  // namespace psa
