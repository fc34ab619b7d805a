#include <gtest/gtest.h>

#include <json.hpp>

#include "psa/errors.hpp"
#include "psa/eval.hpp"
#include "psa/rng.hpp"

namespace psa {
namespace {

constexpr Polarity P = Polarity::positive;
constexpr Polarity N = Polarity::negative;

Polarity flip(Polarity p) { return p == P ? N : P; }

// Predictions and golds for a given negative-class confusion layout:
// nn = gold neg predicted neg, np = gold neg predicted pos, and so on.
void build(std::size_t nn, std::size_t np, std::size_t pn, std::size_t pp, std::vector<Polarity>& preds,
           std::vector<Polarity>& golds) {
  const auto add = [&](std::size_t count, Polarity pred, Polarity gold) {
    for (std::size_t i = 0; i < count; ++i) {
      preds.push_back(pred);
      golds.push_back(gold);
    }
  };
  add(nn, N, N);
  add(np, P, N);
  add(pn, N, P);
  add(pp, P, P);
}

TEST(Confusion, Examples) {
  const Polarity preds[] = {P, P, N, N};
  const Polarity golds[] = {P, N, N, P};
  EXPECT_EQ(confusion(preds, golds, P), (ConfusionMatrix{1, 1, 1, 1}));
  EXPECT_EQ(confusion(golds, golds, P).fp, 0u);
  EXPECT_EQ(confusion(golds, golds, P).fn, 0u);
  const Polarity all_pos[] = {P, P, P};
  const Polarity all_neg[] = {N, N, N};
  EXPECT_EQ(confusion(all_pos, all_neg, P), (ConfusionMatrix{0, 3, 0, 0}));
  try {
    confusion(preds, all_pos, P);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(Metrics, Substitution) {
  const Metrics m = metrics({50, 10, 10, 30});
  EXPECT_DOUBLE_EQ(m.precision, 50.0 / 60.0);
  EXPECT_DOUBLE_EQ(m.recall, 50.0 / 60.0);
  EXPECT_DOUBLE_EQ(m.f_measure, 50.0 / 60.0);
  EXPECT_EQ(m.accuracy, 0.8);
}

TEST(Metrics, ZeroDivision) {
  const Metrics m = metrics({0, 0, 4, 6});
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f_measure, 0.0);
  EXPECT_EQ(m.accuracy, 0.6);
  EXPECT_THROW(metrics({0, 0, 0, 0}), Error);
}

TEST(Metrics, TableOneNegativeRow) {
  EXPECT_EQ(format_metric(f_measure(0.78, 0.76)), "0.77");
  EXPECT_EQ(format_metric(f_measure(0.79, 0.81)), "0.80");
}

TEST(Format, TiesToEvenOnStoredValue) {
  EXPECT_EQ(format_metric(0.125), "0.12");
  EXPECT_EQ(format_metric(0.375), "0.38");
  EXPECT_EQ(format_metric(0.785), "0.79");  // stored as 0.78500000000000003
  EXPECT_EQ(format_metric(1.0), "1.00");
  EXPECT_EQ(format_percent(146.0 / 186.0), "78.49");
}

struct Recount {
  double precision, recall, f, accuracy;
};

// Independent recount straight from the label lists.
Recount brute_force(const std::vector<Polarity>& preds, const std::vector<Polarity>& golds, Polarity pos) {
  double tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == golds[i]) correct += 1;
    if (preds[i] == pos && golds[i] == pos) tp += 1;
    if (preds[i] == pos && golds[i] != pos) fp += 1;
    if (preds[i] != pos && golds[i] == pos) fn += 1;
  }
  Recount r{};
  r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  r.f = r.precision + r.recall > 0 ? 2 * (r.precision * r.recall) / (r.precision + r.recall) : 0.0;
  r.accuracy = correct / static_cast<double>(preds.size());
  return r;
}

TEST(Metrics, BruteForceOracle) {
  Xoshiro256 rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<Polarity> preds, golds;
    for (std::size_t i = 0; i < n; ++i) {
      preds.push_back(rng.below(2) ? P : N);
      golds.push_back(rng.below(2) ? P : N);
    }
    const MetricsReport report = evaluate_per_class(preds, golds);
    for (Polarity c : {N, P}) {
      const Recount want = brute_force(preds, golds, c);
      const ClassMetrics& got = report.of(c);
      ASSERT_EQ(got.precision, want.precision);
      ASSERT_EQ(got.recall, want.recall);
      ASSERT_EQ(got.f_measure, want.f);
      ASSERT_EQ(metrics(got.counts).accuracy, want.accuracy);
      if (got.precision + got.recall > 0) {
        ASSERT_NEAR(got.f_measure, 2 * got.precision * got.recall / (got.precision + got.recall), 1e-12);
      }
    }
    ASSERT_EQ(report.accuracy, brute_force(preds, golds, P).accuracy);
    ASSERT_EQ(report.examples, n);
  }
}

TEST(Metrics, LabelSwapSymmetry) {
  Xoshiro256 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Polarity> preds, golds, fp, fg;
    for (std::size_t i = 0, n = 1 + rng.below(30); i < n; ++i) {
      preds.push_back(rng.below(2) ? P : N);
      golds.push_back(rng.below(2) ? P : N);
      fp.push_back(flip(preds.back()));
      fg.push_back(flip(golds.back()));
    }
    const auto a = evaluate_per_class(preds, golds);
    const auto b = evaluate_per_class(fp, fg);
    EXPECT_EQ(a.of(P).precision, b.of(N).precision);
    EXPECT_EQ(a.of(N).recall, b.of(P).recall);
    EXPECT_EQ(a.accuracy, b.accuracy);
    EXPECT_DOUBLE_EQ(a.macro.f_measure, b.macro.f_measure);
    EXPECT_EQ(metrics(confusion(preds, golds, P)).accuracy, metrics(confusion(preds, golds, N)).accuracy);
  }
}

TEST(Report, PerfectBalanced) {
  std::vector<Polarity> preds, golds;
  build(5, 0, 0, 5, preds, golds);
  const auto r = evaluate_per_class(preds, golds);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.macro.precision, 1.0);
  EXPECT_EQ(r.macro.f_measure, 1.0);
}

TEST(Report, SingleExample) {
  const Polarity one[] = {P};
  const auto r = evaluate_per_class(one, one);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.of(N).precision, 0.0);
  EXPECT_EQ(r.of(N).f_measure, 0.0);
  const std::vector<NamedReport> named{{"MLP", r}};
  EXPECT_NE(render_report(named).find("AVG"), std::string::npos);
}

// Counts found by exhaustive search over test sets up to 1500 reviews; 186 is
// the smallest size whose displayed metrics match the MLP block exactly.
TEST(Report, TableOneMlpBlock) {
  std::vector<Polarity> preds, golds;
  build(66, 21, 19, 80, preds, golds);
  const auto r = evaluate_per_class(preds, golds);
  EXPECT_EQ(format_metric(r.of(N).precision), "0.78");
  EXPECT_EQ(format_metric(r.of(N).recall), "0.76");
  EXPECT_EQ(format_metric(r.of(N).f_measure), "0.77");
  EXPECT_EQ(format_metric(r.of(P).precision), "0.79");
  EXPECT_EQ(format_metric(r.of(P).recall), "0.81");
  EXPECT_EQ(format_metric(r.of(P).f_measure), "0.80");
  const std::vector<NamedReport> named{{"MLP", r}};
  const std::string table = render_report(named);
  EXPECT_EQ(table,
            "MLP\n"
            "           Precision  Recall   F-measure  Accuracy(%)\n"
            "Negative   0.78       0.76     0.77\n"
            "Positive   0.79       0.81     0.80\n"
            "AVG        0.78       0.78     0.78       78.49\n");
}

TEST(Report, BlocksInInputOrder) {
  std::vector<Polarity> preds, golds;
  build(3, 1, 1, 3, preds, golds);
  const auto r = evaluate_per_class(preds, golds);
  const std::vector<NamedReport> named{{"MLP", r}, {"MLP-Autoencoder", r}, {"1D-CNN", r}};
  const std::string table = render_report(named);
  const auto a = table.find("MLP\n"), b = table.find("MLP-Autoencoder\n"), c = table.find("1D-CNN\n");
  ASSERT_NE(c, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
}

TEST(Report, JsonSchema) {
  std::vector<Polarity> preds, golds;
  build(66, 21, 19, 80, preds, golds);
  const std::vector<NamedReport> named{{"MLP", evaluate_per_class(preds, golds)}};
  const auto j = nlohmann::json::parse(render_report_json(named));
  EXPECT_EQ(j.at("schema"), "report/1");
  const auto& m = j.at("models").at(0);
  EXPECT_EQ(m.at("name"), "MLP");
  EXPECT_EQ(m.at("examples"), 186);
  EXPECT_EQ(m.at("accuracy").get<double>(), 146.0 / 186.0);
  EXPECT_EQ(m.at("classes").at("negative").at("confusion").at("tp"), 66);
  EXPECT_EQ(m.at("classes").at("negative").at("confusion").at("fn"), 21);
  EXPECT_EQ(m.at("classes").at("positive").at("confusion").at("tp"), 80);
  EXPECT_EQ(m.at("classes").at("negative").at("precision").get<double>(), 66.0 / 85.0);
  EXPECT_TRUE(m.at("macro").contains("f_measure"));
}

}  // namespace
}  // namespace psa
