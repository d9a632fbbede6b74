#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "molrel/metrics/metrics.hpp"
#include "support/metric_oracles.hpp"

namespace molrel::metrics {
namespace {

std::vector<PredictionRecord> records(const std::vector<double>& p, const std::vector<int>& y) {
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back({p[i], y[i], 0});
  return out;
}

std::vector<PredictionRecord> random_records(std::mt19937_64& rng, std::size_t n, bool quantize) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PredictionRecord> out(n);
  for (auto& r : out) {
    r.probability = quantize ? std::round(u(rng) * 8.0) / 8.0 : u(rng);
    r.label = u(rng) < 0.4 ? 1 : 0;
  }
  return out;
}

TEST(Ece, Examples) {
  EXPECT_EQ(ece(records({1.0, 1.0, 1.0}, {1, 1, 1})).ece, 0.0);
  const auto r = ece(records({0.9, 0.9, 0.9, 0.9}, {1, 0, 1, 0}));
  EXPECT_NEAR(r.ece, 0.4, 1e-15);
  EXPECT_EQ(r.bins[8].count, 4u);
}

TEST(Ece, BinCountsSumToTotalAndBoundaries) {
  std::mt19937_64 rng(1);
  const auto recs = random_records(rng, 500, false);
  const auto r = ece(recs);
  std::size_t sum = 0;
  for (const auto& b : r.bins) sum += b.count;
  EXPECT_EQ(sum, recs.size());
  EXPECT_GE(r.ece, 0.0);
  EXPECT_LE(r.ece, 1.0);
  EXPECT_EQ(bin_index(0.5, 0.5, 1.0, 10), 0u);
  EXPECT_EQ(bin_index(1.0, 0.5, 1.0, 10), 9u);
  EXPECT_EQ(bin_index(0.55, 0.5, 1.0, 10), 1u);
  EXPECT_EQ(bin_index(0.95, 0.0, 1.0, 20), 19u);
  EXPECT_EQ(bin_index(0.5, 0.0, 1.0, 20), 10u);
}

TEST(Ece, MatchesDirectOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto recs = random_records(rng, 1 + rng() % 64, trial % 2 == 0);
    ASSERT_NEAR(ece(recs).ece, testing::direct_ece(recs), 1e-12) << trial;
  }
}

TEST(Ece, PermutationInvariant) {
  std::mt19937_64 rng(3);
  auto recs = random_records(rng, 300, false);
  const double base = ece(recs).ece;
  for (int k = 0; k < 10; ++k) {
    std::shuffle(recs.begin(), recs.end(), rng);
    EXPECT_NEAR(ece(recs).ece, base, 1e-15);
  }
}

TEST(Ece, CalibratedSyntheticDataConverges) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PredictionRecord> recs(100000);
  for (auto& r : recs) {
    r.probability = u(rng);
    r.label = u(rng) < r.probability ? 1 : 0;
  }
  EXPECT_LT(ece(recs).ece, 0.01);
}

TEST(Ece, RejectsEmptyAndInvalid) {
  EXPECT_THROW(ece({}), ConfigError);
  EXPECT_THROW(ece(records({1.5}, {1})), ConfigError);
  EXPECT_THROW(ece(records({0.5}, {2})), ConfigError);
}

TEST(Auroc, Examples) {
  EXPECT_EQ(auroc(records({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1})), 1.0);
  EXPECT_EQ(auroc(records({0.4, 0.4, 0.4, 0.4}, {0, 1, 0, 1})), 0.5);
  EXPECT_EQ(auroc(records({0.1, 0.35, 0.4, 0.8}, {0, 1, 0, 1})), 0.75);
}

TEST(Auroc, SingleClassIsUndefined) {
  EXPECT_THROW(auroc(records({0.1, 0.2}, {1, 1})), UndefinedMetric);
  EXPECT_THROW(auroc(records({0.1, 0.2}, {0, 0})), UndefinedMetric);
}

TEST(Auroc, MatchesBruteForcePairs) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto recs = random_records(rng, 2 + rng() % 63, trial % 2 == 0);
    recs[0].label = 0;
    recs[1].label = 1;
    ASSERT_NEAR(auroc(recs), testing::brute_force_auroc(recs), 1e-12) << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(Auroc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(6);
  auto recs = random_records(rng, 64, true);
  recs[0].label = 0;
  recs[1].label = 1;
  const double base = auroc(recs);
  for (auto& r : recs) r.probability = std::pow(r.probability, 3.0) / 2.0 + 0.1;
  EXPECT_DOUBLE_EQ(auroc(recs), base);
}

TEST(Classification, Examples) {
  const auto all = classification_metrics(records({0.9, 0.1, 0.7}, {1, 0, 1}));
  EXPECT_EQ(all.accuracy, 1.0);
  EXPECT_EQ(all.f1, 1.0);
  const auto none = classification_metrics(records({0.1, 0.2, 0.3}, {1, 0, 1}));
  EXPECT_TRUE(none.precision_undefined);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  // TP=2, FP=1, FN=1, TN=1.
  const auto m = classification_metrics(records({0.9, 0.8, 0.6, 0.2, 0.1}, {1, 1, 0, 1, 0}));
  EXPECT_EQ(m.tp, 2u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.fn, 1u);
  EXPECT_NEAR(m.precision, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.recall, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.accuracy, 0.6, 1e-15);
}

TEST(Confusion, Examples) {
  const auto h = confusion_histogram(records({0.99}, {1}));
  ASSERT_EQ(h.bins.size(), 20u);
  EXPECT_EQ(h.bins[19].tp, 1u);
  const auto t = h.totals();
  EXPECT_EQ(t.tp + t.fp + t.tn + t.fn, 1u);
  const auto half = confusion_histogram(records({0.5}, {0}));
  EXPECT_EQ(half.bins[10].fp, 1u);  // ȳ = 0.5 is a positive prediction in [0.5, 0.55)
  EXPECT_EQ(confusion_histogram(records({1.0}, {0})).bins[19].fp, 1u);
}

TEST(Confusion, TotalsReconcileWithClassificationMetrics) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto recs = random_records(rng, 1 + rng() % 200, trial % 2 == 0);
    const auto t = confusion_histogram(recs).totals();
    const auto c = classification_metrics(recs);
    EXPECT_EQ(t.tp, c.tp);
    EXPECT_EQ(t.fp, c.fp);
    EXPECT_EQ(t.tn, c.tn);
    EXPECT_EQ(t.fn, c.fn);
  }
}

TEST(Screening, Examples) {
  const std::vector<double> mid(10, 0.5);
  const auto a = screening_summary(mid);
  EXPECT_EQ(a.below, 0u);
  EXPECT_EQ(a.above, 0u);
  EXPECT_EQ(a.total, 10u);
  const auto b = screening_summary(std::vector<double>{0.01, 0.99, 0.5});
  EXPECT_EQ(b.below, 1u);
  EXPECT_EQ(b.above, 1u);
  EXPECT_NEAR(b.extreme_fraction(), 2.0 / 3.0, 1e-15);
  std::size_t sum = 0;
  for (auto c : b.histogram) sum += c;
  EXPECT_EQ(sum, 3u);
  // Thresholds are strict.
  const auto c = screening_summary(std::vector<double>{0.05, 0.95});
  EXPECT_EQ(c.below + c.above, 0u);
  EXPECT_THROW(screening_summary(std::vector<double>{1.1}), ConfigError);
}

TEST(Evaluate, MacroAverageOverTasks) {
  std::vector<PredictionRecord> recs{{0.9, 1, 0}, {0.1, 0, 0}, {0.8, 0, 1}, {0.3, 1, 1}, {0.6, 1, 2}};
  const auto m = evaluate(recs, 3);
  EXPECT_EQ(m.tasks, 3u);
  ASSERT_TRUE(m.auroc.has_value());
  EXPECT_EQ(m.auroc_tasks, 2u);
  EXPECT_NEAR(*m.auroc, (1.0 + 0.0) / 2.0, 1e-15);
  ASSERT_EQ(m.undefined_auroc_tasks.size(), 1u);
  EXPECT_EQ(m.undefined_auroc_tasks[0], 2u);
  EXPECT_NEAR(m.accuracy, (1.0 + 0.0 + 1.0) / 3.0, 1e-15);
  const std::vector<PredictionRecord> one{{0.7, 1, 0}};
  EXPECT_FALSE(evaluate(one, 1).auroc.has_value());
}

TEST(Evaluate, MakeRecordsSkipsMissing) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  const std::vector<std::int8_t> y{1, -1, 0, 1};
  const auto r = make_records(p, y, 2);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[1].task, 0u);
  EXPECT_EQ(r[2].task, 1u);
  EXPECT_THROW(make_records(p, std::vector<std::int8_t>{1}, 2), ShapeError);
}

TEST(Summary, MeanAndStd) {
  const auto one = summarize(std::vector<double>{0.7});
  EXPECT_EQ(one.mean, 0.7);
  EXPECT_EQ(one.std, 0.0);
  const auto two = summarize(std::vector<double>{1.0, 3.0});
  EXPECT_EQ(two.mean, 2.0);
  EXPECT_EQ(two.std, 1.0);
}

TEST(Writers, CsvAndSvgShapes) {
  const auto h = confusion_histogram(records({0.99, 0.2, 0.5}, {1, 0, 1}));
  const std::string csv = confusion_csv(h);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "bin_low,bin_high,tp,fp,tn,fn");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
  EXPECT_NE(csv.find("\n0.95,1,1,0,0,0\n"), std::string::npos);
  const std::string svg = confusion_svg(h, "GIN MAP");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  const auto s = screening_summary(std::vector<double>{0.01, 0.99, 0.5});
  const std::string scsv = screening_csv(s);
  EXPECT_EQ(std::count(scsv.begin(), scsv.end(), '\n'), 21);
  EXPECT_NE(screening_svg(s, "library").find("stroke-dasharray"), std::string::npos);
  const auto j = to_json(ece(records({0.9, 0.9}, {1, 0})));
  EXPECT_EQ(j["bins"].size(), 10u);
}

}  // namespace
}  // namespace molrel::metrics
