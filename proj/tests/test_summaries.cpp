#include <gtest/gtest.h>

#include <random>

#include "strata/error.hpp"
#include "strata/summaries.hpp"
#include "support/oracles.hpp"

using namespace strata;

TEST(BoxStats, FivePoints) {
  const double v[] = {1, 2, 3, 4, 5};
  const auto b = box_stats(v);
  EXPECT_EQ(b.min, 1);
  EXPECT_EQ(b.q1, 2);
  EXPECT_EQ(b.median, 3);
  EXPECT_EQ(b.q3, 4);
  EXPECT_EQ(b.max, 5);
  EXPECT_EQ(b.mean, 3);
  EXPECT_EQ(b.n, 5U);
  EXPECT_TRUE(b.outliers.empty());
}

TEST(BoxStats, Singleton) {
  const double v[] = {5, kMissing};
  const auto b = box_stats(v);
  for (double x : {b.min, b.whisker_lo, b.q1, b.median, b.q3, b.whisker_hi, b.max, b.mean}) {
    EXPECT_EQ(x, 5);
  }
  EXPECT_EQ(b.n, 1U);
}

TEST(BoxStats, OutliersBeyondFences) {
  const double v[] = {1, 2, 3, 4, 5, 100};
  const auto b = box_stats(v);
  ASSERT_EQ(b.outliers.size(), 1U);
  EXPECT_EQ(b.outliers[0], 100);
  EXPECT_EQ(b.whisker_hi, 5);
}

TEST(BoxStats, AllMissingThrows) {
  const double v[] = {kMissing, kMissing};
  EXPECT_THROW(box_stats(v), StatsError);
  EXPECT_THROW(stat_measure(v, Statistic::mean), StatsError);
  EXPECT_THROW(box_stats(std::span<const double>{}), StatsError);
}

TEST(BoxStats, MatchesOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(std::uniform_int_distribution<int>(1, 300)(rng));
    std::normal_distribution<double> d(0, 10);
    for (auto& x : v) x = std::uniform_int_distribution<int>(0, 9)(rng) == 0 ? kMissing : d(rng);
    if (std::all_of(v.begin(), v.end(), [](double x) { return std::isnan(x); })) v[0] = 1;
    const auto got = box_stats(v);
    const auto want = oracle::box(v);
    EXPECT_NEAR(got.q1, want.q1, 1e-9);
    EXPECT_NEAR(got.median, want.median, 1e-9);
    EXPECT_NEAR(got.q3, want.q3, 1e-9);
    EXPECT_NEAR(got.mean, want.mean, 1e-9);
    EXPECT_EQ(got.whisker_lo, want.whisker_lo);
    EXPECT_EQ(got.whisker_hi, want.whisker_hi);
    EXPECT_EQ(got.outliers, want.outliers);
    EXPECT_EQ(got.n, want.n);
    EXPECT_LE(got.min, got.whisker_lo);
    EXPECT_LE(got.whisker_lo, got.q1);
    EXPECT_LE(got.q3, got.whisker_hi);
    EXPECT_LE(got.whisker_hi, got.max);
  }
}

TEST(StatMeasure, Examples) {
  const double a[] = {1, 3, 2};
  EXPECT_EQ(stat_measure(a, Statistic::median), 2);
  const double b[] = {1, 2, 3, kMissing};
  EXPECT_EQ(stat_measure(b, Statistic::mean), 2);
  EXPECT_EQ(statistic_from_string("q3"), Statistic::q3);
  EXPECT_EQ(to_string(Statistic::median), "median");
}

TEST(StatMeasure, ConsistentWithBoxStats) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(std::uniform_int_distribution<int>(1, 50)(rng));
    for (auto& x : v) x = d(rng);
    const auto b = box_stats(v);
    for (int s = 0; s < 6; ++s) {
      EXPECT_EQ(stat_measure(v, static_cast<Statistic>(s)), b.get(static_cast<Statistic>(s)));
    }
  }
}

TEST(Histogram, EdgeRule) {
  const double v[] = {0, 0.5, 1.0};
  const auto h = histogram(v, Domain{0, 1}, 2);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(h.edges, (std::vector<double>{0, 0.5, 1}));
}

TEST(Histogram, MissingCounts) {
  const double v[] = {0.2, kMissing, kMissing};
  const auto h = histogram(v, Domain{0, 1}, 2);
  EXPECT_EQ(h.missing_count, 2U);
  EXPECT_EQ(h.counts[0] + h.counts[1], 1U);
}

TEST(Histogram, DefaultBinCount) {
  EXPECT_EQ(default_bin_count(1), 2U);
  EXPECT_EQ(default_bin_count(10), 4U);
  EXPECT_EQ(default_bin_count(16), 4U);
  EXPECT_EQ(default_bin_count(10000), 20U);
}

TEST(Histogram, MatchesScanOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const double lo = std::uniform_real_distribution<double>(-10, 0)(rng);
    const double hi = lo + std::uniform_real_distribution<double>(0.5, 20)(rng);
    std::uniform_real_distribution<double> d(lo - 1, hi + 1);
    std::vector<double> v(std::uniform_int_distribution<int>(1, 200)(rng));
    for (auto& x : v) x = std::uniform_int_distribution<int>(0, 9)(rng) == 0 ? kMissing : d(rng);
    v[0] = lo;
    const auto h = histogram(v, Domain{lo, hi});
    const auto want = oracle::histogram(v, lo, hi, oracle::default_bins(v.size() - h.missing_count));
    EXPECT_EQ(h.counts, want.counts);
    EXPECT_EQ(h.missing_count, want.missing);
  }
}

TEST(CategoryCounts, Examples) {
  const std::int32_t v[] = {0, 0, 1};
  const auto c = category_counts(v, 2);
  EXPECT_EQ(c.counts, (std::vector<std::size_t>{2, 1}));
  const auto e = category_counts({}, 3);
  EXPECT_EQ(e.counts, (std::vector<std::size_t>{0, 0, 0}));
  const std::int32_t m[] = {kMissingCategory, 2};
  const auto cm = category_counts(m, 3);
  EXPECT_EQ(cm.missing_count, 1U);
}

TEST(TextAggregate, Examples) {
  const std::vector<std::optional<std::string>> v = {"x", "y", "z"};
  auto t = text_aggregate(v, 2);
  EXPECT_EQ(t.examples, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(t.overflow, 1U);
  t = text_aggregate({}, 3);
  EXPECT_TRUE(t.examples.empty());
  EXPECT_EQ(t.overflow, 0U);
  t = text_aggregate(v, 10);
  EXPECT_EQ(t.examples.size(), 3U);
  EXPECT_EQ(t.overflow, 0U);
}

TEST(MatrixAggregate, Examples) {
  const double a[] = {1, 2, 3, 4};
  const auto c = matrix_aggregate(MatrixBlock{a, 1, 4}, MatrixDirection::columns);
  ASSERT_EQ(c.per_row.size(), 1U);
  EXPECT_EQ(c.per_row[0]->median, 2.5);

  const auto r = matrix_aggregate(MatrixBlock{a, 2, 2}, MatrixDirection::rows);
  ASSERT_EQ(r.per_column.size(), 2U);
  EXPECT_EQ(r.per_column[0]->mean, 2);
  EXPECT_EQ(r.per_column[1]->mean, 3);

  const double missing[] = {kMissing, kMissing};
  EXPECT_THROW(matrix_aggregate(MatrixBlock{missing, 1, 2}, MatrixDirection::both), StatsError);
}

TEST(MatrixAggregate, BothEqualsFlattened) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 6;
    std::vector<double> v(rows * cols);
    for (auto& x : v) x = d(rng) < 0.1 ? kMissing : d(rng);
    v[0] = 0.5;
    const auto agg = matrix_aggregate(MatrixBlock{v, rows, cols}, MatrixDirection::both);
    const auto want = oracle::box(v);
    ASSERT_TRUE(agg.overall);
    EXPECT_NEAR(agg.overall->median, want.median, 1e-12);
    EXPECT_EQ(agg.overall->n, want.n);
  }
}
