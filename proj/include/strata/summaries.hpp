#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strata/dataset.hpp"

namespace strata {

// Statistics used for matrix sorting and group sorting.
enum class Statistic { min, max, q1, median, q3, mean };

std::string_view to_string(Statistic s);
Statistic statistic_from_string(std::string_view name);

// Five-number summary with Tukey whiskers. Quantiles interpolate linearly on
// the sorted sample at position p*(n-1).
struct BoxStats {
  double min = 0.0;
  double whisker_lo = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_hi = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::size_t n = 0;
  std::vector<double> outliers;  // ascending

  double get(Statistic s) const;
};

struct Histogram {
  std::vector<double> edges;  // bin_count + 1 ascending edges
  std::vector<std::size_t> counts;
  std::size_t missing_count = 0;

  std::size_t bin_count() const { return counts.size(); }
};

struct CategoryCounts {
  std::vector<std::size_t> counts;  // in category order
  std::size_t missing_count = 0;
};

struct TextSample {
  std::vector<std::string> examples;
  std::size_t overflow = 0;
};

// Quantile of an ascending, missing-free sample.
double sorted_quantile(std::span<const double> sorted, double p);

// Throw StatsError when no value is present. NaN marks missing.
BoxStats box_stats(std::span<const double> values);
double stat_measure(std::span<const double> values, Statistic measure);

std::size_t default_bin_count(std::size_t non_missing);

// Equal-width bins over `domain`; the last bin is right-closed and values
// outside the domain fall into the nearest end bin. Without an explicit bin
// count the default rule clamp(ceil(sqrt(n)), 2, 20) applies.
Histogram histogram(std::span<const double> values, Domain domain,
                    std::optional<std::size_t> bin_count = std::nullopt);

CategoryCounts category_counts(std::span<const std::int32_t> values, std::size_t category_count);

TextSample text_aggregate(std::span<const std::optional<std::string>> values, std::size_t limit);

enum class MatrixDirection { rows, columns, both };

std::string_view to_string(MatrixDirection d);

// A row-major block of `rows` x `cols` numbers, NaN for missing.
struct MatrixBlock {
  std::span<const double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<const double> row(std::size_t r) const { return values.subspan(r * cols, cols); }
};

// Shape of the result depends on the direction:
//   columns: one entry per block row, summarizing that row's entries
//   rows:    one entry per block column, summarizing that column's entries
//   both:    a single summary of every entry in `overall`
// Entries with no values are empty optionals.
struct MatrixAggregate {
  MatrixDirection direction = MatrixDirection::both;
  std::vector<std::optional<BoxStats>> per_row;
  std::vector<std::optional<BoxStats>> per_column;
  std::optional<BoxStats> overall;
};

// Throws StatsError for an empty or all-missing block.
MatrixAggregate matrix_aggregate(const MatrixBlock& block, MatrixDirection direction);

}  // namespace strata
