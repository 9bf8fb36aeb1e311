#include "strata/summaries.hpp"

#include <algorithm>
#include <cmath>

#include "strata/error.hpp"

namespace strata {

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::min: return "min";
    case Statistic::max: return "max";
    case Statistic::q1: return "q1";
    case Statistic::median: return "median";
    case Statistic::q3: return "q3";
    case Statistic::mean: return "mean";
  }
  return "median";
}

Statistic statistic_from_string(std::string_view name) {
  if (name == "min") return Statistic::min;
  if (name == "max") return Statistic::max;
  if (name == "q1") return Statistic::q1;
  if (name == "median") return Statistic::median;
  if (name == "q3") return Statistic::q3;
  if (name == "mean") return Statistic::mean;
  throw ValidationError("unknown statistic '" + std::string(name) + "'");
}

std::string_view to_string(MatrixDirection d) {
  switch (d) {
    case MatrixDirection::rows: return "rows";
    case MatrixDirection::columns: return "columns";
    case MatrixDirection::both: return "both";
  }
  return "both";
}

double BoxStats::get(Statistic s) const {
  switch (s) {
    case Statistic::min: return min;
    case Statistic::max: return max;
    case Statistic::q1: return q1;
    case Statistic::median: return median;
    case Statistic::q3: return q3;
    case Statistic::mean: return mean;
  }
  return median;
}

double sorted_quantile(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

std::vector<double> present_sorted(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    if (!is_missing(v)) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BoxStats box_stats_sorted(const std::vector<double>& s) {
  BoxStats b;
  b.n = s.size();
  b.min = s.front();
  b.max = s.back();
  b.q1 = sorted_quantile(s, 0.25);
  b.median = sorted_quantile(s, 0.5);
  b.q3 = sorted_quantile(s, 0.75);
  double sum = 0.0;
  for (double v : s) sum += v;
  b.mean = sum / static_cast<double>(s.size());
  // Rounding can push the mean a hair outside [min, max] for constant input.
  b.mean = std::clamp(b.mean, b.min, b.max);

  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  const auto first_in = std::lower_bound(s.begin(), s.end(), lo_fence);
  const auto last_in = std::upper_bound(s.begin(), s.end(), hi_fence);
  // Both quartiles lie inside the fences, so the range is never empty and
  // the whiskers bracket the box.
  b.whisker_lo = std::min(*first_in, b.q1);
  b.whisker_hi = std::max(*(last_in - 1), b.q3);
  b.outliers.assign(s.begin(), first_in);
  b.outliers.insert(b.outliers.end(), last_in, s.end());
  return b;
}

}  // namespace

BoxStats box_stats(std::span<const double> values) {
  const auto s = present_sorted(values);
  if (s.empty()) throw StatsError("box statistics need at least one non-missing value");
  return box_stats_sorted(s);
}

double stat_measure(std::span<const double> values, Statistic measure) {
  return box_stats(values).get(measure);
}

std::size_t default_bin_count(std::size_t non_missing) {
  const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(non_missing))));
  return std::clamp<std::size_t>(root, 2, 20);
}

Histogram histogram(std::span<const double> values, Domain domain,
                    std::optional<std::size_t> bin_count) {
  std::size_t present = 0;
  for (double v : values) present += is_missing(v) ? 0 : 1;
  if (present == 0) throw StatsError("histogram needs at least one non-missing value");
  if (!(domain.min < domain.max)) throw StatsError("histogram domain requires min < max");
  const std::size_t k = bin_count.value_or(default_bin_count(present));
  if (k == 0) throw StatsError("histogram needs at least one bin");

  Histogram h;
  h.edges.resize(k + 1);
  const double step = (domain.max - domain.min) / static_cast<double>(k);
  for (std::size_t i = 0; i <= k; ++i) h.edges[i] = domain.min + step * static_cast<double>(i);
  h.edges[k] = domain.max;
  h.counts.assign(k, 0);
  // Interior edges decide membership: bin i holds edges[i] <= v < edges[i+1].
  const auto interior_begin = h.edges.begin() + 1;
  const auto interior_end = h.edges.end() - 1;
  for (double v : values) {
    if (is_missing(v)) {
      ++h.missing_count;
      continue;
    }
    const auto it = std::upper_bound(interior_begin, interior_end, v);
    ++h.counts[static_cast<std::size_t>(it - interior_begin)];
  }
  return h;
}

CategoryCounts category_counts(std::span<const std::int32_t> values, std::size_t category_count) {
  CategoryCounts c;
  c.counts.assign(category_count, 0);
  for (auto v : values) {
    if (v == kMissingCategory || v < 0 || static_cast<std::size_t>(v) >= category_count) {
      ++c.missing_count;
    } else {
      ++c.counts[static_cast<std::size_t>(v)];
    }
  }
  return c;
}

TextSample text_aggregate(std::span<const std::optional<std::string>> values, std::size_t limit) {
  TextSample t;
  for (const auto& v : values) {
    if (t.examples.size() < limit) {
      t.examples.push_back(v.value_or(std::string{}));
    } else {
      ++t.overflow;
    }
  }
  return t;
}

MatrixAggregate matrix_aggregate(const MatrixBlock& block, MatrixDirection direction) {
  if (block.rows == 0 || block.cols == 0) throw StatsError("matrix aggregation of an empty block");
  if (block.values.size() != block.rows * block.cols) {
    throw StatsError("matrix block size does not match its shape");
  }
  if (std::all_of(block.values.begin(), block.values.end(), [](double v) { return is_missing(v); })) {
    throw StatsError("matrix aggregation of an all-missing block");
  }
  auto optional_stats = [](std::span<const double> v) -> std::optional<BoxStats> {
    auto s = present_sorted(v);
    if (s.empty()) return std::nullopt;
    return box_stats_sorted(s);
  };

  MatrixAggregate out;
  out.direction = direction;
  switch (direction) {
    case MatrixDirection::columns:
      out.per_row.reserve(block.rows);
      for (std::size_t r = 0; r < block.rows; ++r) out.per_row.push_back(optional_stats(block.row(r)));
      break;
    case MatrixDirection::rows: {
      std::vector<double> column(block.rows);
      out.per_column.reserve(block.cols);
      for (std::size_t c = 0; c < block.cols; ++c) {
        for (std::size_t r = 0; r < block.rows; ++r) column[r] = block.values[r * block.cols + c];
        out.per_column.push_back(optional_stats(column));
      }
      break;
    }
    case MatrixDirection::both:
      out.overall = optional_stats(block.values);
      break;
  }
  return out;
}

}  // namespace strata
