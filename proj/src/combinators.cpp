#include "strata/combinators.hpp"

#include <algorithm>

#include "strata/dataset.hpp"
#include "strata/error.hpp"

namespace strata {

std::string_view to_string(CombinedKind k) {
  switch (k) {
    case CombinedKind::nested: return "nested";
    case CombinedKind::stacked: return "stacked";
    case CombinedKind::interleaved: return "interleaved";
    case CombinedKind::imposition: return "imposition";
    case CombinedKind::reducer: return "reducer";
    case CombinedKind::scripted: return "scripted";
  }
  return "nested";
}

CombinedKind combined_kind_from_string(std::string_view name) {
  if (name == "nested") return CombinedKind::nested;
  if (name == "stacked") return CombinedKind::stacked;
  if (name == "interleaved") return CombinedKind::interleaved;
  if (name == "imposition") return CombinedKind::imposition;
  if (name == "reducer") return CombinedKind::reducer;
  if (name == "scripted") return CombinedKind::scripted;
  throw ValidationError("unknown combined column kind '" + std::string(name) + "'");
}

std::string_view to_string(Reducer r) {
  switch (r) {
    case Reducer::min: return "min";
    case Reducer::max: return "max";
    case Reducer::mean: return "mean";
  }
  return "max";
}

Reducer reducer_from_string(std::string_view name) {
  if (name == "min") return Reducer::min;
  if (name == "max") return Reducer::max;
  if (name == "mean") return Reducer::mean;
  throw ValidationError("unknown reducer '" + std::string(name) + "'");
}

std::vector<double> normalize_weights(std::span<const double> widths) {
  if (widths.empty()) throw StateError("weights need at least one width");
  double total = 0.0;
  for (double w : widths) {
    if (!(w > 0.0) || !std::isfinite(w)) throw StateError("column widths must be positive");
    total += w;
  }
  std::vector<double> out;
  out.reserve(widths.size());
  for (double w : widths) out.push_back(w / total);
  return out;
}

StackedValue eval_stacked(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) {
    throw StateError("stacked column has " + std::to_string(values.size()) + " values for " +
                     std::to_string(weights.size()) + " weights");
  }
  StackedValue out;
  out.segments.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    StackedSegment s;
    if (is_missing(values[i])) {
      s.missing = true;
    } else {
      s.contribution = weights[i] * values[i];
      out.score += s.contribution;
    }
    out.segments.push_back(s);
  }
  return out;
}

double stacked_score(std::span<const double> values, std::span<const double> weights) noexcept {
  double score = 0.0;
  const std::size_t n = std::min(values.size(), weights.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_missing(values[i])) score += weights[i] * values[i];
  }
  return score;
}

double eval_reducer(Reducer kind, std::span<const double> values) noexcept {
  double acc = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (is_missing(v)) continue;
    if (n == 0) {
      acc = v;
    } else if (kind == Reducer::min) {
      acc = std::min(acc, v);
    } else if (kind == Reducer::max) {
      acc = std::max(acc, v);
    } else {
      acc += v;
    }
    ++n;
  }
  if (n == 0) return kMissing;
  return kind == Reducer::mean ? acc / static_cast<double>(n) : acc;
}

}  // namespace strata
