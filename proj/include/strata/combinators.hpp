#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strata/expression.hpp"

namespace strata {

enum class CombinedKind { nested, stacked, interleaved, imposition, reducer, scripted };
enum class Reducer { min, max, mean };

std::string_view to_string(CombinedKind k);
CombinedKind combined_kind_from_string(std::string_view name);
std::string_view to_string(Reducer r);
Reducer reducer_from_string(std::string_view name);

// A column assembled from other columns. Children refer to dataset columns
// or to other combined columns by id.
struct CombinedColumn {
  std::string id;
  std::string label;
  CombinedKind kind = CombinedKind::nested;
  std::vector<std::string> children;
  std::vector<double> weights;       // stacked only, on the unit simplex
  std::vector<double> child_widths;  // stacked only; weights = normalize_weights(child_widths)
  Reducer reducer = Reducer::max;
  std::string script;           // scripted only
  Expression expression;        // parsed `script`

  // Stacked, reducer and scripted columns produce one number per row.
  bool has_scalar_value() const {
    return kind == CombinedKind::stacked || kind == CombinedKind::reducer ||
           kind == CombinedKind::scripted;
  }

  bool operator==(const CombinedColumn&) const = default;
};

// w_i = width_i / sum(widths). Throws StateError for a non-positive width or
// an empty input.
std::vector<double> normalize_weights(std::span<const double> widths);

struct StackedSegment {
  double contribution = 0.0;  // weight * value, 0 when missing
  bool missing = false;
};

struct StackedValue {
  double score = 0.0;
  std::vector<StackedSegment> segments;  // child order
};

// `values` are mapped to [0,1]; NaN marks a missing child. Throws StateError
// on a length mismatch.
StackedValue eval_stacked(std::span<const double> values, std::span<const double> weights);

// Score only, without allocating segments.
double stacked_score(std::span<const double> values, std::span<const double> weights) noexcept;

// Reduces non-missing children; NaN when all are missing.
double eval_reducer(Reducer kind, std::span<const double> values) noexcept;

}  // namespace strata
