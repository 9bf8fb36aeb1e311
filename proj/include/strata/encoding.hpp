#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "strata/dataset.hpp"

namespace strata {

// Every visual encoding the renderer knows. Which ones apply to a cell
// depends on the cell's kind and on whether the row (and, for matrices, the
// column group) is aggregated; see legal_encodings().
enum class EncodingKind {
  bar,
  dot,
  proportional_symbol,
  brightness,
  string,
  color_cell,
  category_matrix,
  heatmap,
  bars,
  sparkline,
  histogram,
  boxplot,
  stacked_bar,
  brightness_matrix,
  examples,
  dotplot,
  mean_heatmap,
  envelope_sparkline,
};

std::string_view to_string(EncodingKind k);
EncodingKind encoding_from_string(std::string_view name);

// What a leaf display column holds. Reducer and scripted columns behave as
// numerical columns.
enum class CellKind { numerical, categorical, text, matrix, stacked, interleaved, imposition };

std::string_view to_string(CellKind k);

struct EncodingContext {
  CellKind kind = CellKind::numerical;
  bool aggregated = false;         // group row
  bool columns_aggregated = false;  // matrix column group merged into one cell
};

// First entry is the default.
std::span<const EncodingKind> legal_encodings(const EncodingContext& ctx);
bool is_legal(const EncodingContext& ctx, EncodingKind kind);
EncodingKind default_encoding(const EncodingContext& ctx);
EncodingKind default_encoding(ColumnKind kind, bool aggregated);

enum class RenderDirective { full, compact, omit };

std::string_view to_string(RenderDirective d);

struct CompactThresholds {
  double full_min = 14.0;     // at or above: full detail with labels
  double compact_min = 4.0;   // at or above: compact; below: area encodings only
};

RenderDirective compact_variant(EncodingKind kind, double height,
                                const CompactThresholds& thresholds = {});

}  // namespace strata
