#include "strata/encoding.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "strata/error.hpp"

namespace strata {

namespace {

struct Named {
  EncodingKind kind;
  std::string_view name;
};

constexpr std::array<Named, 18> kNames{{
    {EncodingKind::bar, "bar"},
    {EncodingKind::dot, "dot"},
    {EncodingKind::proportional_symbol, "proportional_symbol"},
    {EncodingKind::brightness, "brightness"},
    {EncodingKind::string, "string"},
    {EncodingKind::color_cell, "color_cell"},
    {EncodingKind::category_matrix, "category_matrix"},
    {EncodingKind::heatmap, "heatmap"},
    {EncodingKind::bars, "bars"},
    {EncodingKind::sparkline, "sparkline"},
    {EncodingKind::histogram, "histogram"},
    {EncodingKind::boxplot, "boxplot"},
    {EncodingKind::stacked_bar, "stacked_bar"},
    {EncodingKind::brightness_matrix, "brightness_matrix"},
    {EncodingKind::examples, "examples"},
    {EncodingKind::dotplot, "dotplot"},
    {EncodingKind::mean_heatmap, "mean_heatmap"},
    {EncodingKind::envelope_sparkline, "envelope_sparkline"},
}};

using E = EncodingKind;

constexpr E kNumericalItem[] = {E::bar, E::dot, E::proportional_symbol, E::brightness, E::string};
constexpr E kNumericalGroup[] = {E::histogram, E::boxplot};
constexpr E kCategoricalItem[] = {E::color_cell, E::category_matrix, E::string};
constexpr E kCategoricalGroup[] = {E::stacked_bar, E::histogram, E::brightness_matrix};
constexpr E kTextItem[] = {E::string};
constexpr E kTextGroup[] = {E::examples};
constexpr E kMatrixItem[] = {E::heatmap, E::bars, E::sparkline};
constexpr E kMatrixMerged[] = {E::boxplot, E::histogram, E::dotplot};
constexpr E kMatrixRowGroup[] = {E::mean_heatmap, E::envelope_sparkline};
constexpr E kStackedItem[] = {E::stacked_bar};
constexpr E kStackedGroup[] = {E::boxplot, E::histogram};
constexpr E kInterleavedItem[] = {E::bar, E::dot};
constexpr E kInterleavedGroup[] = {E::boxplot};
constexpr E kImpositionItem[] = {E::bar, E::dot, E::proportional_symbol};

}  // namespace

std::string_view to_string(EncodingKind k) {
  for (const auto& n : kNames) {
    if (n.kind == k) return n.name;
  }
  return "bar";
}

EncodingKind encoding_from_string(std::string_view name) {
  for (const auto& n : kNames) {
    if (n.name == name) return n.kind;
  }
  throw ValidationError("unknown encoding '" + std::string(name) + "'");
}

std::string_view to_string(CellKind k) {
  switch (k) {
    case CellKind::numerical: return "numerical";
    case CellKind::categorical: return "categorical";
    case CellKind::text: return "text";
    case CellKind::matrix: return "matrix";
    case CellKind::stacked: return "stacked";
    case CellKind::interleaved: return "interleaved";
    case CellKind::imposition: return "imposition";
  }
  return "numerical";
}

std::string_view to_string(RenderDirective d) {
  switch (d) {
    case RenderDirective::full: return "full";
    case RenderDirective::compact: return "compact";
    case RenderDirective::omit: return "omit";
  }
  return "full";
}

std::span<const EncodingKind> legal_encodings(const EncodingContext& ctx) {
  switch (ctx.kind) {
    case CellKind::numerical:
      return ctx.aggregated ? std::span<const E>(kNumericalGroup) : std::span<const E>(kNumericalItem);
    case CellKind::categorical:
      return ctx.aggregated ? std::span<const E>(kCategoricalGroup)
                            : std::span<const E>(kCategoricalItem);
    case CellKind::text:
      return ctx.aggregated ? std::span<const E>(kTextGroup) : std::span<const E>(kTextItem);
    case CellKind::matrix:
      if (ctx.columns_aggregated) return kMatrixMerged;
      return ctx.aggregated ? std::span<const E>(kMatrixRowGroup) : std::span<const E>(kMatrixItem);
    case CellKind::stacked:
      return ctx.aggregated ? std::span<const E>(kStackedGroup) : std::span<const E>(kStackedItem);
    case CellKind::interleaved:
      return ctx.aggregated ? std::span<const E>(kInterleavedGroup)
                            : std::span<const E>(kInterleavedItem);
    case CellKind::imposition:
      return ctx.aggregated ? std::span<const E>(kNumericalGroup)
                            : std::span<const E>(kImpositionItem);
  }
  return kNumericalItem;
}

bool is_legal(const EncodingContext& ctx, EncodingKind kind) {
  const auto legal = legal_encodings(ctx);
  return std::find(legal.begin(), legal.end(), kind) != legal.end();
}

EncodingKind default_encoding(const EncodingContext& ctx) {
  // Categorical groups default to the stacked bar; numerical groups to the
  // histogram. Both are the first legal entry.
  return legal_encodings(ctx).front();
}

EncodingKind default_encoding(ColumnKind kind, bool aggregated) {
  EncodingContext ctx;
  ctx.aggregated = aggregated;
  switch (kind) {
    case ColumnKind::numerical: ctx.kind = CellKind::numerical; break;
    case ColumnKind::categorical: ctx.kind = CellKind::categorical; break;
    case ColumnKind::text: ctx.kind = CellKind::text; break;
    case ColumnKind::matrix:
      ctx.kind = CellKind::matrix;
      // An aggregated matrix row summarizes every entry: both directions.
      ctx.columns_aggregated = aggregated;
      break;
  }
  return default_encoding(ctx);
}

RenderDirective compact_variant(EncodingKind kind, double height,
                                const CompactThresholds& thresholds) {
  if (height >= thresholds.full_min) return RenderDirective::full;
  if (height >= thresholds.compact_min) return RenderDirective::compact;
  switch (kind) {
    case EncodingKind::string:
    case EncodingKind::proportional_symbol:
    case EncodingKind::dot:
    case EncodingKind::dotplot:
    case EncodingKind::examples:
      return RenderDirective::omit;
    default:
      return RenderDirective::compact;
  }
}

}  // namespace strata
