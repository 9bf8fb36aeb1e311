#pragma once

// Row geometry for detail and overview modes.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "strata/table.hpp"

namespace strata {

struct LayoutParams {
  double detail_row_h = 20.0;
  double aggregate_row_h = 40.0;
  double header_row_h = 20.0;
  double min_item_h = 1.0;
  double selected_overview_h = 20.0;
  double viewport_h = 600.0;

  // Throws ValidationError for non-positive heights or min_item_h < 1.
  void validate() const;
};

struct RowBand {
  double y = 0.0;
  double h = 0.0;
};

struct Layout {
  std::vector<RowBand> rows;  // parallel to the render rows
  double total_height = 0.0;
  bool fits = true;
  double item_height = 0.0;  // height of unselected item rows
};

// `is_selected` reports whether an item row is expanded in overview mode.
Layout compute_layout(std::span<const RenderRow> rows, LayoutMode mode, const LayoutParams& params,
                      const std::function<bool(RowId)>& is_selected);

Layout compute_layout(const Table& table, std::span<const RenderRow> rows,
                      const LayoutParams& params);

// Half-open index range [first, end).
struct RowRange {
  std::size_t first = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - first; }
  bool operator==(const RowRange&) const = default;
};

// Rows intersecting the half-open pixel window [scroll_top, scroll_top +
// viewport_h), widened by `overscan` rows on each side.
RowRange visible_range(const Layout& layout, double scroll_top, double viewport_h,
                       std::size_t overscan);

}  // namespace strata
