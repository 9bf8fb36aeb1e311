#include "strata/layout.hpp"

#include <algorithm>
#include <cmath>

#include "strata/error.hpp"

namespace strata {

void LayoutParams::validate() const {
  for (double h : {detail_row_h, aggregate_row_h, header_row_h, selected_overview_h}) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("row heights must be positive");
  }
  if (!(min_item_h >= 1.0)) throw ValidationError("min_item_h must be at least 1 px");
  if (min_item_h > detail_row_h) throw ValidationError("min_item_h exceeds detail_row_h");
  if (!(viewport_h >= 0.0) || !std::isfinite(viewport_h)) {
    throw ValidationError("viewport height must be non-negative");
  }
}

Layout compute_layout(std::span<const RenderRow> rows, LayoutMode mode, const LayoutParams& p,
                      const std::function<bool(RowId)>& is_selected) {
  Layout out;
  out.rows.resize(rows.size());
  double item_h = p.detail_row_h;
  double selected_h = p.detail_row_h;

  if (mode == LayoutMode::overview) {
    double fixed = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      switch (r.kind) {
        case RenderRow::Kind::group: fixed += p.aggregate_row_h; break;
        case RenderRow::Kind::header: fixed += p.header_row_h; break;
        case RenderRow::Kind::item:
          if (is_selected && is_selected(r.row)) {
            fixed += p.selected_overview_h;
          } else {
            ++n;
          }
          break;
      }
    }
    selected_h = p.selected_overview_h;
    if (n > 0) {
      item_h = std::clamp(std::floor((p.viewport_h - fixed) / static_cast<double>(n)), p.min_item_h,
                          p.detail_row_h);
    }
  }
  out.item_height = item_h;

  double y = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double h = item_h;
    switch (rows[i].kind) {
      case RenderRow::Kind::group: h = p.aggregate_row_h; break;
      case RenderRow::Kind::header: h = p.header_row_h; break;
      case RenderRow::Kind::item:
        if (mode == LayoutMode::overview && is_selected && is_selected(rows[i].row)) h = selected_h;
        break;
    }
    out.rows[i] = RowBand{y, h};
    y += h;
  }
  out.total_height = y;
  out.fits = y <= p.viewport_h;
  return out;
}

Layout compute_layout(const Table& table, std::span<const RenderRow> rows, const LayoutParams& params) {
  return compute_layout(rows, table.state().mode, params,
                        [&](RowId row) { return table.is_selected(row); });
}

RowRange visible_range(const Layout& layout, double scroll_top, double viewport_h,
                       std::size_t overscan) {
  const auto& rows = layout.rows;
  if (rows.empty() || !(viewport_h > 0.0)) return {};
  const double bottom = scroll_top + viewport_h;
  // First row whose band ends after scroll_top.
  auto first = std::partition_point(rows.begin(), rows.end(),
                                    [&](const RowBand& b) { return b.y + b.h <= scroll_top; });
  // First row starting at or after the window bottom.
  auto last = std::partition_point(first, rows.end(), [&](const RowBand& b) { return b.y < bottom; });
  std::size_t f = static_cast<std::size_t>(first - rows.begin());
  std::size_t e = static_cast<std::size_t>(last - rows.begin());
  f = f > overscan ? f - overscan : 0;
  e = std::min(rows.size(), e + overscan);
  if (f > e) f = e;
  return {f, e};
}

}  // namespace strata
