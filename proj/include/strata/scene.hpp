#pragma once

// Resolution-aware render description of a window of render rows, and its
// SVG and JSON serializations.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "strata/layout.hpp"

namespace strata {

inline constexpr int kSceneFormatVersion = 1;

struct Primitive {
  enum class Kind { rect, line, circle, text, path, dash };
  Kind kind = Kind::rect;
  std::string role;  // e.g. "bar", "box", "median", "whisker", "outlier", "label"
  double x = 0.0;    // rect/text origin, line start, circle center
  double y = 0.0;
  double w = 0.0;    // rect
  double h = 0.0;
  double x2 = 0.0;   // line and dash end
  double y2 = 0.0;
  double r = 0.0;    // circle
  std::string d;     // path data
  std::string text;
  std::string anchor = "start";  // text: start|middle|end
  std::string fill;
  std::string stroke;
  double opacity = 1.0;
  double value = kMissing;  // normalized value the mark encodes, when one
};

std::string_view to_string(Primitive::Kind k);

struct SceneCell {
  std::string column;                  // leaf column id
  std::optional<EncodingKind> encoding;  // none on header rows
  RenderDirective directive = RenderDirective::full;
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
  bool missing = false;
  bool out_of_range = false;
  std::vector<Primitive> primitives;  // z-order
};

struct SceneRow {
  RenderRow::Kind kind = RenderRow::Kind::item;
  std::size_t index = 0;  // position in the traversal
  RowId row = 0;          // item rows
  std::string group_id;   // header and group rows
  std::string label;      // header and group rows
  std::size_t count = 0;  // group members
  std::size_t depth = 0;
  bool selected = false;
  double y = 0.0, h = 0.0;
  std::vector<SceneCell> cells;
};

struct SceneColumn {
  std::string id;
  std::string label;
  CellKind kind = CellKind::numerical;
  double x = 0.0, w = 0.0;
};

struct Scene {
  std::uint64_t version = 0;
  RowRange window;
  std::size_t total_rows = 0;
  double total_height = 0.0;
  double width = 0.0;
  bool fits = true;
  LayoutMode mode = LayoutMode::detail;
  std::vector<SceneColumn> columns;
  std::vector<SceneRow> rows;

  std::size_t cell_count() const;
  std::size_t primitive_count() const;
};

struct SceneOptions {
  CompactThresholds compact;
  double padding = 2.0;         // vertical inset at full resolution
  double char_width = 7.0;      // average glyph width for truncation
  std::size_t example_limit = 3;
};

// Fixed categorical palette, cycled by color index.
std::span<const std::string_view> palette();

// Builds cells for rows[window.first, window.end). Throws SceneError when the
// window exceeds the row list or an override is illegal for its cell.
Scene build_scene(const Table& table, std::span<const RenderRow> rows, const Layout& layout,
                  RowRange window, const SceneOptions& options = {});

struct Theme {
  std::string font_family = "sans-serif";
  double font_size = 11.0;
  std::string background = "#ffffff";
  std::string header_fill = "#f4f4f4";
  double header_height = 24.0;  // column label band above the body
};

// Standalone SVG 1.1 document: one <g class="row"> per scene row and one
// <g class="cell"> per cell. Deterministic for equal inputs.
std::string render_svg(const Scene& scene, const Theme& theme = {});

nlohmann::json scene_to_json(const Scene& scene);

}  // namespace strata
