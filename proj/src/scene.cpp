#include "strata/scene.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "strata/error.hpp"

namespace strata {

namespace {

constexpr std::array<std::string_view, 10> kPalette{
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};

constexpr std::string_view kMarkColor = "#4e79a7";
constexpr std::string_view kNeutral = "#c7c7c7";
constexpr std::string_view kDashColor = "#999999";
constexpr std::string_view kTextColor = "#333333";

std::string color_at(std::size_t index) { return std::string(kPalette[index % kPalette.size()]); }

// Light-to-dark ramp for brightness encodings.
std::string brightness_color(double u) {
  const double t = std::clamp(u, 0.0, 1.0);
  auto channel = [&](int lo, int hi) {
    return static_cast<int>(std::lround(lo + (hi - lo) * t));
  };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", channel(0xf7, 0x08), channel(0xfb, 0x30),
                channel(0xff, 0x6b));
  return buf;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Cuts at a UTF-8 code point boundary so the label fits `max_chars` glyphs.
std::string truncate(const std::string& s, double width, double char_width) {
  const auto max_chars = static_cast<std::size_t>(std::max(0.0, std::floor(width / char_width)));
  std::size_t glyphs = 0;
  std::size_t cut = s.size();
  std::size_t i = 0;
  while (i < s.size()) {
    if (glyphs == max_chars) {
      cut = i;
      break;
    }
    const auto c = static_cast<unsigned char>(s[i]);
    i += c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : 4;
    ++glyphs;
  }
  if (cut >= s.size()) return s;
  if (max_chars == 0) return {};
  // Leave room for the ellipsis.
  std::size_t back = cut;
  do {
    --back;
  } while (back > 0 && (static_cast<unsigned char>(s[back]) & 0xc0) == 0x80);
  return s.substr(0, back) + "\xe2\x80\xa6";
}

MappedValue safe_map(const MappingSpec& spec, double raw) {
  try {
    return apply_mapping(spec, raw);
  } catch (const DomainError&) {
    return {MappedValue::Status::out_of_range, 0.0};
  }
}

Primitive rect(std::string role, double x, double y, double w, double h, std::string fill,
               double value = kMissing) {
  Primitive p;
  p.kind = Primitive::Kind::rect;
  p.role = std::move(role);
  p.x = x;
  p.y = y;
  p.w = std::max(0.0, w);
  p.h = std::max(0.0, h);
  p.fill = std::move(fill);
  p.value = value;
  return p;
}

Primitive line(std::string role, double x1, double y1, double x2, double y2, std::string stroke) {
  Primitive p;
  p.kind = Primitive::Kind::line;
  p.role = std::move(role);
  p.x = x1;
  p.y = y1;
  p.x2 = x2;
  p.y2 = y2;
  p.stroke = std::move(stroke);
  return p;
}

Primitive circle(std::string role, double cx, double cy, double r, std::string fill,
                 double value = kMissing) {
  Primitive p;
  p.kind = Primitive::Kind::circle;
  p.role = std::move(role);
  p.x = cx;
  p.y = cy;
  p.r = std::max(0.0, r);
  p.fill = std::move(fill);
  p.value = value;
  return p;
}

Primitive text(std::string role, double x, double y, std::string content, std::string anchor = "start") {
  Primitive p;
  p.kind = Primitive::Kind::text;
  p.role = std::move(role);
  p.x = x;
  p.y = y;
  p.text = std::move(content);
  p.anchor = std::move(anchor);
  p.fill = std::string(kTextColor);
  return p;
}

Primitive path(std::string role, std::string d, std::string fill, std::string stroke) {
  Primitive p;
  p.kind = Primitive::Kind::path;
  p.role = std::move(role);
  p.d = std::move(d);
  p.fill = std::move(fill);
  p.stroke = std::move(stroke);
  return p;
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  std::string_view s(buf, static_cast<std::size_t>(ptr - buf));
  if (s == "-0.00") s = "0.00";
  out.append(s);
}

// The drawable area inside a cell.
struct Box {
  double x, y, w, h;
};

class Builder {
 public:
  Builder(const Table& table, const SceneOptions& options) : t_(table), opt_(options) {}

  SceneCell cell(const LeafColumn& leaf, const SceneColumn& col, const RenderRow& row,
                 const RowBand& band) {
    SceneCell c;
    c.column = leaf.id;
    c.x = col.x;
    c.w = col.w;
    c.y = band.y;
    c.h = band.h;
    if (row.kind == RenderRow::Kind::header) return c;
    const EncodingKind enc = t_.encoding_for(leaf, row);
    c.encoding = enc;
    c.directive = compact_variant(enc, band.h, opt_.compact);
    const double pad = c.directive == RenderDirective::full ? std::min(opt_.padding, band.h / 4) : 0.0;
    const Box box{c.x, c.y + pad, c.w, c.h - 2 * pad};
    if (row.kind == RenderRow::Kind::item) {
      item_cell(leaf, row.row, enc, box, c);
    } else {
      group_cell(leaf, t_.tree().nodes[row.node], enc, box, c);
    }
    if (c.directive == RenderDirective::omit && !c.missing) c.primitives.clear();
    return c;
  }

 private:
  // --- value access --------------------------------------------------------

  const std::vector<double>& column(const std::string& id) {
    auto it = cache_.find(id);
    if (it == cache_.end()) it = cache_.emplace(id, t_.scalar_values(id)).first;
    return it->second;
  }

  std::vector<double> member_values(const std::string& id, std::span<const RowId> members) {
    const auto& all = column(id);
    std::vector<double> out;
    out.reserve(members.size());
    for (RowId r : members) out.push_back(all[r]);
    return out;
  }

  const ColumnDef& def(const std::string& id) const { return t_.dataset().column(id); }

  static void dash(SceneCell& c) {
    c.missing = true;
    c.primitives.clear();
    Primitive p;
    p.kind = Primitive::Kind::dash;
    p.role = "missing";
    const double cy = c.y + c.h / 2;
    p.x = c.x + c.w * 0.4;
    p.x2 = c.x + c.w * 0.6;
    p.y = p.y2 = cy;
    p.stroke = std::string(kDashColor);
    c.primitives.push_back(std::move(p));
  }

  bool compact(const SceneCell& c) const { return c.directive != RenderDirective::full; }

  // --- item marks ----------------------------------------------------------

  void numeric_mark(EncodingKind enc, double u, double raw, const Box& b, SceneCell& c,
                    const std::string& color) {
    switch (enc) {
      case EncodingKind::bar:
        c.primitives.push_back(rect("bar", b.x, b.y, u * b.w, b.h, color, u));
        break;
      case EncodingKind::dot:
        c.primitives.push_back(circle("dot", b.x + u * b.w, b.y + b.h / 2,
                                      std::min(3.0, b.h / 2), color, u));
        break;
      case EncodingKind::proportional_symbol: {
        const double rmax = std::max(0.0, std::min(b.w, b.h) / 2);
        c.primitives.push_back(circle("symbol", b.x + b.w / 2, b.y + b.h / 2, rmax * std::sqrt(u),
                                      color, u));
        break;
      }
      case EncodingKind::brightness:
        c.primitives.push_back(rect("brightness", b.x, b.y, b.w, b.h, brightness_color(u), u));
        break;
      case EncodingKind::string: {
        auto p = text("label", b.x + b.w - 2, b.y + b.h / 2,
                      truncate(format_value(raw), b.w - 4, opt_.char_width), "end");
        p.value = u;
        c.primitives.push_back(std::move(p));
        break;
      }
      default:
        break;
    }
  }

  void scalar_item(const std::string& id, RowId row, EncodingKind enc, const Box& b, SceneCell& c,
                   const std::string& color) {
    const double raw = t_.scalar_value(id, row);
    if (is_missing(raw)) return dash(c);
    const MappedValue m = safe_map(t_.mapping(id), raw);
    c.out_of_range = m.status == MappedValue::Status::out_of_range;
    numeric_mark(enc, m.unit, raw, b, c, color);
  }

  void item_cell(const LeafColumn& leaf, RowId row, EncodingKind enc, const Box& b, SceneCell& c) {
    switch (leaf.kind) {
      case CellKind::numerical:
        return scalar_item(leaf.source, row, enc, b, c, std::string(kMarkColor));
      case CellKind::categorical: {
        const auto& d = def(leaf.source);
        const std::size_t ci = t_.dataset().column_index(leaf.source);
        const auto v = t_.dataset().categories(ci)[row];
        if (v == kMissingCategory) return dash(c);
        const auto k = static_cast<std::size_t>(v);
        const std::string color = color_at(static_cast<std::size_t>(d.color_indices[k]));
        if (enc == EncodingKind::color_cell) {
          c.primitives.push_back(rect("category", b.x, b.y, b.w, b.h, color, static_cast<double>(k)));
        } else if (enc == EncodingKind::category_matrix) {
          const double sw = b.w / static_cast<double>(d.categories.size());
          for (std::size_t i = 0; i < d.categories.size(); ++i) {
            auto p = rect("category", b.x + sw * static_cast<double>(i), b.y, sw, b.h,
                          i == k ? color : std::string("none"), static_cast<double>(i));
            if (i != k) p.stroke = std::string(kNeutral);
            c.primitives.push_back(std::move(p));
          }
        } else {
          c.primitives.push_back(text("label", b.x + 2, b.y + b.h / 2,
                                      truncate(d.categories[k], b.w - 4, opt_.char_width)));
        }
        return;
      }
      case CellKind::text: {
        const auto& v = t_.dataset().text(t_.dataset().column_index(leaf.source), row);
        if (!v) return dash(c);
        c.primitives.push_back(text("label", b.x + 2, b.y + b.h / 2, truncate(*v, b.w - 4, opt_.char_width)));
        return;
      }
      case CellKind::matrix:
        return matrix_item(leaf, row, enc, b, c);
      case CellKind::stacked: {
        const auto* cc = t_.find_combined(leaf.source);
        double x = b.x;
        bool any = false;
        for (std::size_t i = 0; i < cc->children.size(); ++i) {
          const double u = t_.unit_value(cc->children[i], row);
          if (is_missing(u)) continue;
          any = true;
          const double w = cc->weights[i] * u * b.w;
          c.primitives.push_back(rect("segment", x, b.y, w, b.h, color_at(i), u));
          x += w;
        }
        if (!any) dash(c);
        return;
      }
      case CellKind::interleaved: {
        const auto* cc = t_.find_combined(leaf.source);
        const double sh = b.h / static_cast<double>(cc->children.size());
        bool any = false;
        for (std::size_t i = 0; i < cc->children.size(); ++i) {
          const double raw = t_.scalar_value(cc->children[i], row);
          if (is_missing(raw)) continue;
          any = true;
          const MappedValue m = safe_map(t_.mapping(cc->children[i]), raw);
          c.out_of_range = c.out_of_range || m.status == MappedValue::Status::out_of_range;
          numeric_mark(enc, m.unit, raw, Box{b.x, b.y + sh * static_cast<double>(i), b.w, sh}, c,
                       color_at(i));
        }
        if (!any) dash(c);
        return;
      }
      case CellKind::imposition: {
        const auto [num, cat] = imposition_children(leaf);
        const std::size_t ci = t_.dataset().column_index(cat);
        const auto v = t_.dataset().categories(ci)[row];
        const std::string color =
            v == kMissingCategory
                ? std::string(kNeutral)
                : color_at(static_cast<std::size_t>(def(cat).color_indices[static_cast<std::size_t>(v)]));
        return scalar_item(num, row, enc, b, c, color);
      }
    }
  }

  std::pair<std::string, std::string> imposition_children(const LeafColumn& leaf) const {
    const auto* cc = t_.find_combined(leaf.source);
    const auto& a = cc->children[0];
    const auto& b = cc->children[1];
    if (t_.is_scalar(a)) return {a, b};
    return {b, a};
  }

  void matrix_item(const LeafColumn& leaf, RowId row, EncodingKind enc, const Box& b, SceneCell& c) {
    const auto slice = t_.dataset().matrix_row(t_.dataset().column_index(leaf.source), row);
    std::vector<double> values;
    values.reserve(leaf.inner.size());
    for (auto i : leaf.inner) values.push_back(slice[i]);
    if (std::all_of(values.begin(), values.end(), [](double v) { return is_missing(v); })) return dash(c);
    const MappingSpec spec = t_.mapping(leaf.source);
    if (leaf.columns_aggregated) return distribution(enc, values, spec, b, c);

    const double sw = b.w / static_cast<double>(values.size());
    std::string d;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (is_missing(values[i])) continue;
      const double u = map_unit(spec, values[i]);
      const double x = b.x + sw * static_cast<double>(i);
      switch (enc) {
        case EncodingKind::heatmap:
          c.primitives.push_back(rect("heat", x, b.y, sw, b.h, brightness_color(u), u));
          break;
        case EncodingKind::bars:
          c.primitives.push_back(rect("bar", x, b.y + b.h * (1 - u), sw, b.h * u, std::string(kMarkColor), u));
          break;
        default:
          d += d.empty() ? "M" : " L";
          append_number(d, x + sw / 2);
          d += ",";
          append_number(d, b.y + b.h * (1 - u));
          break;
      }
    }
    if (enc == EncodingKind::sparkline) {
      c.primitives.push_back(path("sparkline", std::move(d), "none", std::string(kMarkColor)));
    }
  }

  // --- aggregate marks -----------------------------------------------------

  // Box plot, histogram or dot plot of `values` positioned by `spec`.
  void distribution(EncodingKind enc, std::span<const double> values, const MappingSpec& spec,
                    const Box& b, SceneCell& c, const std::string& color = std::string(kMarkColor)) {
    if (std::all_of(values.begin(), values.end(), [](double v) { return is_missing(v); })) return dash(c);
    auto xu = [&](double v) { return b.x + map_unit(spec, v) * b.w; };
    switch (enc) {
      case EncodingKind::boxplot: {
        const BoxStats s = box_stats(values);
        const double cy = b.y + b.h / 2;
        const double q1 = xu(s.q1), q3 = xu(s.q3);
        const double lo = std::min(q1, q3), hi = std::max(q1, q3);
        auto box = rect("box", lo, b.y, hi - lo, b.h, compact(c) ? color : std::string("#dbe5f1"),
                        map_unit(spec, s.median));
        box.stroke = color;
        c.primitives.push_back(std::move(box));
        c.primitives.push_back(line("median", xu(s.median), b.y, xu(s.median), b.y + b.h, "#000000"));
        if (compact(c)) {
          // Tick marks in place of whisker lines.
          c.primitives.push_back(line("whisker_tick", xu(s.whisker_lo), b.y, xu(s.whisker_lo), b.y + b.h, color));
          c.primitives.push_back(line("whisker_tick", xu(s.whisker_hi), b.y, xu(s.whisker_hi), b.y + b.h, color));
        } else {
          c.primitives.push_back(line("whisker", xu(s.whisker_lo), cy, lo, cy, color));
          c.primitives.push_back(line("whisker", hi, cy, xu(s.whisker_hi), cy, color));
          for (double o : s.outliers) {
            c.primitives.push_back(circle("outlier", xu(o), cy, std::min(2.0, b.h / 4), color,
                                          map_unit(spec, o)));
          }
        }
        return;
      }
      case EncodingKind::histogram: {
        Domain domain = spec.domain;
        const Histogram hist = histogram(values, domain);
        const std::size_t peak = *std::max_element(hist.counts.begin(), hist.counts.end());
        const double bw = b.w / static_cast<double>(hist.bin_count());
        for (std::size_t i = 0; i < hist.bin_count(); ++i) {
          const double f = peak == 0 ? 0.0 : static_cast<double>(hist.counts[i]) / static_cast<double>(peak);
          const double inset = compact(c) ? 0.0 : std::min(1.0, bw / 4);
          c.primitives.push_back(rect("bin", b.x + bw * static_cast<double>(i) + inset, b.y + b.h * (1 - f),
                                      bw - 2 * inset, b.h * f, color, f));
        }
        return;
      }
      default: {  // dot plot
        const double cy = b.y + b.h / 2;
        for (double v : values) {
          if (is_missing(v)) continue;
          auto p = circle("dot", xu(v), cy, std::min(2.0, b.h / 2), color, map_unit(spec, v));
          p.opacity = 0.5;
          c.primitives.push_back(std::move(p));
        }
        return;
      }
    }
  }

  void group_cell(const LeafColumn& leaf, const GroupNode& node, EncodingKind enc, const Box& b,
                  SceneCell& c) {
    const auto& members = node.members;
    switch (leaf.kind) {
      case CellKind::numerical:
      case CellKind::stacked:
        return distribution(enc, member_values(leaf.source, members), t_.mapping(leaf.source), b, c);
      case CellKind::imposition: {
        const auto [num, cat] = imposition_children(leaf);
        return distribution(enc, member_values(num, members), t_.mapping(num), b, c);
      }
      case CellKind::interleaved: {
        const auto* cc = t_.find_combined(leaf.source);
        const double sh = b.h / static_cast<double>(cc->children.size());
        bool any = false;
        for (std::size_t i = 0; i < cc->children.size(); ++i) {
          const auto values = member_values(cc->children[i], members);
          if (std::all_of(values.begin(), values.end(), [](double v) { return is_missing(v); })) continue;
          any = true;
          distribution(enc, values, t_.mapping(cc->children[i]),
                       Box{b.x, b.y + sh * static_cast<double>(i), b.w, sh}, c, color_at(i));
        }
        if (!any) dash(c);
        return;
      }
      case CellKind::categorical: {
        const auto& d = def(leaf.source);
        const auto all = t_.dataset().categories(t_.dataset().column_index(leaf.source));
        std::vector<std::int32_t> values;
        values.reserve(members.size());
        for (RowId r : members) values.push_back(all[r]);
        const CategoryCounts counts = category_counts(values, d.categories.size());
        const std::size_t present = members.size() - counts.missing_count;
        if (present == 0) return dash(c);
        const std::size_t k = d.categories.size();
        const double sw = b.w / static_cast<double>(k);
        const std::size_t peak = *std::max_element(counts.counts.begin(), counts.counts.end());
        double x = b.x;
        for (std::size_t i = 0; i < k; ++i) {
          const std::string color = color_at(static_cast<std::size_t>(d.color_indices[i]));
          const double share = static_cast<double>(counts.counts[i]) / static_cast<double>(present);
          if (enc == EncodingKind::stacked_bar) {
            if (counts.counts[i] == 0) continue;
            c.primitives.push_back(rect("segment", x, b.y, share * b.w, b.h, color, share));
            x += share * b.w;
          } else if (enc == EncodingKind::histogram) {
            const double f = static_cast<double>(counts.counts[i]) / static_cast<double>(peak);
            c.primitives.push_back(rect("bin", b.x + sw * static_cast<double>(i), b.y + b.h * (1 - f), sw,
                                        b.h * f, color, f));
          } else {
            c.primitives.push_back(rect("brightness", b.x + sw * static_cast<double>(i), b.y, sw, b.h,
                                        brightness_color(share), share));
          }
        }
        return;
      }
      case CellKind::text: {
        const std::size_t ci = t_.dataset().column_index(leaf.source);
        std::vector<std::optional<std::string>> values;
        for (RowId r : members) {
          if (const auto& v = t_.dataset().text(ci, r)) values.push_back(v);
        }
        const TextSample sample = text_aggregate(values, opt_.example_limit);
        if (sample.examples.empty()) return dash(c);
        std::string joined;
        for (const auto& e : sample.examples) {
          if (!joined.empty()) joined += ", ";
          joined += e;
        }
        std::string suffix = sample.overflow > 0 ? " +" + std::to_string(sample.overflow) + " more" : "";
        const double room = b.w - 4 - static_cast<double>(suffix.size()) * opt_.char_width;
        c.primitives.push_back(text("examples", b.x + 2, b.y + b.h / 2,
                                    truncate(joined, room, opt_.char_width) + suffix));
        return;
      }
      case CellKind::matrix:
        return matrix_group(leaf, members, enc, b, c);
    }
  }

  void matrix_group(const LeafColumn& leaf, std::span<const RowId> members, EncodingKind enc,
                    const Box& b, SceneCell& c) {
    const std::size_t ci = t_.dataset().column_index(leaf.source);
    const std::size_t w = leaf.inner.size();
    std::vector<double> block;
    block.reserve(members.size() * w);
    for (RowId r : members) {
      const auto slice = t_.dataset().matrix_row(ci, r);
      for (auto i : leaf.inner) block.push_back(slice[i]);
    }
    if (std::all_of(block.begin(), block.end(), [](double v) { return is_missing(v); })) return dash(c);
    const MappingSpec spec = t_.mapping(leaf.source);
    if (leaf.columns_aggregated || enc == EncodingKind::boxplot || enc == EncodingKind::histogram ||
        enc == EncodingKind::dotplot) {
      return distribution(enc, block, spec, b, c);
    }
    const auto agg = matrix_aggregate(MatrixBlock{block, members.size(), w}, MatrixDirection::rows);
    const double sw = b.w / static_cast<double>(w);
    std::string mean_d;
    std::string upper;
    std::vector<std::pair<double, double>> lower;
    for (std::size_t i = 0; i < w; ++i) {
      const auto& s = agg.per_column[i];
      if (!s) continue;
      const double x = b.x + sw * static_cast<double>(i);
      const double um = map_unit(spec, s->mean);
      if (enc == EncodingKind::mean_heatmap) {
        c.primitives.push_back(rect("heat", x, b.y, sw, b.h, brightness_color(um), um));
        continue;
      }
      const double cx = x + sw / 2;
      auto y_of = [&](double v) { return b.y + b.h * (1 - map_unit(spec, v)); };
      mean_d += mean_d.empty() ? "M" : " L";
      append_number(mean_d, cx);
      mean_d += ",";
      append_number(mean_d, y_of(s->mean));
      upper += upper.empty() ? "M" : " L";
      append_number(upper, cx);
      upper += ",";
      append_number(upper, y_of(s->q3));
      lower.emplace_back(cx, y_of(s->q1));
    }
    if (enc == EncodingKind::envelope_sparkline) {
      for (auto it = lower.rbegin(); it != lower.rend(); ++it) {
        upper += " L";
        append_number(upper, it->first);
        upper += ",";
        append_number(upper, it->second);
      }
      upper += " Z";
      auto env = path("envelope", std::move(upper), "#dbe5f1", "none");
      c.primitives.push_back(std::move(env));
      c.primitives.push_back(path("sparkline", std::move(mean_d), "none", std::string(kMarkColor)));
    }
  }

  const Table& t_;
  const SceneOptions& opt_;
  std::unordered_map<std::string, std::vector<double>> cache_;
};

}  // namespace

std::string_view to_string(Primitive::Kind k) {
  switch (k) {
    case Primitive::Kind::rect: return "rect";
    case Primitive::Kind::line: return "line";
    case Primitive::Kind::circle: return "circle";
    case Primitive::Kind::text: return "text";
    case Primitive::Kind::path: return "path";
    case Primitive::Kind::dash: return "dash";
  }
  return "rect";
}

std::span<const std::string_view> palette() { return kPalette; }

std::size_t Scene::cell_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.cells.size();
  return n;
}

std::size_t Scene::primitive_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) {
    for (const auto& c : r.cells) n += c.primitives.size();
  }
  return n;
}

Scene build_scene(const Table& table, std::span<const RenderRow> rows, const Layout& layout,
                  RowRange window, const SceneOptions& options) {
  if (window.first > window.end || window.end > rows.size()) {
    throw SceneError("window [" + std::to_string(window.first) + ", " + std::to_string(window.end) +
                     ") exceeds " + std::to_string(rows.size()) + " rows");
  }
  if (layout.rows.size() != rows.size()) throw SceneError("layout does not match the render rows");

  Scene scene;
  scene.version = table.version();
  scene.window = window;
  scene.total_rows = rows.size();
  scene.total_height = layout.total_height;
  scene.fits = layout.fits;
  scene.mode = table.state().mode;

  const auto& leaves = table.leaf_columns();
  double x = 0.0;
  for (const auto& leaf : leaves) {
    scene.columns.push_back(SceneColumn{leaf.id, leaf.label, leaf.kind, x, leaf.width});
    x += leaf.width;
  }
  scene.width = x;

  Builder builder(table, options);
  const auto& tree = table.tree();
  for (std::size_t i = window.first; i < window.end; ++i) {
    const RenderRow& rr = rows[i];
    SceneRow row;
    row.kind = rr.kind;
    row.index = i;
    row.depth = rr.depth;
    row.y = layout.rows[i].y;
    row.h = layout.rows[i].h;
    if (rr.kind == RenderRow::Kind::item) {
      row.row = rr.row;
      row.selected = table.is_selected(rr.row);
    } else {
      const auto& node = tree.nodes[rr.node];
      row.group_id = node.id;
      row.label = node.label;
      row.count = node.members.size();
    }
    row.cells.reserve(leaves.size());
    for (std::size_t c = 0; c < leaves.size(); ++c) {
      row.cells.push_back(builder.cell(leaves[c], scene.columns[c], rr, layout.rows[i]));
    }
    if (rr.kind == RenderRow::Kind::header && !row.cells.empty()) {
      auto& first = row.cells.front();
      const double indent = 8.0 * static_cast<double>(rr.depth > 0 ? rr.depth - 1 : 0);
      first.primitives.push_back(text("group_label", first.x + 2 + indent, first.y + first.h / 2,
                                      row.label + " (" + std::to_string(row.count) + ")"));
    }
    scene.rows.push_back(std::move(row));
  }
  return scene;
}

// --- SVG ---------------------------------------------------------------------

namespace {

void escape_xml(std::string& out, std::string_view s) {
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
}

void attr(std::string& out, std::string_view name, double v) {
  out += ' ';
  out += name;
  out += "=\"";
  append_number(out, v);
  out += '"';
}

void attr(std::string& out, std::string_view name, std::string_view v) {
  out += ' ';
  out += name;
  out += "=\"";
  escape_xml(out, v);
  out += '"';
}

void paint(std::string& out, const Primitive& p) {
  if (!p.fill.empty()) attr(out, "fill", p.fill);
  if (!p.stroke.empty()) attr(out, "stroke", p.stroke);
  if (p.opacity != 1.0) attr(out, "opacity", p.opacity);
}

void render_primitive(std::string& out, const Primitive& p, const Theme& theme) {
  switch (p.kind) {
    case Primitive::Kind::rect:
      out += "<rect";
      attr(out, "class", p.role);
      attr(out, "x", p.x);
      attr(out, "y", p.y);
      attr(out, "width", p.w);
      attr(out, "height", p.h);
      paint(out, p);
      out += "/>";
      break;
    case Primitive::Kind::line:
    case Primitive::Kind::dash:
      out += "<line";
      attr(out, "class", p.kind == Primitive::Kind::dash ? std::string_view("dash") : std::string_view(p.role));
      attr(out, "x1", p.x);
      attr(out, "y1", p.y);
      attr(out, "x2", p.x2);
      attr(out, "y2", p.y2);
      paint(out, p);
      out += "/>";
      break;
    case Primitive::Kind::circle:
      out += "<circle";
      attr(out, "class", p.role);
      attr(out, "cx", p.x);
      attr(out, "cy", p.y);
      attr(out, "r", p.r);
      paint(out, p);
      out += "/>";
      break;
    case Primitive::Kind::text:
      out += "<text";
      attr(out, "class", p.role);
      attr(out, "x", p.x);
      attr(out, "y", p.y);
      attr(out, "text-anchor", p.anchor);
      attr(out, "dominant-baseline", "central");
      attr(out, "font-size", theme.font_size);
      paint(out, p);
      out += '>';
      escape_xml(out, p.text);
      out += "</text>";
      break;
    case Primitive::Kind::path:
      out += "<path";
      attr(out, "class", p.role);
      attr(out, "d", p.d);
      paint(out, p);
      out += "/>";
      break;
  }
}

}  // namespace

std::string render_svg(const Scene& scene, const Theme& theme) {
  const double top = scene.rows.empty() ? 0.0 : scene.rows.front().y;
  double body_h = 0.0;
  if (!scene.rows.empty()) body_h = scene.rows.back().y + scene.rows.back().h - top;
  const double width = std::max(scene.width, 1.0);
  const double height = theme.header_height + body_h;

  std::string out;
  out.reserve(256 + scene.primitive_count() * 96);
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"";
  attr(out, "width", width);
  attr(out, "height", height);
  out += " viewBox=\"0 0 ";
  append_number(out, width);
  out += ' ';
  append_number(out, height);
  out += '"';
  attr(out, "font-family", theme.font_family);
  out += ">\n";
  out += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"100%\" height=\"100%\"";
  attr(out, "fill", theme.background);
  out += "/>\n<g class=\"header\">";
  for (const auto& col : scene.columns) {
    out += "<rect";
    attr(out, "x", col.x);
    attr(out, "y", 0.0);
    attr(out, "width", col.w);
    attr(out, "height", theme.header_height);
    attr(out, "fill", theme.header_fill);
    out += "/><text";
    attr(out, "x", col.x + 4);
    attr(out, "y", theme.header_height / 2);
    attr(out, "dominant-baseline", "central");
    attr(out, "font-size", theme.font_size);
    attr(out, "font-weight", "bold");
    out += '>';
    escape_xml(out, col.label);
    out += "</text>";
  }
  out += "</g>\n<g class=\"body\" transform=\"translate(0,";
  append_number(out, theme.header_height - top);
  out += ")\">\n";
  for (const auto& row : scene.rows) {
    out += "<g class=\"row\"";
    attr(out, "data-kind", to_string(row.kind));
    attr(out, "data-index", std::to_string(row.index));
    if (row.kind == RenderRow::Kind::item) {
      attr(out, "data-row", std::to_string(row.row));
      if (row.selected) attr(out, "data-selected", "true");
    } else {
      attr(out, "data-group", row.group_id);
      attr(out, "data-count", std::to_string(row.count));
    }
    out += '>';
    if (row.selected) {
      out += "<rect class=\"selection\"";
      attr(out, "x", 0.0);
      attr(out, "y", row.y);
      attr(out, "width", scene.width);
      attr(out, "height", row.h);
      out += " fill=\"#fff3bf\"/>";
    }
    for (const auto& cell : row.cells) {
      out += "<g class=\"cell\"";
      attr(out, "data-column", cell.column);
      if (cell.encoding) attr(out, "data-encoding", to_string(*cell.encoding));
      if (cell.missing) attr(out, "data-missing", "true");
      if (cell.out_of_range) attr(out, "data-out-of-range", "true");
      out += '>';
      for (const auto& p : cell.primitives) render_primitive(out, p, theme);
      out += "</g>";
    }
    out += "</g>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

// --- JSON --------------------------------------------------------------------

nlohmann::json scene_to_json(const Scene& scene) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& r : scene.rows) {
    json cells = json::array();
    for (const auto& c : r.cells) {
      json prims = json::array();
      for (const auto& p : c.primitives) {
        json j{{"kind", to_string(p.kind)}, {"role", p.role}};
        switch (p.kind) {
          case Primitive::Kind::rect:
            j.update({{"x", p.x}, {"y", p.y}, {"w", p.w}, {"h", p.h}});
            break;
          case Primitive::Kind::line:
          case Primitive::Kind::dash:
            j.update({{"x1", p.x}, {"y1", p.y}, {"x2", p.x2}, {"y2", p.y2}});
            break;
          case Primitive::Kind::circle:
            j.update({{"cx", p.x}, {"cy", p.y}, {"r", p.r}});
            break;
          case Primitive::Kind::text:
            j.update({{"x", p.x}, {"y", p.y}, {"text", p.text}, {"anchor", p.anchor}});
            break;
          case Primitive::Kind::path:
            j["d"] = p.d;
            break;
        }
        if (!p.fill.empty()) j["fill"] = p.fill;
        if (!p.stroke.empty()) j["stroke"] = p.stroke;
        if (p.opacity != 1.0) j["opacity"] = p.opacity;
        if (!is_missing(p.value)) j["value"] = p.value;
        prims.push_back(std::move(j));
      }
      json cj{{"column", c.column},
              {"directive", to_string(c.directive)},
              {"x", c.x},
              {"y", c.y},
              {"w", c.w},
              {"h", c.h},
              {"missing", c.missing},
              {"out_of_range", c.out_of_range},
              {"primitives", std::move(prims)}};
      cj["encoding"] = c.encoding ? json(to_string(*c.encoding)) : json(nullptr);
      cells.push_back(std::move(cj));
    }
    json rj{{"kind", to_string(r.kind)}, {"index", r.index}, {"depth", r.depth},
            {"y", r.y},                  {"h", r.h},         {"cells", std::move(cells)}};
    if (r.kind == RenderRow::Kind::item) {
      rj["row"] = r.row;
      rj["selected"] = r.selected;
    } else {
      rj["group_id"] = r.group_id;
      rj["label"] = r.label;
      rj["count"] = r.count;
    }
    rows.push_back(std::move(rj));
  }
  json columns = json::array();
  for (const auto& c : scene.columns) {
    columns.push_back({{"id", c.id}, {"label", c.label}, {"kind", to_string(c.kind)}, {"x", c.x}, {"w", c.w}});
  }
  return json{{"format_version", kSceneFormatVersion},
              {"version", scene.version},
              {"window", {{"first", scene.window.first}, {"last", scene.window.end}}},
              {"total_rows", scene.total_rows},
              {"total_height", scene.total_height},
              {"width", scene.width},
              {"fits", scene.fits},
              {"mode", to_string(scene.mode)},
              {"columns", std::move(columns)},
              {"rows", std::move(rows)}};
}

}  // namespace strata
