#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "strata/error.hpp"
#include "strata/layout.hpp"
#include "strata/scene.hpp"
#include "support/fixtures.hpp"

using namespace strata;

namespace {

std::vector<RenderRow> items(std::size_t n) {
  std::vector<RenderRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i].row = static_cast<RowId>(i);
  return rows;
}

const auto kNone = [](RowId) { return false; };

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Layout, DetailHeights) {
  auto rows = items(4);
  rows[3].kind = RenderRow::Kind::group;
  const auto l = compute_layout(rows, LayoutMode::detail, {}, kNone);
  ASSERT_EQ(l.rows.size(), 4U);
  EXPECT_EQ(l.rows[3].h, 40);
  EXPECT_EQ(l.rows[3].y, 60);
  EXPECT_EQ(l.rows[1].y, 20);
  EXPECT_EQ(l.total_height, 100);
}

TEST(Layout, OverviewFormula) {
  const auto a = compute_layout(items(500), LayoutMode::overview, {}, kNone);
  EXPECT_EQ(a.item_height, 1);
  EXPECT_EQ(a.total_height, 500);
  EXPECT_TRUE(a.fits);
  const auto b = compute_layout(items(1000), LayoutMode::overview, {}, kNone);
  EXPECT_EQ(b.item_height, 1);
  EXPECT_EQ(b.total_height, 1000);
  EXPECT_FALSE(b.fits);
  const auto c = compute_layout(items(10), LayoutMode::overview, {}, kNone);
  EXPECT_EQ(c.item_height, 20);
}

TEST(Layout, OverviewSelectedRowsExpand) {
  const auto l = compute_layout(items(100), LayoutMode::overview, {},
                                [](RowId r) { return r == 7; });
  EXPECT_EQ(l.rows[7].h, 20);
  EXPECT_EQ(l.item_height, std::floor((600.0 - 20.0) / 99.0));
  EXPECT_EQ(l.rows[8].h, l.item_height);
}

TEST(Layout, ModeToggleIsLossless) {
  const auto a = fixtures::health_table(160);
  Table t(a.dataset);
  t.set_grouping({ByCategorical{"continent"}});
  t.set_mode(LayoutMode::overview);
  const auto rows = t.traverse();
  const auto before = compute_layout(t, rows, {});
  t.set_mode(LayoutMode::detail);
  t.set_mode(LayoutMode::overview);
  const auto after = compute_layout(t, t.traverse(), {});
  ASSERT_EQ(before.rows.size(), after.rows.size());
  for (std::size_t i = 0; i < before.rows.size(); ++i) {
    EXPECT_EQ(before.rows[i].y, after.rows[i].y);
    EXPECT_EQ(before.rows[i].h, after.rows[i].h);
  }
}

TEST(Layout, ParamsValidate) {
  LayoutParams p;
  p.min_item_h = 0.5;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.detail_row_h = 0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(VisibleRange, Examples) {
  const auto l = compute_layout(items(100), LayoutMode::detail, {}, kNone);
  EXPECT_EQ(visible_range(l, 100, 200, 0), (RowRange{5, 15}));
  EXPECT_EQ(visible_range(l, 0, 200, 0).first, 0U);
  EXPECT_EQ(visible_range(l, 100, 200, 3), (RowRange{2, 18}));
  EXPECT_EQ(visible_range(l, 1990, 200, 2), (RowRange{97, 100}));
  EXPECT_EQ(visible_range(l, 5000, 200, 0).size(), 0U);
}

TEST(VisibleRange, LinearScanOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng() % 300;
    std::vector<RenderRow> rows = items(n);
    for (auto& r : rows) r.kind = static_cast<RenderRow::Kind>(rng() % 3);
    const auto mode = rng() % 2 ? LayoutMode::overview : LayoutMode::detail;
    const auto l = compute_layout(rows, mode, {}, [&](RowId r) { return r % 17 == 0; });
    const double top = std::uniform_real_distribution<double>(-50, l.total_height + 50)(rng);
    const double vh = std::uniform_real_distribution<double>(1, 700)(rng);
    const std::size_t overscan = rng() % 4;
    std::size_t first = n, last = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& b = l.rows[i];
      if (b.y < top + vh && b.y + b.h > top) {
        first = std::min(first, i);
        last = std::max(last, i + 1);
      }
    }
    if (first >= last) {
      // Nothing intersects: an empty range at the first row below the window top.
      first = 0;
      while (first < n && l.rows[first].y + l.rows[first].h <= top) ++first;
      last = first;
    }
    const RowRange want{first >= overscan ? first - overscan : 0, std::min(n, last + overscan)};
    EXPECT_EQ(visible_range(l, top, vh, overscan), want) << "trial " << trial;
  }
}

TEST(Scene, EmptyWindow) {
  const auto a = fixtures::health_table(10);
  Table t(a.dataset);
  t.set_mode(LayoutMode::detail);
  const auto rows = t.traverse();
  const auto l = compute_layout(t, rows, {});
  const auto s = build_scene(t, rows, l, {0, 0});
  EXPECT_TRUE(s.rows.empty());
  EXPECT_EQ(s.version, t.version());
  const auto svg = render_svg(s);
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.find("<svg") != std::string::npos, true);
  EXPECT_EQ(count_of(svg, "<g class=\"row\""), 0U);
  EXPECT_THROW(build_scene(t, rows, l, {0, rows.size() + 1}), SceneError);
}

TEST(Scene, BarWidthIsMapped) {
  DatasetBuilder b(2);
  b.add_numerical("v", "V", {50, 100}, Domain{0, 100});
  Table t(fixtures::share(std::move(b).build()));
  const auto rows = t.traverse();
  const auto s = build_scene(t, rows, compute_layout(t, rows, {}), {0, 2});
  const auto& cell = s.rows[0].cells[0];
  ASSERT_EQ(cell.encoding, EncodingKind::bar);
  const auto it = std::find_if(cell.primitives.begin(), cell.primitives.end(),
                               [](const Primitive& p) { return p.role == "bar"; });
  ASSERT_NE(it, cell.primitives.end());
  EXPECT_NEAR(it->w, 50, 0.5);
  EXPECT_DOUBLE_EQ(it->value, 0.5);
}

TEST(Scene, MissingCellsDrawDash) {
  const auto a = fixtures::health_table(160);
  Table t(a.dataset);
  const auto rows = t.traverse();
  const auto s = build_scene(t, rows, compute_layout(t, rows, {}), {0, rows.size()});
  std::size_t dashes = 0;
  for (const auto& r : s.rows) {
    for (const auto& c : r.cells) {
      if (c.column != "gdp") continue;
      if (c.missing) {
        ASSERT_EQ(c.primitives.size(), 1U);
        EXPECT_EQ(c.primitives[0].kind, Primitive::Kind::dash);
        ++dashes;
      }
    }
  }
  EXPECT_EQ(dashes, a.missing_rows.size());
}

TEST(Scene, AggregatedBoxplotGeometry) {
  const auto a = fixtures::health_table(160);
  Table t(a.dataset);
  t.set_grouping({ByCategorical{"continent"}});
  t.toggle_aggregate("continent=Asia", true);
  t.set_encoding("coverage", EncodingSlot::aggregate, EncodingKind::boxplot);
  const auto rows = t.traverse();
  const auto s = build_scene(t, rows, compute_layout(t, rows, {}), {0, rows.size()});
  const SceneRow* group = nullptr;
  for (const auto& r : s.rows) {
    if (r.kind == RenderRow::Kind::group) group = &r;
  }
  ASSERT_NE(group, nullptr);
  const auto& cell = *std::find_if(group->cells.begin(), group->cells.end(),
                                   [](const SceneCell& c) { return c.column == "coverage"; });
  std::vector<double> values;
  for (auto r : t.tree().nodes[*t.tree().find("continent=Asia")].members) {
    values.push_back(t.scalar_value("coverage", r));
  }
  const auto stats = box_stats(values);
  const auto box = std::find_if(cell.primitives.begin(), cell.primitives.end(),
                                [](const Primitive& p) { return p.role == "box"; });
  ASSERT_NE(box, cell.primitives.end());
  const double x0 = cell.x, w = cell.w;
  EXPECT_NEAR(box->x, x0 + stats.q1 / 100.0 * w, 1e-9 + 0.02 * w);
  EXPECT_NEAR(box->x + box->w, x0 + stats.q3 / 100.0 * w, 1e-9 + 0.02 * w);
}

TEST(Scene, IllegalOverrideRejected) {
  const auto a = fixtures::health_table(20);
  Table t(a.dataset);
  EXPECT_THROW(t.set_encoding("country", EncodingSlot::item, EncodingKind::bar), Error);
}

TEST(Scene, CompactRowsAtOverviewScale) {
  const auto ds = fixtures::wide_numeric(2000, 2);
  Table t(ds);
  t.set_mode(LayoutMode::overview);
  const auto rows = t.traverse();
  const auto l = compute_layout(t, rows, {});
  const auto s = build_scene(t, rows, l, {0, 10});
  for (const auto& r : s.rows) {
    for (const auto& c : r.cells) EXPECT_NE(c.directive, RenderDirective::full);
  }
}

TEST(Scene, WindowCellCountIndependentOfTableSize) {
  for (std::size_t n : {1000U, 20000U}) {
    Table t(fixtures::wide_numeric(n, 4));
    const auto rows = t.traverse();
    const auto s = build_scene(t, rows, compute_layout(t, rows, {}), {100, 150});
    EXPECT_EQ(s.cell_count(), 50U * t.leaf_columns().size());
  }
}

TEST(Svg, DeterministicAndStructured) {
  const auto a = fixtures::health_table(30);
  Table t(a.dataset);
  t.set_grouping({ByCategorical{"hdi"}});
  t.toggle_aggregate("hdi=low", true);
  const auto rows = t.traverse();
  const auto l = compute_layout(t, rows, {});
  const auto s1 = render_svg(build_scene(t, rows, l, {0, rows.size()}));
  const auto s2 = render_svg(build_scene(t, rows, l, {0, rows.size()}));
  EXPECT_EQ(s1, s2);
  EXPECT_EQ(count_of(s1, "<g class=\"row\""), rows.size());
  EXPECT_NE(s1.find("</svg>"), std::string::npos);
  EXPECT_EQ(s1.find("-0.00"), std::string::npos);
}

TEST(SceneJson, Fields) {
  const auto a = fixtures::health_table(5);
  Table t(a.dataset);
  const auto rows = t.traverse();
  const auto j = scene_to_json(build_scene(t, rows, compute_layout(t, rows, {}), {1, 3}));
  EXPECT_EQ(j["format_version"], kSceneFormatVersion);
  EXPECT_EQ(j["rows"].size(), 2U);
  EXPECT_EQ(j["window"]["first"], 1);
  EXPECT_EQ(j["window"]["last"], 3);
}
