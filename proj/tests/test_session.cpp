#include <gtest/gtest.h>

#include <thread>

#include "strata/error.hpp"
#include "strata/session.hpp"
#include "strata/state_document.hpp"
#include "support/fixtures.hpp"

using namespace strata;
using nlohmann::json;

namespace {

json without_version(json doc) {
  doc.erase("version");
  return doc;
}

Command cmd(std::uint64_t version, std::string op, json payload = json::object()) {
  Command c;
  c.expected_version = version;
  c.op = std::move(op);
  c.payload = std::move(payload);
  return c;
}

Delta delta(const Outcome& o) {
  if (const auto* r = std::get_if<Rejection>(&o)) {
    ADD_FAILURE() << "rejected: " << r->message;
    return {};
  }
  return std::get<Delta>(o);
}

}  // namespace

TEST(StateDocument, DefaultRoundTrip) {
  const auto a = fixtures::health_table(20);
  Table t(a.dataset);
  const json doc = state_to_json(t.state(), t.dataset());
  EXPECT_EQ(doc["protocol_version"], kProtocolVersion);
  EXPECT_EQ(doc["fingerprint"], t.dataset().fingerprint_hex());
  EXPECT_EQ(doc["columns"].size(), t.dataset().column_count());
  const auto parsed = state_from_json(doc);
  Table r(a.dataset);
  restore_document(r, parsed);
  EXPECT_EQ(state_to_json(r.state(), r.dataset()), doc);
}

TEST(StateDocument, RichRoundTrip) {
  const auto a = fixtures::health_table(80);
  Table t(a.dataset);
  t.set_grouping({ByCategorical{"continent"}, ByBins{"coverage", {25, 75}}});
  const auto stacked = t.combine_columns(CombinedKind::stacked, {"prevalence", "coverage"});
  t.resize_column("coverage", 200);
  CombineOptions so;
  so.script = "gdp / 1000 + prevalence";
  t.combine_columns(CombinedKind::scripted, {}, so);
  t.set_filters({{"gdp", NumericRange{1000, 50000}}, {"continent", CategoryExclusion{{"Oceania"}}},
                 {"country", TextMatch{TextMatch::Mode::regex, "1"}}});
  t.set_sort({{stacked, Direction::desc, std::nullopt}});
  t.sort_groups({GroupSort::By::statistic, "gdp", Statistic::q3, Direction::desc});
  t.toggle_aggregate("continent=Asia", true);
  t.set_mapping("gdp", MappingSpec{MappingKind::log10, {100, 100000}, true});
  t.set_encoding("hdi", EncodingSlot::aggregate, EncodingKind::histogram);
  t.set_encoding("gdp", EncodingSlot::aggregate, EncodingKind::boxplot, "continent=Asia");
  t.set_matrix_grouping("deaths", MatrixColumnGrouping{{2004}, {">= 2004"}});
  t.set_selection({1, 5});
  t.set_mode(LayoutMode::overview);

  const json doc = state_to_json(t.state(), t.dataset());
  const auto parsed = parse_state_document(doc.dump());
  Table r(a.dataset);
  restore_document(r, parsed);
  EXPECT_EQ(r.version(), 0U);
  EXPECT_EQ(without_version(state_to_json(r.state(), r.dataset())), without_version(doc));
}

TEST(StateDocument, SchemaErrors) {
  EXPECT_THROW(parse_state_document("{"), ValidationError);
  EXPECT_THROW(parse_state_document(R"({"protocol_version": 99})"), ValidationError);
  EXPECT_THROW(parse_state_document(R"({"protocol_version": 1, "bogus": 1})"), ValidationError);
  EXPECT_THROW(parse_state_document(R"({"protocol_version": 1, "filters": [{"column": "x", "type": "nope"}]})"),
               ValidationError);
  // Every state field is required.
  EXPECT_THROW(parse_state_document(R"({"protocol_version": 1})"), ValidationError);
}

TEST(StateDocument, FingerprintMismatch) {
  const auto a = fixtures::health_table(20, 1);
  const auto b = fixtures::health_table(20, 2);
  Table ta(a.dataset);
  const auto doc = state_from_json(state_to_json(ta.state(), ta.dataset()));
  Table tb(b.dataset);
  EXPECT_THROW(restore_document(tb, doc), ValidationError);
  EXPECT_EQ(tb.version(), 0U);
}

TEST(StateDocument, SemanticErrorsLeaveTableUnchanged) {
  const auto a = fixtures::health_table(20);
  Table t(a.dataset);
  t.set_mode(LayoutMode::overview);
  auto doc = state_from_json(state_to_json(t.state(), t.dataset()));
  doc.state.sorting.push_back({"no_such_column", Direction::asc, std::nullopt});
  EXPECT_THROW(restore_document(t, doc), LookupError);
  EXPECT_EQ(t.version(), 1U);
  EXPECT_EQ(t.state().mode, LayoutMode::overview);
}

TEST(Export, HeaderAndRows) {
  DatasetBuilder b(4);
  b.add_text("name", "Name", {"a", "b,c", std::nullopt, "d"}).add_numerical("v", "V", {1.5, kMissing, 3, 0.1});
  Table t(fixtures::share(std::move(b).build()));
  t.set_filters({{"v", NumericRange{1, 5}}});
  EXPECT_EQ(export_csv(t), "name,v\r\na,1.5\r\n,3\r\n");
  t.set_filters({});
  // 3 visible rows, 2 columns: header + 3 lines.
  t.set_filters({{"v", RequirePresent{}}});
  const auto out = export_csv(t);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 4);
}

TEST(Export, GroupColumnAndReimport) {
  const auto a = fixtures::health_table(60);
  Table t(a.dataset);
  t.set_grouping({ByCategorical{"continent"}});
  t.toggle_aggregate("continent=Africa", true);
  t.set_filters({{"coverage", NumericRange{10, 90}}});
  const auto bytes = export_csv(t);
  const auto back = load_dataset(bytes);
  EXPECT_EQ(back.row_count(), t.filtered_count());
  std::vector<RowId> order;
  std::vector<std::string> groups;
  for (const auto& rr : t.traverse()) {
    if (rr.kind == RenderRow::Kind::item) {
      order.push_back(rr.row);
      groups.emplace_back();
    } else if (rr.kind == RenderRow::Kind::group) {
      for (auto r : t.tree().nodes[rr.node].members) {
        order.push_back(r);
        groups.push_back("Africa");
      }
    }
  }
  ASSERT_EQ(order.size(), back.row_count());
  const auto gcol = back.column_index("group");
  const auto cov = back.column_index("coverage");
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& g = back.column(gcol).kind == ColumnKind::text
                        ? back.text(gcol, static_cast<RowId>(i)).value_or("")
                        : [&]() -> std::string {
                            const auto v = back.categories(gcol)[i];
                            return v < 0 ? "" : back.column(gcol).categories[static_cast<std::size_t>(v)];
                          }();
    EXPECT_EQ(g, groups[i]);
    EXPECT_EQ(back.numbers(cov)[i], t.scalar_value("coverage", order[i]));
  }
}

TEST(Session, SetSortBumpsVersion) {
  const auto a = fixtures::health_table(30);
  Session s("s1", a.dataset);
  const auto d = delta(s.apply(cmd(0, "set_sort", {{"criteria", {{{"column", "gdp"}, {"direction", "desc"}}}}})));
  EXPECT_EQ(d.version, 1U);
  EXPECT_TRUE(d.changed & kAspectRows);
  EXPECT_TRUE(d.changed & kAspectLayout);
  ASSERT_TRUE(d.scene);
  EXPECT_EQ(d.scene->rows.size(), 30U);
  ASSERT_TRUE(d.panel);
  EXPECT_EQ((*d.panel)["rows_filtered"], 30);
}

TEST(Session, StaleVersionRejectedWithoutChange) {
  const auto a = fixtures::health_table(30);
  Session s("s1", a.dataset);
  delta(s.apply(cmd(0, "set_mode", {{"mode", "overview"}})));
  const json before = s.snapshot();
  const auto o = s.apply(cmd(0, "set_mode", {{"mode", "detail"}}));
  ASSERT_TRUE(std::holds_alternative<Rejection>(o));
  const auto& r = std::get<Rejection>(o);
  EXPECT_EQ(r.reason, Rejection::Reason::version_conflict);
  EXPECT_EQ(r.current_version, 1U);
  EXPECT_EQ(s.snapshot(), before);
}

TEST(Session, InvalidPayloadRejected) {
  const auto a = fixtures::health_table(10);
  Session s("s1", a.dataset);
  const json before = s.snapshot();
  for (const auto& c : {cmd(0, "set_sort", {{"criteria", {{{"column", "nope"}}}}}), cmd(0, "set_mode", json::object()),
                        cmd(0, "frobnicate"), cmd(0, "set_filters", {{"filters", 3}})}) {
    const auto o = s.apply(c);
    ASSERT_TRUE(std::holds_alternative<Rejection>(o)) << c.op;
    EXPECT_EQ(std::get<Rejection>(o).reason, Rejection::Reason::invalid);
  }
  EXPECT_EQ(s.snapshot(), before);
}

TEST(Session, RequestSceneKeepsVersion) {
  const auto a = fixtures::health_table(100);
  Session s("s1", a.dataset);
  const auto d = delta(s.apply(cmd(77, "request_scene", {{"first", 10}, {"last", 20}})));
  EXPECT_EQ(d.version, 0U);
  ASSERT_TRUE(d.scene);
  EXPECT_EQ(d.scene->rows.size(), 10U);
  EXPECT_EQ(d.scene->rows.front().index, 10U);
  // The registered window is reused by the next mutation.
  const auto m = delta(s.apply(cmd(0, "set_selection", {{"rows", {3}}})));
  EXPECT_EQ(m.scene->window, (RowRange{10, 20}));
  const auto sc = delta(s.apply(cmd(0, "request_scene", {{"scroll_top", 200}, {"viewport_h", 100}})));
  EXPECT_EQ(sc.scene->window, (RowRange{10, 15}));
}

TEST(Session, SnapshotAndRestore) {
  const auto a = fixtures::health_table(50);
  Session s("s1", a.dataset);
  const auto fresh = delta(s.apply(cmd(0, "snapshot"))).document;
  ASSERT_TRUE(fresh);
  Table plain(a.dataset);
  EXPECT_EQ(*fresh, state_to_json(plain.state(), plain.dataset()));

  delta(s.apply(cmd(0, "set_grouping",
                    {{"criteria", {{{"by", "categorical"}, {"column", "continent"}},
                                   {{"by", "categorical"}, {"column", "hdi"}}}}})));
  const auto c = delta(s.apply(cmd(1, "combine_columns", {{"kind", "stacked"}, {"children", {"gdp", "coverage"}}})));
  ASSERT_TRUE(c.column);
  const json doc = s.snapshot();

  Session other("s2", a.dataset);
  const auto r = delta(other.apply(cmd(0, "restore", {{"document", doc}})));
  EXPECT_EQ(r.version, 0U);
  EXPECT_EQ(without_version(other.snapshot()), without_version(doc));
}

TEST(Session, EncodingAndCombineCommands) {
  const auto a = fixtures::health_table(40);
  Session s("s1", a.dataset);
  std::uint64_t v = 0;
  auto ok = [&](std::string op, json payload) {
    const auto d = delta(s.apply(cmd(v, std::move(op), std::move(payload))));
    v = d.version;
    return d;
  };
  ok("set_grouping", {{"criteria", {{{"by", "categorical"}, {"column", "hdi"}}}}});
  ok("toggle_aggregate", {{"group", "hdi=low"}, {"aggregated", true}});
  ok("set_encoding", {{"column", "gdp"}, {"slot", "aggregate"}, {"encoding", "boxplot"}});
  ok("set_encoding", {{"column", "gdp"}, {"slot", "aggregate"}, {"encoding", nullptr}});
  ok("set_mapping", {{"column", "gdp"}, {"mapping", {{"kind", "linear"}, {"domain", {0, 70000}}, {"clip", true}}}});
  ok("move_column", {{"column", "gdp"}, {"index", 0}});
  ok("resize_column", {{"column", "gdp"}, {"width", 150}});
  const auto d = ok("combine_columns", {{"kind", "scripted"}, {"script", "gdp/1000"}, {"label", "GDP k"}});
  ASSERT_TRUE(d.column);
  EXPECT_EQ(s.table().column_label(*d.column), "GDP k");
  ok("sort_groups", {{"by", "size"}, {"direction", "desc"}});
  ok("set_matrix_grouping", {{"column", "deaths"}, {"grouping", {{"thresholds", json::array()}}}});
  EXPECT_EQ(v, 10U);
}

TEST(Session, JsonEnvelope) {
  const auto c = parse_command(json{{"session", "abc"}, {"expected_version", 4}, {"op", "snapshot"}});
  EXPECT_EQ(c.session, "abc");
  EXPECT_EQ(c.expected_version, 4U);
  EXPECT_THROW(parse_command(json{{"expected_version", -1}, {"op", "snapshot"}}), ValidationError);
  EXPECT_THROW(parse_command(json{{"expected_version", 0}}), ValidationError);
  Delta d;
  d.version = 3;
  d.changed = kAspectRows | kAspectSelection;
  const auto j = to_json(Outcome{d});
  EXPECT_EQ(j["type"], "delta");
  EXPECT_EQ(j["changed_aspects"], (json{"rows", "selection"}));
  const auto r = to_json(Outcome{Rejection{Rejection::Reason::version_conflict, 9, "x"}});
  EXPECT_EQ(r["reason"], "version_conflict");
  EXPECT_EQ(r["current_version"], 9);
}

TEST(Session, PanelMatchesSummaries) {
  const auto a = fixtures::health_table(80);
  Table t(a.dataset);
  t.set_filters({{"continent", CategoryExclusion{{"Asia"}}}});
  const json p = panel_payload(t);
  std::vector<double> values;
  for (RowId r = 0; r < t.dataset().row_count(); ++r) {
    if (t.filter_mask()[r]) values.push_back(t.scalar_value("coverage", r));
  }
  const auto h = histogram(values, t.mapping("coverage").domain);
  for (const auto& c : p["columns"]) {
    if (c["id"] == "coverage") {
      EXPECT_EQ(c["histogram"]["counts"], json(h.counts));
    }
    if (c["id"] == "continent") {
      EXPECT_EQ(c["counts"][2], 0);
    }
  }
}

TEST(SessionService, ConcurrentCommandsSerialize) {
  SessionService svc;
  const auto id = svc.create(fixtures::health_table(200).dataset);
  ASSERT_NE(svc.find(id), nullptr);
  std::atomic<int> accepted{0};
  std::vector<std::thread> threads;
  for (int k = 0; k < 4; ++k) {
    threads.emplace_back([&, k] {
      for (int i = 0; i < 25; ++i) {
        for (;;) {
          auto s = svc.find(id);
          Command c = cmd(s->version(), "set_mode", {{"mode", (i + k) % 2 ? "overview" : "detail"}});
          c.session = id;
          if (std::holds_alternative<Delta>(svc.apply(c))) break;
        }
        ++accepted;
        Command read = cmd(0, "request_scene", {{"first", 0}, {"last", 5}});
        read.session = id;
        EXPECT_TRUE(std::holds_alternative<Delta>(svc.apply(read)));
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(accepted.load(), 100);
  EXPECT_EQ(svc.find(id)->version(), 100U);
  Command unknown = cmd(0, "snapshot");
  unknown.session = "missing";
  EXPECT_TRUE(std::holds_alternative<Rejection>(svc.apply(unknown)));
}
