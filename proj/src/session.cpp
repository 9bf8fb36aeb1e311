#include "strata/session.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <random>

#include "strata/error.hpp"

namespace strata {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& message) { throw ValidationError(message); }

const json& need(const json& j, std::string_view key, std::string_view op) {
  if (!j.is_object()) bad(std::string(op) + " payload must be an object");
  auto it = j.find(key);
  if (it == j.end()) bad(std::string(op) + " payload lacks '" + std::string(key) + "'");
  return *it;
}

std::string need_string(const json& j, std::string_view key, std::string_view op) {
  const json& v = need(j, key, op);
  if (!v.is_string()) bad(std::string(op) + " field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

std::size_t need_index(const json& j, std::string_view key, std::string_view op) {
  const json& v = need(j, key, op);
  if (!is_non_negative_integer(v)) bad(std::string(op) + " field '" + std::string(key) + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

const json& need_array(const json& j, std::string_view key, std::string_view op) {
  const json& v = need(j, key, op);
  if (!v.is_array()) bad(std::string(op) + " field '" + std::string(key) + "' must be an array");
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

json histogram_json(const Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}, {"missing", h.missing_count}};
}

std::string new_session_id(std::uint64_t counter) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%016llx%04llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(counter & 0xffff));
  return buf;
}

std::uint32_t aspects_for(std::string_view op) {
  if (op == "set_filters" || op == "set_grouping" || op == "set_sort" || op == "sort_groups" ||
      op == "toggle_aggregate") {
    return kAspectRows | kAspectLayout;
  }
  if (op == "set_selection") return kAspectSelection | kAspectLayout;
  if (op == "set_mode") return kAspectLayout;
  if (op == "set_encoding" || op == "move_column" || op == "combine_columns" || op == "set_matrix_grouping") {
    return kAspectColumns;
  }
  if (op == "set_mapping" || op == "resize_column") return kAspectColumns | kAspectRows | kAspectLayout;
  if (op == "restore") return kAspectRows | kAspectLayout | kAspectColumns | kAspectSelection;
  return 0;
}

}  // namespace

Command parse_command(const json& j) {
  if (!j.is_object()) bad("command must be a JSON object");
  Command c;
  if (auto it = j.find("session"); it != j.end()) {
    if (!it->is_string()) bad("command 'session' must be a string");
    c.session = it->get<std::string>();
  }
  auto ev = j.find("expected_version");
  if (ev == j.end() || !is_non_negative_integer(*ev)) bad("command needs a non-negative 'expected_version'");
  c.expected_version = ev->get<std::uint64_t>();
  auto op = j.find("op");
  if (op == j.end() || !op->is_string()) bad("command needs a string 'op'");
  c.op = op->get<std::string>();
  if (auto p = j.find("payload"); p != j.end()) {
    if (!p->is_object()) bad("command 'payload' must be an object");
    c.payload = *p;
  }
  return c;
}

json to_json(const Delta& d) {
  json j{{"type", "delta"},
         {"protocol_version", kProtocolVersion},
         {"version", d.version},
         {"changed", d.changed},
         {"changed_aspects", json::array()}};
  if (d.changed & kAspectRows) j["changed_aspects"].push_back("rows");
  if (d.changed & kAspectLayout) j["changed_aspects"].push_back("layout");
  if (d.changed & kAspectColumns) j["changed_aspects"].push_back("columns");
  if (d.changed & kAspectSelection) j["changed_aspects"].push_back("selection");
  if (d.scene) j["scene"] = scene_to_json(*d.scene);
  if (d.panel) j["panel"] = *d.panel;
  if (d.document) j["document"] = *d.document;
  if (d.column) j["column"] = *d.column;
  return j;
}

json to_json(const Rejection& r) {
  return {{"type", "rejection"},
          {"protocol_version", kProtocolVersion},
          {"reason", r.reason == Rejection::Reason::version_conflict ? "version_conflict" : "invalid"},
          {"current_version", r.current_version},
          {"message", r.message}};
}

json to_json(const Outcome& o) {
  return std::visit([](const auto& v) { return to_json(v); }, o);
}

json panel_payload(const Table& table) {
  const Dataset& ds = table.dataset();
  const RowMask& mask = table.filter_mask();
  json columns = json::array();
  for (std::size_t c = 0; c < ds.column_count(); ++c) {
    const ColumnDef& def = ds.column(c);
    json cj{{"id", def.id}, {"kind", to_string(def.kind)}};
    switch (def.kind) {
      case ColumnKind::numerical:
      case ColumnKind::matrix: {
        std::vector<double> values;
        if (def.kind == ColumnKind::numerical) {
          const auto all = ds.numbers(c);
          for (std::size_t r = 0; r < all.size(); ++r) {
            if (mask[r]) values.push_back(all[r]);
          }
        } else {
          for (std::size_t r = 0; r < ds.row_count(); ++r) {
            if (!mask[r]) continue;
            const auto slice = ds.matrix_row(c, static_cast<RowId>(r));
            values.insert(values.end(), slice.begin(), slice.end());
          }
        }
        const Domain domain = table.mapping(def.id).domain;
        cj["domain"] = {domain.min, domain.max};
        const bool any = std::any_of(values.begin(), values.end(), [](double v) { return !is_missing(v); });
        if (any) {
          cj["histogram"] = histogram_json(histogram(values, domain));
        } else {
          cj["histogram"] = nullptr;
          cj["missing"] = values.size();
        }
        break;
      }
      case ColumnKind::categorical: {
        const auto all = ds.categories(c);
        std::vector<std::int32_t> values;
        for (std::size_t r = 0; r < all.size(); ++r) {
          if (mask[r]) values.push_back(all[r]);
        }
        const CategoryCounts counts = category_counts(values, def.categories.size());
        cj["categories"] = def.categories;
        cj["counts"] = counts.counts;
        cj["missing"] = counts.missing_count;
        break;
      }
      case ColumnKind::text: {
        std::size_t present = 0;
        std::size_t missing = 0;
        for (std::size_t r = 0; r < ds.row_count(); ++r) {
          if (!mask[r]) continue;
          (ds.text(c, static_cast<RowId>(r)) ? present : missing) += 1;
        }
        cj["present"] = present;
        cj["missing"] = missing;
        break;
      }
    }
    columns.push_back(std::move(cj));
  }
  return {{"rows_total", ds.row_count()}, {"rows_filtered", table.filtered_count()}, {"columns", std::move(columns)}};
}

std::string export_csv(const Table& table) {
  const Dataset& ds = table.dataset();
  const auto& leaves = table.leaf_columns();
  const bool grouped = !table.state().grouping.empty();

  // One writer per output column.
  struct Out {
    std::string header;
    std::function<std::string(RowId)> value;
  };
  std::vector<Out> outs;
  auto scalar = [&](const std::string& id) {
    if (auto c = ds.find_column(id)) {
      const auto v = ds.numbers(*c);
      return Out{id, [v](RowId r) { return is_missing(v[r]) ? std::string() : shortest(v[r]); }};
    }
    auto v = std::make_shared<std::vector<double>>(table.scalar_values(id));
    return Out{id, [v](RowId r) { return is_missing((*v)[r]) ? std::string() : shortest((*v)[r]); }};
  };
  auto categorical = [&](const std::string& id) {
    const std::size_t c = ds.column_index(id);
    const auto v = ds.categories(c);
    const auto* cats = &ds.column(c).categories;
    return Out{id, [v, cats](RowId r) {
                 return v[r] == kMissingCategory ? std::string() : (*cats)[static_cast<std::size_t>(v[r])];
               }};
  };
  for (const auto& leaf : leaves) {
    switch (leaf.kind) {
      case CellKind::numerical:
      case CellKind::stacked:
        outs.push_back(scalar(leaf.source));
        break;
      case CellKind::categorical:
        outs.push_back(categorical(leaf.source));
        break;
      case CellKind::text: {
        const std::size_t c = ds.column_index(leaf.source);
        outs.push_back(Out{leaf.source, [&ds, c](RowId r) { return ds.text(c, r).value_or(std::string()); }});
        break;
      }
      case CellKind::matrix: {
        const std::size_t c = ds.column_index(leaf.source);
        const auto& def = ds.column(c);
        for (auto i : leaf.inner) {
          outs.push_back(Out{def.inner_labels[i], [&ds, c, i](RowId r) {
                               const double v = ds.matrix_row(c, r)[i];
                               return is_missing(v) ? std::string() : shortest(v);
                             }});
        }
        break;
      }
      case CellKind::interleaved:
      case CellKind::imposition:
        for (const auto& child : table.find_combined(leaf.source)->children) {
          outs.push_back(table.is_scalar(child) ? scalar(child) : categorical(child));
        }
        break;
    }
  }

  std::string group_header = "group";
  auto taken = [&](const std::string& name) {
    return std::any_of(outs.begin(), outs.end(), [&](const Out& o) { return o.header == name; });
  };
  for (int n = 1; taken(group_header); ++n) group_header = "group_" + std::to_string(n);

  std::string out;
  csv::Row header;
  if (grouped) header.push_back(group_header);
  for (const auto& o : outs) header.push_back(o.header);
  csv::write_row(out, header);

  const auto& tree = table.tree();
  csv::Row line(header.size());
  auto emit = [&](RowId r, const std::string& group) {
    std::size_t k = 0;
    if (grouped) line[k++] = group;
    for (const auto& o : outs) line[k++] = o.value(r);
    csv::write_row(out, line);
  };
  static const std::string kNone;
  for (const auto& rr : table.traverse()) {
    if (rr.kind == RenderRow::Kind::item) {
      emit(rr.row, kNone);
    } else if (rr.kind == RenderRow::Kind::group) {
      const auto& node = tree.nodes[rr.node];
      std::string label;
      for (const auto& part : node.path) {
        if (!label.empty()) label += " | ";
        label += part;
      }
      for (RowId r : node.members) emit(r, label);
    }
  }
  return out;
}

// --- Session -------------------------------------------------------------------

Session::Session(std::string id, std::shared_ptr<const Dataset> dataset, LayoutParams params)
    : id_(std::move(id)), table_(std::move(dataset)), params_(params) {
  params_.validate();
}

Table Session::table() const {
  std::lock_guard lock(mutex_);
  return table_;
}

std::uint64_t Session::version() const {
  std::lock_guard lock(mutex_);
  return table_.version();
}

json Session::snapshot() const {
  const Table t = table();
  return state_to_json(t.state(), t.dataset());
}

std::string Session::export_csv() const { return strata::export_csv(table()); }

Scene Session::scene_for(const Table& table, const LayoutParams& params, std::size_t first, std::size_t end) {
  const auto rows = table.traverse();
  const Layout layout = compute_layout(table, rows, params);
  end = std::min(end, rows.size());
  first = std::min(first, end);
  return build_scene(table, rows, layout, RowRange{first, end});
}

Scene Session::scene(std::size_t first, std::size_t end) const {
  return scene_for(table(), params_, first, end);
}

Outcome Session::apply(const Command& c) {
  std::unique_lock lock(mutex_);
  const std::uint64_t current = table_.version();
  const bool reads = c.op == "request_scene" || c.op == "snapshot";
  if (!reads && c.expected_version != current) {
    return Rejection{Rejection::Reason::version_conflict, current,
                     "expected version " + std::to_string(c.expected_version) + " but session is at " +
                         std::to_string(current)};
  }
  try {
    if (c.op == "snapshot") {
      Delta d;
      d.version = current;
      d.document = state_to_json(table_.state(), table_.dataset());
      return d;
    }
    if (c.op == "request_scene") {
      const json& p = c.payload;
      std::size_t first = 0;
      std::size_t end = 0;
      if (p.contains("scroll_top")) {
        const Table snap = table_;
        lock.unlock();
        const auto rows = snap.traverse();
        const Layout layout = compute_layout(snap, rows, params_);
        const json& st = p["scroll_top"];
        if (!st.is_number() || st.get<double>() < 0) bad("scroll_top must be a non-negative number");
        const double viewport = p.contains("viewport_h") && p["viewport_h"].is_number()
                                    ? p["viewport_h"].get<double>()
                                    : params_.viewport_h;
        const std::size_t overscan = p.contains("overscan") ? need_index(p, "overscan", c.op) : 0;
        const RowRange r = visible_range(layout, st.get<double>(), viewport, overscan);
        lock.lock();
        window_first_ = r.first;
        window_end_ = r.end;
        Delta d;
        d.version = snap.version();
        d.scene = build_scene(snap, rows, layout, r);
        return d;
      }
      first = need_index(p, "first", c.op);
      end = need_index(p, "last", c.op);
      if (end < first) bad("request_scene needs first <= last");
      window_first_ = first;
      window_end_ = end;
      const Table snap = table_;
      lock.unlock();
      Delta d;
      d.version = snap.version();
      d.scene = scene_for(snap, params_, first, end);
      return d;
    }
    Delta d = mutate(c);
    const Table snap = table_;
    const std::size_t first = window_first_;
    const std::size_t end = window_end_;
    lock.unlock();
    d.version = snap.version();
    d.changed = aspects_for(c.op);
    d.scene = scene_for(snap, params_, first, end);
    d.panel = panel_payload(snap);
    return d;
  } catch (const Error& e) {
    if (!lock.owns_lock()) lock.lock();
    return Rejection{Rejection::Reason::invalid, table_.version(), e.what()};
  } catch (const json::exception& e) {
    if (!lock.owns_lock()) lock.lock();
    return Rejection{Rejection::Reason::invalid, table_.version(), std::string("malformed payload: ") + e.what()};
  }
}

// Runs under the session lock. Either mutates the table once or throws with
// the table untouched.
Delta Session::mutate(const Command& c) {
  const json& p = c.payload;
  const std::string& op = c.op;
  Delta d;
  if (op == "set_filters") {
    std::vector<FilterSpec> filters;
    for (const auto& f : need_array(p, "filters", op)) filters.push_back(filter_from_json(f));
    table_.set_filters(std::move(filters));
  } else if (op == "set_grouping") {
    std::vector<GroupCriterion> criteria;
    for (const auto& g : need_array(p, "criteria", op)) criteria.push_back(criterion_from_json(g));
    table_.set_grouping(std::move(criteria));
  } else if (op == "set_sort") {
    std::vector<SortCriterion> criteria;
    for (const auto& s : need_array(p, "criteria", op)) criteria.push_back(sort_from_json(s));
    table_.set_sort(std::move(criteria));
  } else if (op == "sort_groups") {
    table_.sort_groups(group_sort_from_json(p));
  } else if (op == "toggle_aggregate") {
    const json& a = need(p, "aggregated", op);
    if (!a.is_boolean()) bad("toggle_aggregate field 'aggregated' must be a boolean");
    table_.toggle_aggregate(need_string(p, "group", op), a.get<bool>());
  } else if (op == "set_selection") {
    std::vector<RowId> rows;
    for (const auto& r : need_array(p, "rows", op)) {
      if (!is_non_negative_integer(r) || r.get<std::uint64_t>() > 0xffffffffULL) bad("selection rows must be row indices");
      rows.push_back(static_cast<RowId>(r.get<std::uint64_t>()));
    }
    table_.set_selection(std::move(rows));
  } else if (op == "set_mode") {
    table_.set_mode(layout_mode_from_string(need_string(p, "mode", op)));
  } else if (op == "set_encoding") {
    const std::string slot = p.contains("slot") ? need_string(p, "slot", op) : "item";
    if (slot != "item" && slot != "aggregate") bad("set_encoding slot must be item or aggregate");
    const json& e = need(p, "encoding", op);
    std::optional<EncodingKind> kind;
    if (!e.is_null()) {
      if (!e.is_string()) bad("set_encoding field 'encoding' must be a string or null");
      kind = encoding_from_string(e.get<std::string>());
    }
    const std::string group = p.contains("group") ? need_string(p, "group", op) : std::string();
    table_.set_encoding(need_string(p, "column", op), slot == "item" ? EncodingSlot::item : EncodingSlot::aggregate,
                        kind, group);
  } else if (op == "set_mapping") {
    table_.set_mapping(need_string(p, "column", op), mapping_from_json(need(p, "mapping", op)));
  } else if (op == "combine_columns") {
    const CombinedKind kind = combined_kind_from_string(need_string(p, "kind", op));
    std::vector<std::string> children;
    if (p.contains("children")) {
      for (const auto& ch : need_array(p, "children", op)) {
        if (!ch.is_string()) bad("combine_columns children must be column ids");
        children.push_back(ch.get<std::string>());
      }
    }
    CombineOptions o;
    if (p.contains("id")) o.id = need_string(p, "id", op);
    if (p.contains("label")) o.label = need_string(p, "label", op);
    if (p.contains("script")) o.script = need_string(p, "script", op);
    if (p.contains("reducer")) o.reducer = reducer_from_string(need_string(p, "reducer", op));
    if (p.contains("position")) o.position = need_index(p, "position", op);
    d.column = table_.combine_columns(kind, std::move(children), o);
  } else if (op == "move_column") {
    table_.move_column(need_string(p, "column", op), need_index(p, "index", op));
  } else if (op == "resize_column") {
    const json& w = need(p, "width", op);
    if (!w.is_number()) bad("resize_column field 'width' must be a number");
    table_.resize_column(need_string(p, "column", op), w.get<double>());
  } else if (op == "set_matrix_grouping") {
    const json& g = need(p, "grouping", op);
    std::optional<MatrixColumnGrouping> grouping;
    if (!g.is_null()) grouping = matrix_grouping_from_json(g);
    table_.set_matrix_grouping(need_string(p, "column", op), grouping);
  } else if (op == "restore") {
    const StateDocument doc = state_from_json(need(p, "document", op));
    Table next = table_;
    restore_document(next, doc);
    table_ = std::move(next);
  } else {
    bad("unknown op '" + op + "'");
  }
  return d;
}

// --- SessionService ----------------------------------------------------------------

std::string SessionService::create(std::string_view csv, std::optional<std::string_view> descriptor) {
  return create(std::make_shared<const Dataset>(load_dataset(csv, descriptor)));
}

std::string SessionService::create(std::shared_ptr<const Dataset> dataset) {
  std::lock_guard lock(mutex_);
  std::string id = new_session_id(++counter_);
  sessions_.emplace(id, std::make_shared<Session>(id, std::move(dataset), params_));
  return id;
}

std::shared_ptr<Session> SessionService::find(std::string_view id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Outcome SessionService::apply(const Command& command) {
  auto session = find(command.session);
  if (!session) return Rejection{Rejection::Reason::invalid, 0, "unknown session '" + command.session + "'"};
  return session->apply(command);
}

}  // namespace strata
