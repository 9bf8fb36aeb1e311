#include "strata/state_document.hpp"

#include <algorithm>
#include <set>

#include "strata/error.hpp"

namespace strata {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& message) { throw ValidationError("state document: " + message); }

const json& field(const json& obj, std::string_view key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) invalid(std::string(where) + " lacks '" + std::string(key) + "'");
  return *it;
}

void expect(bool ok, const std::string& message) {
  if (!ok) invalid(message);
}

std::string str(const json& j, std::string_view what) {
  expect(j.is_string(), std::string(what) + " must be a string");
  return j.get<std::string>();
}

double num(const json& j, std::string_view what) {
  expect(j.is_number(), std::string(what) + " must be a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, std::string_view what) {
  expect(j.is_array(), std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(num(v, what));
  return out;
}

std::vector<std::string> strings(const json& j, std::string_view what) {
  expect(j.is_array(), std::string(what) + " must be an array");
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(str(v, what));
  return out;
}

std::vector<RowId> row_ids(const json& j, std::string_view what) {
  expect(j.is_array(), std::string(what) + " must be an array");
  std::vector<RowId> out;
  for (const auto& v : j) {
    expect(is_non_negative_integer(v) && v.get<std::uint64_t>() <= 0xffffffffULL,
           std::string(what) + " entries must be row indices");
    out.push_back(static_cast<RowId>(v.get<std::uint64_t>()));
  }
  return out;
}

void only_keys(const json& obj, std::initializer_list<std::string_view> keys, std::string_view where) {
  expect(obj.is_object(), std::string(where) + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      invalid("unknown field '" + k + "' in " + std::string(where));
    }
  }
}

// Converts enum-parsing errors into document errors.
template <typename F>
auto parse_name(F&& f, const json& j, std::string_view what) {
  const std::string name = str(j, what);
  try {
    return f(name);
  } catch (const Error& e) {
    invalid(e.what());
  }
}

}  // namespace

// --- pieces ------------------------------------------------------------------

json to_json(const FilterSpec& f) {
  json j{{"column", f.column}};
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NumericRange>) {
          j["type"] = "numeric_range";
          j["lo"] = p.lo;
          j["hi"] = p.hi;
        } else if constexpr (std::is_same_v<P, CategoryExclusion>) {
          j["type"] = "category_exclusion";
          j["categories"] = p.categories;
        } else if constexpr (std::is_same_v<P, TextMatch>) {
          j["type"] = "text_match";
          j["mode"] = p.mode == TextMatch::Mode::regex ? "regex" : "substring";
          j["pattern"] = p.pattern;
        } else {
          j["type"] = "require_present";
        }
      },
      f.predicate);
  return j;
}

FilterSpec filter_from_json(const json& j) {
  expect(j.is_object(), "filter must be an object");
  FilterSpec f;
  f.column = str(field(j, "column", "filter"), "filter column");
  const std::string type = str(field(j, "type", "filter"), "filter type");
  if (type == "numeric_range") {
    only_keys(j, {"column", "type", "lo", "hi"}, "numeric_range filter");
    f.predicate = NumericRange{num(field(j, "lo", "filter"), "lo"), num(field(j, "hi", "filter"), "hi")};
  } else if (type == "category_exclusion") {
    only_keys(j, {"column", "type", "categories"}, "category_exclusion filter");
    f.predicate = CategoryExclusion{strings(field(j, "categories", "filter"), "categories")};
  } else if (type == "text_match") {
    only_keys(j, {"column", "type", "mode", "pattern"}, "text_match filter");
    TextMatch m;
    const std::string mode = j.contains("mode") ? str(j["mode"], "mode") : "substring";
    if (mode == "regex") {
      m.mode = TextMatch::Mode::regex;
    } else if (mode != "substring") {
      invalid("unknown text match mode '" + mode + "'");
    }
    m.pattern = str(field(j, "pattern", "filter"), "pattern");
    f.predicate = m;
  } else if (type == "require_present") {
    only_keys(j, {"column", "type"}, "require_present filter");
    f.predicate = RequirePresent{};
  } else {
    invalid("unknown filter type '" + type + "'");
  }
  return f;
}

json to_json(const GroupCriterion& c) {
  return std::visit(
      [](const auto& g) -> json {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, ByCategorical>) {
          return {{"by", "categorical"}, {"column", g.column}};
        } else if constexpr (std::is_same_v<G, ByBins>) {
          return {{"by", "bins"}, {"column", g.column}, {"thresholds", g.thresholds}};
        } else {
          return {{"by", "selection"}, {"rows", g.rows}};
        }
      },
      c);
}

GroupCriterion criterion_from_json(const json& j) {
  expect(j.is_object(), "grouping criterion must be an object");
  const std::string by = str(field(j, "by", "grouping criterion"), "by");
  if (by == "categorical") {
    only_keys(j, {"by", "column"}, "categorical grouping");
    return ByCategorical{str(field(j, "column", "grouping"), "column")};
  }
  if (by == "bins") {
    only_keys(j, {"by", "column", "thresholds"}, "bins grouping");
    return ByBins{str(field(j, "column", "grouping"), "column"),
                  numbers(field(j, "thresholds", "grouping"), "thresholds")};
  }
  if (by == "selection") {
    only_keys(j, {"by", "rows"}, "selection grouping");
    return BySelection{row_ids(field(j, "rows", "grouping"), "rows")};
  }
  invalid("unknown grouping '" + by + "'");
}

json to_json(const SortCriterion& c) {
  json j{{"column", c.column}, {"direction", to_string(c.direction)}};
  if (c.statistic) j["statistic"] = to_string(*c.statistic);
  return j;
}

SortCriterion sort_from_json(const json& j) {
  only_keys(j, {"column", "direction", "statistic"}, "sort criterion");
  SortCriterion c;
  c.column = str(field(j, "column", "sort criterion"), "column");
  if (j.contains("direction")) c.direction = parse_name(direction_from_string, j["direction"], "direction");
  if (j.contains("statistic")) c.statistic = parse_name(statistic_from_string, j["statistic"], "statistic");
  return c;
}

json to_json(const GroupSort& g) {
  json j{{"by", to_string(g.by)}, {"direction", to_string(g.direction)}};
  if (g.by == GroupSort::By::statistic) {
    j["column"] = g.column;
    j["statistic"] = to_string(g.statistic);
  }
  return j;
}

GroupSort group_sort_from_json(const json& j) {
  only_keys(j, {"by", "direction", "column", "statistic"}, "group sort");
  GroupSort g;
  g.by = parse_name(group_sort_by_from_string, field(j, "by", "group sort"), "by");
  if (j.contains("direction")) g.direction = parse_name(direction_from_string, j["direction"], "direction");
  if (g.by == GroupSort::By::statistic) {
    g.column = str(field(j, "column", "group sort"), "column");
    if (j.contains("statistic")) g.statistic = parse_name(statistic_from_string, j["statistic"], "statistic");
  }
  return g;
}

json to_json(const MappingSpec& m) {
  return {{"kind", to_string(m.kind)}, {"domain", {m.domain.min, m.domain.max}}, {"clip", m.clip}};
}

MappingSpec mapping_from_json(const json& j) {
  only_keys(j, {"kind", "domain", "clip"}, "mapping");
  MappingSpec m;
  if (j.contains("kind")) m.kind = parse_name(mapping_kind_from_string, j["kind"], "mapping kind");
  const auto d = numbers(field(j, "domain", "mapping"), "domain");
  expect(d.size() == 2, "mapping domain must be [min, max]");
  m.domain = Domain{d[0], d[1]};
  if (j.contains("clip")) {
    expect(j["clip"].is_boolean(), "clip must be a boolean");
    m.clip = j["clip"].get<bool>();
  }
  return m;
}

json to_json(const MatrixColumnGrouping& g) {
  return {{"thresholds", g.thresholds}, {"aggregated", std::vector<std::string>(g.aggregated.begin(), g.aggregated.end())}};
}

MatrixColumnGrouping matrix_grouping_from_json(const json& j) {
  only_keys(j, {"thresholds", "aggregated"}, "matrix grouping");
  MatrixColumnGrouping g;
  if (j.contains("thresholds")) g.thresholds = numbers(j["thresholds"], "thresholds");
  if (j.contains("aggregated")) {
    const auto labels = strings(j["aggregated"], "aggregated");
    g.aggregated.insert(labels.begin(), labels.end());
  }
  return g;
}

// --- document ------------------------------------------------------------------

json state_to_json(const TableState& s, const Dataset& dataset) {
  json combined = json::array();
  for (const auto& c : s.combined) {
    json cj{{"id", c.id}, {"label", c.label}, {"kind", to_string(c.kind)}, {"children", c.children}};
    if (c.kind == CombinedKind::stacked) {
      cj["weights"] = c.weights;
      cj["child_widths"] = c.child_widths;
    }
    if (c.kind == CombinedKind::reducer) cj["reducer"] = to_string(c.reducer);
    if (c.kind == CombinedKind::scripted) cj["script"] = c.script;
    combined.push_back(std::move(cj));
  }
  json mappings = json::object();
  for (const auto& [id, m] : s.mappings) mappings[id] = to_json(m);
  json filters = json::array();
  for (const auto& f : s.filters) filters.push_back(to_json(f));
  json grouping = json::array();
  for (const auto& g : s.grouping) grouping.push_back(to_json(g));
  json sorting = json::array();
  for (const auto& c : s.sorting) sorting.push_back(to_json(c));
  json encodings = json::object();
  for (const auto& [leaf, o] : s.encodings) {
    json oj = json::object();
    if (o.item) oj["item"] = to_string(*o.item);
    if (o.aggregate) oj["aggregate"] = to_string(*o.aggregate);
    if (!o.groups.empty()) {
      json groups = json::object();
      for (const auto& [gid, k] : o.groups) groups[gid] = to_string(k);
      oj["groups"] = std::move(groups);
    }
    encodings[leaf] = std::move(oj);
  }
  json matrix = json::object();
  for (const auto& [id, g] : s.matrix_groupings) matrix[id] = to_json(g);

  return json{{"protocol_version", kProtocolVersion},
              {"fingerprint", dataset.fingerprint_hex()},
              {"version", s.version},
              {"columns", s.columns},
              {"combined", std::move(combined)},
              {"widths", s.widths},
              {"mappings", std::move(mappings)},
              {"filters", std::move(filters)},
              {"grouping", std::move(grouping)},
              {"sorting", std::move(sorting)},
              {"group_sort", to_json(s.group_sort)},
              {"aggregated", std::vector<std::string>(s.aggregated.begin(), s.aggregated.end())},
              {"selection", s.selection},
              {"mode", to_string(s.mode)},
              {"encodings", std::move(encodings)},
              {"matrix_groupings", std::move(matrix)}};
}

StateDocument state_from_json(const json& doc) {
  only_keys(doc, {"protocol_version", "fingerprint", "version", "columns", "combined", "widths", "mappings",
                  "filters", "grouping", "sorting", "group_sort", "aggregated", "selection", "mode",
                  "encodings", "matrix_groupings"},
            "document");
  StateDocument out;
  const json& pv = field(doc, "protocol_version", "document");
  expect(pv.is_number_integer(), "protocol_version must be an integer");
  out.protocol_version = pv.get<int>();
  if (out.protocol_version != kProtocolVersion) {
    invalid("unsupported protocol_version " + std::to_string(out.protocol_version));
  }
  if (doc.contains("fingerprint") && !doc["fingerprint"].is_null()) {
    out.fingerprint = str(doc["fingerprint"], "fingerprint");
  }
  TableState& s = out.state;
  if (doc.contains("version")) {
    expect(is_non_negative_integer(doc["version"]), "version must be a non-negative integer");
    s.version = doc["version"].get<std::uint64_t>();
  }
  s.columns = strings(field(doc, "columns", "document"), "columns");
  if (doc.contains("combined")) {
    expect(doc["combined"].is_array(), "combined must be an array");
    for (const auto& cj : doc["combined"]) {
      only_keys(cj, {"id", "label", "kind", "children", "weights", "child_widths", "reducer", "script"},
                "combined column");
      CombinedColumn c;
      c.id = str(field(cj, "id", "combined column"), "id");
      c.label = cj.contains("label") ? str(cj["label"], "label") : c.id;
      c.kind = parse_name(combined_kind_from_string, field(cj, "kind", "combined column"), "kind");
      if (cj.contains("children")) c.children = strings(cj["children"], "children");
      if (cj.contains("weights")) c.weights = numbers(cj["weights"], "weights");
      if (cj.contains("child_widths")) c.child_widths = numbers(cj["child_widths"], "child_widths");
      if (cj.contains("reducer")) c.reducer = parse_name(reducer_from_string, cj["reducer"], "reducer");
      if (cj.contains("script")) c.script = str(cj["script"], "script");
      if (c.kind == CombinedKind::scripted) expect(!c.script.empty(), "scripted column needs a script");
      s.combined.push_back(std::move(c));
    }
  }
  if (doc.contains("widths")) {
    expect(doc["widths"].is_object(), "widths must be an object");
    for (const auto& [k, v] : doc["widths"].items()) s.widths[k] = num(v, "width");
  }
  if (doc.contains("mappings")) {
    expect(doc["mappings"].is_object(), "mappings must be an object");
    for (const auto& [k, v] : doc["mappings"].items()) s.mappings[k] = mapping_from_json(v);
  }
  auto each = [&](std::string_view key, auto&& fn) {
    if (!doc.contains(key)) return;
    const json& arr = doc[std::string(key)];
    expect(arr.is_array(), std::string(key) + " must be an array");
    for (const auto& v : arr) fn(v);
  };
  each("filters", [&](const json& v) { s.filters.push_back(filter_from_json(v)); });
  each("grouping", [&](const json& v) { s.grouping.push_back(criterion_from_json(v)); });
  each("sorting", [&](const json& v) { s.sorting.push_back(sort_from_json(v)); });
  if (doc.contains("group_sort")) s.group_sort = group_sort_from_json(doc["group_sort"]);
  if (doc.contains("aggregated")) {
    const auto ids = strings(doc["aggregated"], "aggregated");
    s.aggregated.insert(ids.begin(), ids.end());
  }
  if (doc.contains("selection")) {
    s.selection = row_ids(doc["selection"], "selection");
    std::sort(s.selection.begin(), s.selection.end());
    s.selection.erase(std::unique(s.selection.begin(), s.selection.end()), s.selection.end());
  }
  if (doc.contains("mode")) s.mode = parse_name(layout_mode_from_string, doc["mode"], "mode");
  if (doc.contains("encodings")) {
    expect(doc["encodings"].is_object(), "encodings must be an object");
    for (const auto& [leaf, oj] : doc["encodings"].items()) {
      only_keys(oj, {"item", "aggregate", "groups"}, "encoding override");
      EncodingOverride o;
      if (oj.contains("item")) o.item = parse_name(encoding_from_string, oj["item"], "encoding");
      if (oj.contains("aggregate")) o.aggregate = parse_name(encoding_from_string, oj["aggregate"], "encoding");
      if (oj.contains("groups")) {
        expect(oj["groups"].is_object(), "encoding groups must be an object");
        for (const auto& [gid, k] : oj["groups"].items()) {
          o.groups[gid] = parse_name(encoding_from_string, k, "encoding");
        }
      }
      s.encodings[leaf] = std::move(o);
    }
  }
  if (doc.contains("matrix_groupings")) {
    expect(doc["matrix_groupings"].is_object(), "matrix_groupings must be an object");
    for (const auto& [id, g] : doc["matrix_groupings"].items()) {
      s.matrix_groupings[id] = matrix_grouping_from_json(g);
    }
  }
  return out;
}

StateDocument parse_state_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("state document is not valid JSON: ") + e.what());
  }
  return state_from_json(doc);
}

void restore_document(Table& table, const StateDocument& doc) {
  if (doc.fingerprint && *doc.fingerprint != table.dataset().fingerprint_hex()) {
    throw ValidationError("state document fingerprint " + *doc.fingerprint +
                          " does not match dataset " + table.dataset().fingerprint_hex());
  }
  table.restore(doc.state);
}

}  // namespace strata
