#include "strata/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <unordered_set>

#include <json.hpp>

#include "strata/error.hpp"
#include "strata/mapping.hpp"

namespace strata {

namespace {

constexpr int kPaletteSize = 10;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void text(std::string_view s) {
    const std::uint64_t n = s.size();
    bytes(&n, sizeof n);
    bytes(s.data(), s.size());
  }
  void number(double v) {
    const std::uint64_t bits = is_missing(v) ? 0x7ff8000000000000ULL : std::bit_cast<std::uint64_t>(v);
    bytes(&bits, sizeof bits);
  }
  template <typename T>
  void value(T v) {
    bytes(&v, sizeof v);
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::vector<int> default_colors(std::size_t n) {
  std::vector<int> colors(n);
  for (std::size_t i = 0; i < n; ++i) colors[i] = static_cast<int>(i % kPaletteSize);
  return colors;
}

Domain observed_domain(std::span<const double> values) {
  try {
    return derive_domain(values);
  } catch (const DomainError&) {
    return Domain{0.0, 1.0};
  }
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numerical: return "numerical";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::text: return "text";
    case ColumnKind::matrix: return "matrix";
  }
  return "text";
}

ColumnKind column_kind_from_string(std::string_view name) {
  if (name == "numerical") return ColumnKind::numerical;
  if (name == "categorical") return ColumnKind::categorical;
  if (name == "text") return ColumnKind::text;
  if (name == "matrix") return ColumnKind::matrix;
  throw SchemaError("unknown column kind '" + std::string(name) + "'");
}

bool is_missing_token(std::string_view token) {
  token = trim(token);
  return token.empty() || iequals(token, "na") || iequals(token, "nan") || token == "-";
}

std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), last, v, std::chars_format::general);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// DatasetBuilder

DatasetBuilder& DatasetBuilder::add_numerical(std::string id, std::string label,
                                              std::vector<double> values,
                                              std::optional<Domain> domain) {
  if (values.size() != row_count_) {
    throw SchemaError("column '" + id + "' has " + std::to_string(values.size()) +
                      " values, expected " + std::to_string(row_count_));
  }
  ColumnDef def;
  def.id = std::move(id);
  def.label = label.empty() ? def.id : std::move(label);
  def.kind = ColumnKind::numerical;
  def.domain = domain ? *domain : observed_domain(values);
  defs_.push_back(std::move(def));
  numbers_.push_back(std::move(values));
  categories_.emplace_back();
  texts_.emplace_back();
  return *this;
}

DatasetBuilder& DatasetBuilder::add_categorical(std::string id, std::string label,
                                                std::vector<std::string> categories,
                                                std::vector<std::int32_t> values) {
  if (values.size() != row_count_) {
    throw SchemaError("column '" + id + "' has " + std::to_string(values.size()) +
                      " values, expected " + std::to_string(row_count_));
  }
  if (categories.empty()) throw SchemaError("categorical column '" + id + "' has no categories");
  std::unordered_set<std::string> seen;
  for (const auto& c : categories) {
    if (!seen.insert(c).second) {
      throw SchemaError("categorical column '" + id + "' repeats category '" + c + "'");
    }
  }
  for (auto v : values) {
    if (v != kMissingCategory && (v < 0 || static_cast<std::size_t>(v) >= categories.size())) {
      throw SchemaError("categorical column '" + id + "' has out-of-range index " +
                        std::to_string(v));
    }
  }
  ColumnDef def;
  def.id = std::move(id);
  def.label = label.empty() ? def.id : std::move(label);
  def.kind = ColumnKind::categorical;
  def.color_indices = default_colors(categories.size());
  def.categories = std::move(categories);
  defs_.push_back(std::move(def));
  numbers_.emplace_back();
  categories_.push_back(std::move(values));
  texts_.emplace_back();
  return *this;
}

DatasetBuilder& DatasetBuilder::add_text(std::string id, std::string label,
                                         std::vector<std::optional<std::string>> values) {
  if (values.size() != row_count_) {
    throw SchemaError("column '" + id + "' has " + std::to_string(values.size()) +
                      " values, expected " + std::to_string(row_count_));
  }
  ColumnDef def;
  def.id = std::move(id);
  def.label = label.empty() ? def.id : std::move(label);
  def.kind = ColumnKind::text;
  defs_.push_back(std::move(def));
  numbers_.emplace_back();
  categories_.emplace_back();
  texts_.push_back(std::move(values));
  return *this;
}

DatasetBuilder& DatasetBuilder::add_matrix(std::string id, std::string label,
                                           std::vector<std::string> inner_labels, SecondKey key,
                                           std::vector<double> values,
                                           std::optional<Domain> domain) {
  if (inner_labels.empty()) throw SchemaError("matrix column '" + id + "' has no inner columns");
  if (key.values.size() != inner_labels.size()) {
    throw SchemaError("matrix column '" + id + "' second key has " +
                      std::to_string(key.values.size()) + " values for " +
                      std::to_string(inner_labels.size()) + " inner columns");
  }
  if (values.size() != row_count_ * inner_labels.size()) {
    throw SchemaError("matrix column '" + id + "' has wrong value count");
  }
  if (key.numbers.empty()) {
    key.numeric = !key.values.empty();
    for (const auto& v : key.values) {
      auto parsed = parse_number(v);
      if (!parsed) {
        key.numeric = false;
        break;
      }
      key.numbers.push_back(*parsed);
    }
    if (!key.numeric) key.numbers.clear();
  }
  ColumnDef def;
  def.id = std::move(id);
  def.label = label.empty() ? def.id : std::move(label);
  def.kind = ColumnKind::matrix;
  def.domain = domain ? *domain : observed_domain(values);
  def.inner_labels = std::move(inner_labels);
  def.key = std::move(key);
  defs_.push_back(std::move(def));
  numbers_.push_back(std::move(values));
  categories_.emplace_back();
  texts_.emplace_back();
  return *this;
}

Dataset DatasetBuilder::build() && {
  Dataset ds;
  ds.row_count_ = row_count_;
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    const auto& d = defs_[i];
    if (d.id.empty()) throw SchemaError("column " + std::to_string(i) + " has an empty id");
    if (!(d.domain.min <= d.domain.max)) {
      throw SchemaError("column '" + d.id + "' has an inverted domain");
    }
    if (!ds.index_.emplace(d.id, i).second) throw SchemaError("duplicate column id '" + d.id + "'");
  }
  Fnv1a h;
  h.value<std::uint64_t>(row_count_);
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    const auto& d = defs_[i];
    h.text(d.id);
    h.text(d.label);
    h.value(static_cast<int>(d.kind));
    for (const auto& c : d.categories) h.text(c);
    for (const auto& c : d.inner_labels) h.text(c);
    h.text(d.key.label);
    for (const auto& c : d.key.values) h.text(c);
    for (double v : numbers_[i]) h.number(v);
    for (auto v : categories_[i]) h.value(v);
    for (const auto& t : texts_[i]) {
      h.value<char>(t ? 1 : 0);
      if (t) h.text(*t);
    }
  }
  ds.fingerprint_ = h.digest();
  ds.defs_ = std::move(defs_);
  ds.numbers_ = std::move(numbers_);
  ds.categories_ = std::move(categories_);
  ds.texts_ = std::move(texts_);
  return ds;
}

// ---------------------------------------------------------------------------
// Dataset

std::optional<std::size_t> Dataset::find_column(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dataset::column_index(std::string_view id) const {
  if (auto i = find_column(id)) return *i;
  throw LookupError("unknown column '" + std::string(id) + "'");
}

const ColumnDef& Dataset::column(std::string_view id) const { return defs_[column_index(id)]; }

std::span<const double> Dataset::numbers(std::size_t column) const {
  if (defs_.at(column).kind != ColumnKind::numerical) {
    throw LookupError("column '" + defs_[column].id + "' is not numerical");
  }
  return numbers_[column];
}

std::span<const std::int32_t> Dataset::categories(std::size_t column) const {
  if (defs_.at(column).kind != ColumnKind::categorical) {
    throw LookupError("column '" + defs_[column].id + "' is not categorical");
  }
  return categories_[column];
}

const std::optional<std::string>& Dataset::text(std::size_t column, RowId row) const {
  if (defs_.at(column).kind != ColumnKind::text) {
    throw LookupError("column '" + defs_[column].id + "' is not text");
  }
  return texts_[column].at(row);
}

std::span<const double> Dataset::matrix_values(std::size_t column) const {
  if (defs_.at(column).kind != ColumnKind::matrix) {
    throw LookupError("column '" + defs_[column].id + "' is not a matrix");
  }
  return numbers_[column];
}

std::span<const double> Dataset::matrix_row(std::size_t column, RowId row) const {
  const auto values = matrix_values(column);
  const std::size_t w = defs_[column].inner_labels.size();
  return values.subspan(static_cast<std::size_t>(row) * w, w);
}

bool Dataset::is_missing(std::size_t column, RowId row) const {
  const auto& d = defs_.at(column);
  switch (d.kind) {
    case ColumnKind::numerical: return strata::is_missing(numbers_[column][row]);
    case ColumnKind::categorical: return categories_[column][row] == kMissingCategory;
    case ColumnKind::text: return !texts_[column][row].has_value();
    case ColumnKind::matrix: {
      const auto slice = matrix_row(column, row);
      return std::all_of(slice.begin(), slice.end(), [](double v) { return strata::is_missing(v); });
    }
  }
  return true;
}

CellValue Dataset::cell(RowId row, std::string_view column_id) const {
  const std::size_t c = column_index(column_id);
  if (row >= row_count_) throw LookupError("unknown row id " + std::to_string(row));
  switch (defs_[c].kind) {
    case ColumnKind::numerical: {
      const double v = numbers_[c][row];
      if (strata::is_missing(v)) return MissingValue{};
      return v;
    }
    case ColumnKind::categorical: {
      const auto v = categories_[c][row];
      if (v == kMissingCategory) return MissingValue{};
      return CategoryValue{v};
    }
    case ColumnKind::text: {
      const auto& t = texts_[c][row];
      if (!t) return MissingValue{};
      return *t;
    }
    case ColumnKind::matrix: {
      MatrixSlice slice;
      for (double v : matrix_row(c, row)) {
        slice.push_back(strata::is_missing(v) ? std::nullopt : std::optional<double>(v));
      }
      return slice;
    }
  }
  return MissingValue{};
}

std::string Dataset::fingerprint_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint_));
  return buf;
}

// ---------------------------------------------------------------------------
// Schema inference and loading

std::vector<ColumnDef> infer_schema(const std::vector<csv::Row>& sample_rows,
                                    std::size_t max_cat_cardinality,
                                    const std::vector<std::string>& header) {
  if (sample_rows.empty()) throw SchemaError("cannot infer a schema from an empty sample");
  const std::size_t width = sample_rows.front().size();
  for (std::size_t r = 0; r < sample_rows.size(); ++r) {
    if (sample_rows[r].size() != width) {
      throw SchemaError("row " + std::to_string(r) + " has " +
                        std::to_string(sample_rows[r].size()) + " fields, expected " +
                        std::to_string(width));
    }
  }
  if (!header.empty() && header.size() != width) {
    throw SchemaError("header has " + std::to_string(header.size()) + " fields, rows have " +
                      std::to_string(width));
  }

  std::vector<ColumnDef> defs(width);
  for (std::size_t c = 0; c < width; ++c) {
    ColumnDef& def = defs[c];
    def.id = header.empty() ? "c" + std::to_string(c) : header[c];
    def.label = def.id;

    bool numeric = true;
    std::vector<double> values;
    std::vector<std::string> distinct;
    std::unordered_set<std::string> seen;
    for (const auto& row : sample_rows) {
      const std::string_view token = row[c];
      if (is_missing_token(token)) continue;
      if (numeric) {
        if (auto v = parse_number(token)) {
          values.push_back(*v);
        } else {
          numeric = false;
        }
      }
      if (distinct.size() <= max_cat_cardinality) {
        std::string t(trim(token));
        if (seen.insert(t).second) distinct.push_back(std::move(t));
      }
    }
    if (numeric) {
      def.kind = ColumnKind::numerical;
      def.domain = observed_domain(values);
    } else if (distinct.size() <= max_cat_cardinality) {
      def.kind = ColumnKind::categorical;
      def.categories = std::move(distinct);
      def.color_indices = default_colors(def.categories.size());
    } else {
      def.kind = ColumnKind::text;
    }
  }
  return defs;
}

namespace {

using nlohmann::json;

struct DeclaredColumn {
  std::string id;
  std::string label;
  std::optional<ColumnKind> kind;
  std::optional<std::vector<std::string>> categories;
  std::optional<Domain> domain;
  std::vector<std::string> members;  // matrix
  SecondKey key;                     // matrix
};

std::string key_value_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) {
    const double d = v.get<double>();
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, ptr);
  }
  throw SchemaError("second-key values must be numbers or strings");
}

std::vector<DeclaredColumn> parse_descriptor(std::string_view text, std::size_t& max_cat) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("descriptor is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array()) {
    throw SchemaError("descriptor must be an object with a 'columns' array");
  }
  if (doc.contains("max_cat_cardinality")) {
    max_cat = doc["max_cat_cardinality"].get<std::size_t>();
  }
  std::vector<DeclaredColumn> out;
  for (const auto& entry : doc["columns"]) {
    if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string()) {
      throw SchemaError("every descriptor column needs a string 'id'");
    }
    DeclaredColumn col;
    col.id = entry["id"].get<std::string>();
    col.label = entry.value("label", col.id);
    if (entry.contains("kind")) col.kind = column_kind_from_string(entry["kind"].get<std::string>());
    if (entry.contains("categories")) {
      col.categories = entry["categories"].get<std::vector<std::string>>();
    }
    if (entry.contains("domain")) {
      const auto& d = entry["domain"];
      if (!d.is_array() || d.size() != 2) throw SchemaError("domain must be [min, max]");
      col.domain = Domain{d[0].get<double>(), d[1].get<double>()};
    }
    if (entry.contains("matrix")) {
      const auto& m = entry["matrix"];
      if (col.kind && *col.kind != ColumnKind::matrix) {
        throw SchemaError("column '" + col.id + "' declares a matrix but kind is not matrix");
      }
      col.kind = ColumnKind::matrix;
      col.members = m.at("members").get<std::vector<std::string>>();
      if (m.contains("key")) {
        const auto& k = m["key"];
        col.key.label = k.value("label", std::string("key"));
        for (const auto& v : k.at("values")) col.key.values.push_back(key_value_text(v));
      } else {
        col.key.label = "column";
        col.key.values = col.members;
      }
      if (col.key.values.size() != col.members.size()) {
        throw SchemaError("matrix '" + col.id + "' second key length differs from member count");
      }
    } else if (col.kind == ColumnKind::matrix) {
      throw SchemaError("matrix column '" + col.id + "' lacks a 'matrix' section");
    }
    out.push_back(std::move(col));
  }
  return out;
}

[[noreturn]] void type_failure(const std::string& column, std::size_t row, std::string_view token,
                               std::string_view expected) {
  throw SchemaError("row " + std::to_string(row) + " column '" + column + "': token '" +
                    std::string(token) + "' is not " + std::string(expected));
}

struct ColumnExtractor {
  const std::vector<csv::Row>& rows;  // data rows without header

  std::vector<double> numbers(std::size_t c, const std::string& id) const {
    std::vector<double> out(rows.size(), kMissing);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& token = rows[r][c];
      if (is_missing_token(token)) continue;
      auto v = parse_number(token);
      if (!v) type_failure(id, r, token, "a number");
      out[r] = *v;
    }
    return out;
  }

  std::vector<std::int32_t> categories(std::size_t c, const std::string& id,
                                       std::vector<std::string>& categories, bool fixed) const {
    std::unordered_map<std::string, std::int32_t> lookup;
    for (std::size_t i = 0; i < categories.size(); ++i) {
      lookup.emplace(categories[i], static_cast<std::int32_t>(i));
    }
    std::vector<std::int32_t> out(rows.size(), kMissingCategory);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& token = rows[r][c];
      if (is_missing_token(token)) continue;
      std::string t(trim(token));
      auto it = lookup.find(t);
      if (it == lookup.end()) {
        if (fixed) type_failure(id, r, token, "a declared category");
        it = lookup.emplace(t, static_cast<std::int32_t>(categories.size())).first;
        categories.push_back(t);
      }
      out[r] = it->second;
    }
    return out;
  }

  std::vector<std::optional<std::string>> texts(std::size_t c) const {
    std::vector<std::optional<std::string>> out(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!is_missing_token(rows[r][c])) out[r] = rows[r][c];
    }
    return out;
  }
};

}  // namespace

void validate_descriptor(std::string_view descriptor) {
  std::size_t max_cat = kDefaultMaxCategories;
  try {
    parse_descriptor(descriptor, max_cat);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("descriptor: ") + e.what());
  }
}

Dataset load_dataset(std::string_view csv_bytes, std::optional<std::string_view> descriptor) {
  auto rows = csv::parse(csv_bytes);
  if (rows.empty()) throw SchemaError("CSV input has no header row");
  const csv::Row header = std::move(rows.front());
  rows.erase(rows.begin());
  // Blank lines carry no data when the table has more than one column.
  if (header.size() > 1) {
    std::erase_if(rows, [](const csv::Row& r) { return r.size() == 1 && r[0].empty(); });
  }

  std::unordered_map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!header_index.emplace(header[i], i).second) {
      throw SchemaError("duplicate header name '" + header[i] + "'");
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw SchemaError("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                        " fields, expected " + std::to_string(header.size()));
    }
  }

  const ColumnExtractor extract{rows};
  DatasetBuilder builder(rows.size());

  auto header_column = [&](const std::string& name) {
    auto it = header_index.find(name);
    if (it == header_index.end()) {
      throw SchemaError("descriptor references unknown CSV column '" + name + "'");
    }
    return it->second;
  };

  if (!descriptor) {
    const auto defs = rows.empty() ? std::vector<ColumnDef>{} : infer_schema(rows, kDefaultMaxCategories, header);
    for (std::size_t c = 0; c < header.size(); ++c) {
      const ColumnKind kind = rows.empty() ? ColumnKind::text : defs[c].kind;
      switch (kind) {
        case ColumnKind::numerical:
          builder.add_numerical(header[c], header[c], extract.numbers(c, header[c]));
          break;
        case ColumnKind::categorical: {
          std::vector<std::string> cats;
          auto values = extract.categories(c, header[c], cats, false);
          builder.add_categorical(header[c], header[c], std::move(cats), std::move(values));
          break;
        }
        default:
          builder.add_text(header[c], header[c], extract.texts(c));
          break;
      }
    }
    return std::move(builder).build();
  }

  std::size_t max_cat = kDefaultMaxCategories;
  std::vector<DeclaredColumn> declared;
  try {
    declared = parse_descriptor(*descriptor, max_cat);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("descriptor: ") + e.what());
  }
  for (const auto& col : declared) {
    if (col.kind == ColumnKind::matrix) {
      std::vector<double> values(rows.size() * col.members.size(), kMissing);
      for (std::size_t m = 0; m < col.members.size(); ++m) {
        const std::size_t c = header_column(col.members[m]);
        const auto member_values = extract.numbers(c, col.members[m]);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          values[r * col.members.size() + m] = member_values[r];
        }
      }
      builder.add_matrix(col.id, col.label, col.members, col.key, std::move(values), col.domain);
      continue;
    }
    const std::size_t c = header_column(col.id);
    ColumnKind kind;
    if (col.kind) {
      kind = *col.kind;
    } else if (col.categories) {
      kind = ColumnKind::categorical;
    } else {
      std::vector<csv::Row> single;
      single.reserve(rows.size());
      for (const auto& r : rows) single.push_back({r[c]});
      kind = rows.empty() ? ColumnKind::text : infer_schema(single, max_cat)[0].kind;
    }
    switch (kind) {
      case ColumnKind::numerical:
        builder.add_numerical(col.id, col.label, extract.numbers(c, col.id), col.domain);
        break;
      case ColumnKind::categorical: {
        std::vector<std::string> cats = col.categories.value_or(std::vector<std::string>{});
        auto values = extract.categories(c, col.id, cats, col.categories.has_value());
        builder.add_categorical(col.id, col.label, std::move(cats), std::move(values));
        break;
      }
      case ColumnKind::text:
        builder.add_text(col.id, col.label, extract.texts(c));
        break;
      case ColumnKind::matrix:
        break;
    }
  }
  return std::move(builder).build();
}

}  // namespace strata
