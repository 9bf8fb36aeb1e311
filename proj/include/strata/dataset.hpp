#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "strata/csv.hpp"

namespace strata {

// Numerical storage uses quiet NaN as the missing marker; NaN is never a
// valid data value because every NaN spelling parses as missing.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

inline constexpr std::int32_t kMissingCategory = -1;
inline constexpr std::size_t kDefaultMaxCategories = 20;

// Rows are identified by their position in the source file. Ids are stable
// for the lifetime of a dataset because datasets are immutable.
using RowId = std::uint32_t;

enum class ColumnKind { numerical, categorical, text, matrix };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view name);

struct Domain {
  double min = 0.0;
  double max = 1.0;
  bool operator==(const Domain&) const = default;
};

// The attribute indexing the inner columns of a matrix, e.g. a year per
// column. Values are kept as text; `numeric` is set when every value parses
// as a number, in which case `numbers` holds the parsed values.
struct SecondKey {
  std::string label;
  std::vector<std::string> values;
  bool numeric = false;
  std::vector<double> numbers;
};

struct ColumnDef {
  std::string id;
  std::string label;
  ColumnKind kind = ColumnKind::text;
  Domain domain;                        // numerical and matrix
  std::vector<std::string> categories;  // categorical, in display order
  std::vector<int> color_indices;       // parallel to categories
  std::vector<std::string> inner_labels;  // matrix
  SecondKey key;                          // matrix

  std::size_t width() const { return kind == ColumnKind::matrix ? inner_labels.size() : 1; }
};

struct MissingValue {
  bool operator==(const MissingValue&) const = default;
};
struct CategoryValue {
  std::int32_t index = 0;
  bool operator==(const CategoryValue&) const = default;
};
using MatrixSlice = std::vector<std::optional<double>>;
using CellValue = std::variant<MissingValue, double, CategoryValue, std::string, MatrixSlice>;

inline bool is_missing(const CellValue& v) { return std::holds_alternative<MissingValue>(v); }

class Dataset;

// Assembles a Dataset column by column. Used by the CSV loader and by code
// that synthesizes tables directly.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(std::size_t row_count) : row_count_(row_count) {}

  // Missing values are NaN. An explicit domain overrides the observed one.
  DatasetBuilder& add_numerical(std::string id, std::string label, std::vector<double> values,
                                std::optional<Domain> domain = std::nullopt);
  DatasetBuilder& add_categorical(std::string id, std::string label,
                                  std::vector<std::string> categories,
                                  std::vector<std::int32_t> values);
  DatasetBuilder& add_text(std::string id, std::string label,
                           std::vector<std::optional<std::string>> values);
  // `values` is row-major with inner_labels.size() entries per row.
  DatasetBuilder& add_matrix(std::string id, std::string label,
                             std::vector<std::string> inner_labels, SecondKey key,
                             std::vector<double> values,
                             std::optional<Domain> domain = std::nullopt);

  Dataset build() &&;

 private:
  std::size_t row_count_;
  std::vector<ColumnDef> defs_;
  std::vector<std::vector<double>> numbers_;
  std::vector<std::vector<std::int32_t>> categories_;
  std::vector<std::vector<std::optional<std::string>>> texts_;
};

// Immutable column-oriented table. Safe to share between threads.
class Dataset {
 public:
  Dataset() = default;

  std::size_t row_count() const noexcept { return row_count_; }
  std::size_t column_count() const noexcept { return defs_.size(); }
  std::span<const ColumnDef> columns() const noexcept { return defs_; }

  const ColumnDef& column(std::string_view id) const;
  const ColumnDef& column(std::size_t index) const { return defs_.at(index); }
  std::optional<std::size_t> find_column(std::string_view id) const;
  std::size_t column_index(std::string_view id) const;

  // Typed accessors; throw LookupError when the column has a different kind.
  std::span<const double> numbers(std::size_t column) const;
  std::span<const std::int32_t> categories(std::size_t column) const;
  const std::optional<std::string>& text(std::size_t column, RowId row) const;
  std::span<const double> matrix_row(std::size_t column, RowId row) const;
  std::span<const double> matrix_values(std::size_t column) const;

  bool is_missing(std::size_t column, RowId row) const;

  CellValue cell(RowId row, std::string_view column_id) const;

  // FNV-1a over the column definitions and all stored values. Independent of
  // the CSV formatting the data was loaded from.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  std::string fingerprint_hex() const;

 private:
  friend class DatasetBuilder;

  std::size_t row_count_ = 0;
  std::vector<ColumnDef> defs_;
  std::vector<std::vector<double>> numbers_;
  std::vector<std::vector<std::int32_t>> categories_;
  std::vector<std::vector<std::optional<std::string>>> texts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t fingerprint_ = 0;
};

// True for "", "NA", "NaN" and "-" (case-insensitive, surrounding blanks
// ignored).
bool is_missing_token(std::string_view token);

// Parses a finite decimal number; surrounding blanks are ignored.
std::optional<double> parse_number(std::string_view token);

// Classifies each column of `sample_rows`. `header` supplies ids and labels;
// when empty, columns are named c0, c1, ...
std::vector<ColumnDef> infer_schema(const std::vector<csv::Row>& sample_rows,
                                    std::size_t max_cat_cardinality = kDefaultMaxCategories,
                                    const std::vector<std::string>& header = {});

// Loads CSV bytes with a header row. The optional descriptor is the JSON
// column descriptor document described in docs/formats.md.
Dataset load_dataset(std::string_view csv_bytes, std::optional<std::string_view> descriptor = {});

// Structural check of a column descriptor without data. Throws SchemaError.
void validate_descriptor(std::string_view descriptor);

}  // namespace strata
