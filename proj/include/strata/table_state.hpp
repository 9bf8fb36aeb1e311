#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "strata/combinators.hpp"
#include "strata/dataset.hpp"
#include "strata/encoding.hpp"
#include "strata/mapping.hpp"
#include "strata/summaries.hpp"

namespace strata {

// --- filters ---------------------------------------------------------------

struct NumericRange {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const NumericRange&) const = default;
};

// Removes rows whose category is listed. Missing values pass; use
// RequirePresent to drop them.
struct CategoryExclusion {
  std::vector<std::string> categories;
  bool operator==(const CategoryExclusion&) const = default;
};

struct TextMatch {
  enum class Mode { substring, regex };
  Mode mode = Mode::substring;
  std::string pattern;
  bool operator==(const TextMatch&) const = default;
};

struct RequirePresent {
  bool operator==(const RequirePresent&) const = default;
};

using FilterPredicate = std::variant<NumericRange, CategoryExclusion, TextMatch, RequirePresent>;

struct FilterSpec {
  std::string column;
  FilterPredicate predicate;
  bool operator==(const FilterSpec&) const = default;
};

// --- grouping --------------------------------------------------------------

struct ByCategorical {
  std::string column;
  bool operator==(const ByCategorical&) const = default;
};

// Thresholds t1 < ... < tk yield bins (-inf,t1), [t1,t2), ..., [tk,inf).
struct ByBins {
  std::string column;
  std::vector<double> thresholds;
  bool operator==(const ByBins&) const = default;
};

struct BySelection {
  std::vector<RowId> rows;  // ascending, unique
  bool operator==(const BySelection&) const = default;
};

using GroupCriterion = std::variant<ByCategorical, ByBins, BySelection>;

// --- sorting ---------------------------------------------------------------

enum class Direction { asc, desc };

std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view name);

struct SortCriterion {
  std::string column;
  Direction direction = Direction::asc;
  std::optional<Statistic> statistic;  // matrix columns only
  bool operator==(const SortCriterion&) const = default;
};

struct GroupSort {
  enum class By { natural, name, size, statistic };
  By by = By::natural;
  std::string column;                  // statistic only
  Statistic statistic = Statistic::median;
  Direction direction = Direction::asc;
  bool operator==(const GroupSort&) const = default;
};

std::string_view to_string(GroupSort::By by);
GroupSort::By group_sort_by_from_string(std::string_view name);

// --- presentation ----------------------------------------------------------

enum class LayoutMode { overview, detail };

std::string_view to_string(LayoutMode m);
LayoutMode layout_mode_from_string(std::string_view name);

struct EncodingOverride {
  std::optional<EncodingKind> item;
  std::optional<EncodingKind> aggregate;
  std::map<std::string, EncodingKind> groups;  // per aggregated group id
  bool operator==(const EncodingOverride&) const = default;
  bool empty() const { return !item && !aggregate && groups.empty(); }
};

// Groups the inner columns of a matrix by its second key: by distinct key
// value when `thresholds` is empty, otherwise by bins over a numeric key.
// Each column group becomes its own display column and can be merged
// (aggregated) into a single cell per row.
struct MatrixColumnGrouping {
  std::vector<double> thresholds;
  std::set<std::string> aggregated;  // column-group labels
  bool operator==(const MatrixColumnGrouping&) const = default;
};

inline constexpr double kDefaultColumnWidth = 100.0;

// The complete exploration state. Derived structures (the aggregation tree,
// render rows) are rebuilt from it.
struct TableState {
  std::vector<std::string> columns;  // top-level display order
  std::vector<CombinedColumn> combined;
  std::map<std::string, double> widths;
  std::map<std::string, MappingSpec> mappings;  // explicit mappings only
  std::vector<FilterSpec> filters;
  std::vector<GroupCriterion> grouping;
  std::vector<SortCriterion> sorting;
  GroupSort group_sort;
  std::set<std::string> aggregated;
  std::vector<RowId> selection;  // ascending, unique
  LayoutMode mode = LayoutMode::detail;
  std::map<std::string, EncodingOverride> encodings;
  std::map<std::string, MatrixColumnGrouping> matrix_groupings;
  std::uint64_t version = 0;
};

}  // namespace strata
