#pragma once

// Hierarchical grouping and aggregation engine.
//
// A Table owns a TableState over an immutable Dataset and keeps the derived
// aggregation tree in sync with it. All rows start as leaves under a common
// root. Filtering removes leaves, grouping adds one tree level per criterion,
// sorting reorders leaves inside their parent and group sorting reorders
// sibling groups. Aggregating a group cuts the tree: traversal emits one row
// for the group and nothing beneath it.
//
// Mutators either succeed and bump the version by exactly one, or throw and
// leave the table untouched. Copies are cheap and independent, which is how
// readers take snapshots.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strata/table_state.hpp"

namespace strata {

// Boolean row mask; 1 keeps the row.
using RowMask = std::vector<std::uint8_t>;

// Evaluates one filter over a dataset column. Throws FilterError for an
// invalid regex or a predicate that does not apply to the column kind.
RowMask eval_filter(const FilterSpec& spec, const Dataset& dataset);

struct Group {
  std::vector<std::string> labels;   // one per criterion
  std::vector<std::uint32_t> keys;   // per-criterion label index in natural order
  std::vector<RowId> rows;           // masked rows, ascending
};

// Partitions the masked rows by the Cartesian product of the criteria.
// Only non-empty tuples are returned, in lexicographic natural order.
std::vector<Group> compute_grouping(const Dataset& dataset, const RowMask& mask,
                                    std::span<const GroupCriterion> criteria);

struct GroupNode {
  std::string id;                    // stable: derived from the defining tuple
  std::string label;                 // this level's label
  std::vector<std::string> path;     // labels from the first level down
  std::size_t depth = 0;             // root 0, first grouping level 1
  std::uint32_t parent = 0;
  std::vector<std::uint32_t> children;  // empty for last-level groups
  std::vector<RowId> members;           // all descendant items in display order
  bool aggregated = false;
};

struct AggregationTree {
  std::vector<GroupNode> nodes;  // nodes[0] is the root
  std::size_t levels = 0;        // number of grouping criteria

  const GroupNode& root() const { return nodes.front(); }
  // Index of the node with `id`, or nullopt.
  std::optional<std::uint32_t> find(std::string_view id) const;
};

struct RenderRow {
  enum class Kind { item, header, group };
  Kind kind = Kind::item;
  RowId row = 0;            // item rows
  std::uint32_t node = 0;   // header and group rows
  std::size_t depth = 0;
};

std::string_view to_string(RenderRow::Kind k);

// A display column after flattening nested columns and splitting matrices
// into their column groups.
struct LeafColumn {
  std::string id;         // unique per leaf
  std::string label;
  std::string source;     // dataset or combined column id
  CellKind kind = CellKind::numerical;
  double width = kDefaultColumnWidth;
  std::vector<std::size_t> inner;  // matrix: inner column indices
  bool columns_aggregated = false;  // matrix column group merged
};

struct MatrixColumnGroup {
  std::string label;
  std::vector<std::size_t> inner;
};

// Column groups of a matrix under `grouping`; one unnamed group holding all
// inner columns when `grouping` is null.
std::vector<MatrixColumnGroup> matrix_column_groups(const ColumnDef& matrix,
                                                    const MatrixColumnGrouping* grouping);

struct CombineOptions {
  std::string id;       // generated when empty
  std::string label;
  std::string script;   // scripted
  Reducer reducer = Reducer::max;
  std::optional<std::size_t> position;  // top-level insertion index
};

enum class EncodingSlot { item, aggregate };

namespace detail {

// One precomputed sort criterion. Numbers are NaN when missing; text
// columns compare the dataset strings directly.
struct SortKey {
  Direction direction = Direction::asc;
  std::vector<double> numbers;
  const Dataset* texts = nullptr;
  std::size_t text_column = 0;

  int compare(RowId a, RowId b) const;
};

}  // namespace detail

class Table {
 public:
  explicit Table(std::shared_ptr<const Dataset> dataset);

  const Dataset& dataset() const { return *dataset_; }
  const std::shared_ptr<const Dataset>& dataset_ptr() const { return dataset_; }
  const TableState& state() const { return state_; }
  const AggregationTree& tree() const { return derived_->tree; }
  std::uint64_t version() const { return state_.version; }

  // Rows passing every filter, in file order.
  const RowMask& filter_mask() const { return derived_->mask; }
  std::size_t filtered_count() const { return derived_->order.size(); }

  void set_filters(std::vector<FilterSpec> filters);
  void set_grouping(std::vector<GroupCriterion> criteria);
  void set_sort(std::vector<SortCriterion> criteria);
  void sort_groups(GroupSort order);
  void toggle_aggregate(std::string_view group_id, bool aggregated);
  void set_selection(std::vector<RowId> rows);
  void set_mode(LayoutMode mode);
  void set_mapping(std::string_view column, const MappingSpec& spec);
  void set_encoding(std::string_view leaf_id, EncodingSlot slot, std::optional<EncodingKind> kind,
                    std::string_view group_id = {});
  // Returns the id of the new combined column.
  std::string combine_columns(CombinedKind kind, std::vector<std::string> children,
                              const CombineOptions& options = {});
  void move_column(std::string_view column, std::size_t index);
  void resize_column(std::string_view column, double width);
  void set_matrix_grouping(std::string_view matrix_column,
                           std::optional<MatrixColumnGrouping> grouping);

  // Rebuilds the table from a complete state. Validates it against the
  // dataset; the version restarts at 0.
  void restore(const TableState& state);

  // Level traversal of the tree: header rows for open groups, one row per
  // aggregated group, item rows for visible leaves.
  std::vector<RenderRow> traverse() const;

  // <0 when `a` sorts before `b` under the current sort criteria.
  int compare_rows(RowId a, RowId b) const;

  // --- column access -------------------------------------------------------
  bool has_column(std::string_view id) const;
  const CombinedColumn* find_combined(std::string_view id) const;
  // True for numerical dataset columns and scalar combined columns.
  bool is_scalar(std::string_view id) const;
  // Raw value in data units (the score for stacked/reducer columns).
  double scalar_value(std::string_view id, RowId row) const;
  std::vector<double> scalar_values(std::string_view id) const;
  // Unit value under the column's mapping, NaN when missing.
  double unit_value(std::string_view id, RowId row) const;
  MappingSpec mapping(std::string_view id) const;
  std::string column_label(std::string_view id) const;
  const std::vector<LeafColumn>& leaf_columns() const { return derived_->leaves; }
  const LeafColumn* find_leaf(std::string_view leaf_id) const;
  EncodingContext encoding_context(const LeafColumn& leaf, bool aggregated) const;
  // Effective encoding of a cell after overrides.
  EncodingKind encoding_for(const LeafColumn& leaf, const RenderRow& row) const;

  bool is_selected(RowId row) const;

 private:
  struct Derived {
    RowMask mask;
    std::vector<RowId> order;  // masked rows in item sort order
    std::vector<detail::SortKey> keys;
    AggregationTree tree;
    std::vector<LeafColumn> leaves;
  };
  enum class Stage { mask, order, tree, flags, leaves, none };

  void commit(TableState next, Stage from);
  std::shared_ptr<const Derived> rebuild(TableState& next, Stage from) const;

  void validate_filter(const TableState& s, const FilterSpec& f) const;
  void validate_criterion(const TableState& s, const GroupCriterion& c) const;
  void validate_sort(const TableState& s, const SortCriterion& c) const;
  void validate_group_sort(const TableState& s, const GroupSort& g) const;

  std::shared_ptr<const Dataset> dataset_;
  TableState state_;
  std::shared_ptr<const Derived> derived_;
};

}  // namespace strata
