#include "strata/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <regex>
#include <unordered_map>

#include "strata/error.hpp"

namespace strata {

std::string_view to_string(Direction d) { return d == Direction::asc ? "asc" : "desc"; }

Direction direction_from_string(std::string_view name) {
  if (name == "asc") return Direction::asc;
  if (name == "desc") return Direction::desc;
  throw ValidationError("unknown sort direction '" + std::string(name) + "'");
}

std::string_view to_string(GroupSort::By by) {
  switch (by) {
    case GroupSort::By::natural: return "natural";
    case GroupSort::By::name: return "name";
    case GroupSort::By::size: return "size";
    case GroupSort::By::statistic: return "statistic";
  }
  return "natural";
}

GroupSort::By group_sort_by_from_string(std::string_view name) {
  if (name == "natural") return GroupSort::By::natural;
  if (name == "name") return GroupSort::By::name;
  if (name == "size") return GroupSort::By::size;
  if (name == "statistic") return GroupSort::By::statistic;
  throw ValidationError("unknown group sort '" + std::string(name) + "'");
}

std::string_view to_string(LayoutMode m) { return m == LayoutMode::overview ? "overview" : "detail"; }

LayoutMode layout_mode_from_string(std::string_view name) {
  if (name == "overview") return LayoutMode::overview;
  if (name == "detail") return LayoutMode::detail;
  throw ValidationError("unknown layout mode '" + std::string(name) + "'");
}

std::string_view to_string(RenderRow::Kind k) {
  switch (k) {
    case RenderRow::Kind::item: return "item";
    case RenderRow::Kind::header: return "header";
    case RenderRow::Kind::group: return "group";
  }
  return "item";
}

std::optional<std::uint32_t> AggregationTree::find(std::string_view id) const {
  for (std::uint32_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  return std::nullopt;
}

int detail::SortKey::compare(RowId a, RowId b) const {
  int c = 0;
  if (texts) {
    const auto& ta = texts->text(text_column, a);
    const auto& tb = texts->text(text_column, b);
    if (!ta || !tb) return ta ? -1 : (tb ? 1 : 0);  // missing last in both directions
    c = ta->compare(*tb);
    c = c < 0 ? -1 : (c > 0 ? 1 : 0);
  } else {
    const double va = numbers[a];
    const double vb = numbers[b];
    const bool ma = is_missing(va);
    const bool mb = is_missing(vb);
    if (ma || mb) return ma == mb ? 0 : (ma ? 1 : -1);
    c = va < vb ? -1 : (va > vb ? 1 : 0);
  }
  return direction == Direction::desc ? -c : c;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string bin_label(std::span<const double> thresholds, std::size_t bin) {
  if (bin == 0) return "< " + format_number(thresholds.front());
  if (bin == thresholds.size()) return ">= " + format_number(thresholds.back());
  return "[" + format_number(thresholds[bin - 1]) + ", " + format_number(thresholds[bin]) + ")";
}

std::size_t bin_index(std::span<const double> thresholds, double v) {
  return static_cast<std::size_t>(std::upper_bound(thresholds.begin(), thresholds.end(), v) -
                                  thresholds.begin());
}

bool strictly_ascending(std::span<const double> t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) return false;
    if (i > 0 && !(t[i - 1] < t[i])) return false;
  }
  return true;
}

// Column lookups relative to one (dataset, state) pair. Used both for the
// committed state and for candidate states under validation.
struct Resolver {
  const Dataset& ds;
  const TableState& st;

  const CombinedColumn* combined(std::string_view id) const {
    for (const auto& c : st.combined) {
      if (c.id == id) return &c;
    }
    return nullptr;
  }

  bool exists(std::string_view id) const { return ds.find_column(id) || combined(id); }

  void require(std::string_view id) const {
    if (!exists(id)) throw LookupError("unknown column '" + std::string(id) + "'");
  }

  bool is_scalar(std::string_view id) const {
    if (auto c = ds.find_column(id)) return ds.column(*c).kind == ColumnKind::numerical;
    const auto* cc = combined(id);
    return cc && cc->has_scalar_value();
  }

  bool is_matrix(std::string_view id) const {
    auto c = ds.find_column(id);
    return c && ds.column(*c).kind == ColumnKind::matrix;
  }

  bool is_categorical(std::string_view id) const {
    auto c = ds.find_column(id);
    return c && ds.column(*c).kind == ColumnKind::categorical;
  }

  MappingSpec mapping(std::string_view id) const {
    if (auto it = st.mappings.find(std::string(id)); it != st.mappings.end()) return it->second;
    MappingSpec spec;
    if (auto c = ds.find_column(id)) {
      spec.domain = ds.column(*c).domain;
      if (!(spec.domain.min < spec.domain.max)) {
        spec.domain = {spec.domain.min - 0.5, spec.domain.max + 0.5};
      }
    }
    return spec;
  }

  std::string label(std::string_view id) const {
    if (auto c = ds.find_column(id)) return ds.column(*c).label;
    if (const auto* cc = combined(id)) return cc->label;
    return std::string(id);
  }

  double scalar(std::string_view id, RowId row) const {
    if (auto c = ds.find_column(id)) return ds.numbers(*c)[row];
    const auto* cc = combined(id);
    if (!cc || !cc->has_scalar_value()) {
      throw StateError("column '" + std::string(id) + "' has no numerical value");
    }
    switch (cc->kind) {
      case CombinedKind::stacked: {
        double score = 0.0;
        for (std::size_t i = 0; i < cc->children.size(); ++i) {
          const double u = unit(cc->children[i], row);
          if (!is_missing(u)) score += cc->weights[i] * u;
        }
        return score;
      }
      case CombinedKind::reducer: {
        std::vector<double> units;
        units.reserve(cc->children.size());
        for (const auto& child : cc->children) units.push_back(unit(child, row));
        return eval_reducer(cc->reducer, units);
      }
      default:
        return eval_script(cc->expression,
                           [&](std::string_view ref) { return scalar(ref, row); });
    }
  }

  double unit(std::string_view id, RowId row) const { return map_unit(mapping(id), scalar(id, row)); }

  std::vector<double> scalars(std::string_view id) const {
    const std::size_t n = ds.row_count();
    if (auto c = ds.find_column(id)) {
      const auto v = ds.numbers(*c);
      return {v.begin(), v.end()};
    }
    const auto* cc = combined(id);
    if (!cc || !cc->has_scalar_value()) {
      throw StateError("column '" + std::string(id) + "' has no numerical value");
    }
    std::vector<double> out(n, 0.0);
    switch (cc->kind) {
      case CombinedKind::stacked:
        for (std::size_t i = 0; i < cc->children.size(); ++i) {
          const auto u = units(cc->children[i]);
          const double w = cc->weights[i];
          for (std::size_t r = 0; r < n; ++r) {
            if (!is_missing(u[r])) out[r] += w * u[r];
          }
        }
        break;
      case CombinedKind::reducer: {
        std::vector<std::vector<double>> children;
        for (const auto& child : cc->children) children.push_back(units(child));
        std::vector<double> row_values(children.size());
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t i = 0; i < children.size(); ++i) row_values[i] = children[i][r];
          out[r] = eval_reducer(cc->reducer, row_values);
        }
        break;
      }
      default: {
        std::vector<std::string> refs;
        collect_columns(cc->expression, refs);
        std::unordered_map<std::string, std::vector<double>> env;
        for (const auto& ref : refs) env.emplace(ref, scalars(ref));
        for (std::size_t r = 0; r < n; ++r) {
          out[r] = eval_script(cc->expression, [&](std::string_view ref) {
            return env.find(std::string(ref))->second[r];
          });
        }
        break;
      }
    }
    return out;
  }

  std::vector<double> units(std::string_view id) const {
    auto v = scalars(id);
    const MappingSpec spec = mapping(id);
    for (double& x : v) x = map_unit(spec, x);
    return v;
  }
};

// --- filters ---------------------------------------------------------------

void check_filter(const Resolver& r, const FilterSpec& f) {
  r.require(f.column);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NumericRange>) {
          if (!r.is_scalar(f.column)) {
            throw FilterError("numeric range filter on non-numerical column '" + f.column + "'");
          }
          if (std::isnan(p.lo) || std::isnan(p.hi) || p.lo > p.hi) {
            throw FilterError("numeric range filter requires lo <= hi");
          }
        } else if constexpr (std::is_same_v<P, CategoryExclusion>) {
          if (!r.is_categorical(f.column)) {
            throw FilterError("category exclusion on non-categorical column '" + f.column + "'");
          }
          const auto& cats = r.ds.column(f.column).categories;
          for (const auto& c : p.categories) {
            if (std::find(cats.begin(), cats.end(), c) == cats.end()) {
              throw FilterError("column '" + f.column + "' has no category '" + c + "'");
            }
          }
        } else if constexpr (std::is_same_v<P, TextMatch>) {
          const auto c = r.ds.find_column(f.column);
          const auto kind = c ? r.ds.column(*c).kind : ColumnKind::numerical;
          if (kind != ColumnKind::text && kind != ColumnKind::categorical) {
            throw FilterError("text match on non-text column '" + f.column + "'");
          }
          if (p.mode == TextMatch::Mode::regex) {
            try {
              std::regex re(p.pattern);
            } catch (const std::regex_error& e) {
              throw FilterError("invalid regular expression '" + p.pattern + "': " + e.what());
            }
          }
        }
      },
      f.predicate);
}

void apply_filter(const Resolver& r, const FilterSpec& f, RowMask& mask) {
  const std::size_t n = r.ds.row_count();
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NumericRange>) {
          const auto v = r.scalars(f.column);
          for (std::size_t i = 0; i < n; ++i) {
            if (mask[i] && !(v[i] >= p.lo && v[i] <= p.hi)) mask[i] = 0;
          }
        } else if constexpr (std::is_same_v<P, CategoryExclusion>) {
          const std::size_t c = r.ds.column_index(f.column);
          const auto& cats = r.ds.column(c).categories;
          std::vector<std::uint8_t> excluded(cats.size(), 0);
          for (const auto& name : p.categories) {
            excluded[static_cast<std::size_t>(std::find(cats.begin(), cats.end(), name) -
                                              cats.begin())] = 1;
          }
          const auto v = r.ds.categories(c);
          for (std::size_t i = 0; i < n; ++i) {
            if (v[i] != kMissingCategory && excluded[static_cast<std::size_t>(v[i])]) mask[i] = 0;
          }
        } else if constexpr (std::is_same_v<P, TextMatch>) {
          const std::size_t c = r.ds.column_index(f.column);
          const auto& def = r.ds.column(c);
          std::optional<std::regex> re;
          if (p.mode == TextMatch::Mode::regex) re.emplace(p.pattern);
          auto matches = [&](const std::string& s) {
            return re ? std::regex_search(s, *re) : s.find(p.pattern) != std::string::npos;
          };
          if (def.kind == ColumnKind::categorical) {
            std::vector<std::uint8_t> hit(def.categories.size());
            for (std::size_t k = 0; k < hit.size(); ++k) hit[k] = matches(def.categories[k]) ? 1 : 0;
            const auto v = r.ds.categories(c);
            for (std::size_t i = 0; i < n; ++i) {
              if (mask[i] && (v[i] == kMissingCategory || !hit[static_cast<std::size_t>(v[i])])) {
                mask[i] = 0;
              }
            }
          } else {
            for (std::size_t i = 0; i < n; ++i) {
              if (!mask[i]) continue;
              const auto& t = r.ds.text(c, static_cast<RowId>(i));
              if (!t || !matches(*t)) mask[i] = 0;
            }
          }
        } else {
          if (auto c = r.ds.find_column(f.column)) {
            for (std::size_t i = 0; i < n; ++i) {
              if (mask[i] && r.ds.is_missing(*c, static_cast<RowId>(i))) mask[i] = 0;
            }
          } else if (const auto* cc = r.combined(f.column); cc && cc->has_scalar_value()) {
            const auto v = r.scalars(f.column);
            for (std::size_t i = 0; i < n; ++i) {
              if (is_missing(v[i])) mask[i] = 0;
            }
          }
        }
      },
      f.predicate);
}

// --- grouping --------------------------------------------------------------

struct CriterionKeys {
  std::string name;                 // prefix used in group ids
  std::vector<std::string> labels;  // natural order
  std::vector<std::uint32_t> keys;  // per dataset row
};

CriterionKeys criterion_keys(const Resolver& r, const GroupCriterion& criterion) {
  const std::size_t n = r.ds.row_count();
  CriterionKeys out;
  out.keys.resize(n);
  std::visit(
      [&](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ByCategorical>) {
          const std::size_t col = r.ds.column_index(c.column);
          out.name = c.column;
          out.labels = r.ds.column(col).categories;
          const auto missing = static_cast<std::uint32_t>(out.labels.size());
          out.labels.push_back("missing");
          const auto v = r.ds.categories(col);
          for (std::size_t i = 0; i < n; ++i) {
            out.keys[i] = v[i] == kMissingCategory ? missing : static_cast<std::uint32_t>(v[i]);
          }
        } else if constexpr (std::is_same_v<C, ByBins>) {
          out.name = c.column;
          for (std::size_t b = 0; b <= c.thresholds.size(); ++b) {
            out.labels.push_back(bin_label(c.thresholds, b));
          }
          const auto missing = static_cast<std::uint32_t>(out.labels.size());
          out.labels.push_back("missing");
          const auto v = r.scalars(c.column);
          for (std::size_t i = 0; i < n; ++i) {
            out.keys[i] = is_missing(v[i]) ? missing
                                           : static_cast<std::uint32_t>(bin_index(c.thresholds, v[i]));
          }
        } else {
          out.name = "selection";
          out.labels = {"selected", "unselected"};
          std::fill(out.keys.begin(), out.keys.end(), 1U);
          for (RowId row : c.rows) out.keys[row] = 0;
        }
      },
      criterion);
  return out;
}

// Leaf groups keyed by the per-criterion label indices; std::map keeps them
// in lexicographic natural order.
using LeafGroups = std::map<std::vector<std::uint32_t>, std::vector<RowId>>;

LeafGroups partition(const std::vector<CriterionKeys>& criteria, std::span<const RowId> rows) {
  LeafGroups groups;
  std::vector<std::uint32_t> tuple(criteria.size());
  std::vector<RowId>* last = nullptr;
  std::vector<std::uint32_t> last_tuple;
  for (RowId row : rows) {
    for (std::size_t c = 0; c < criteria.size(); ++c) tuple[c] = criteria[c].keys[row];
    if (!last || tuple != last_tuple) {
      last = &groups[tuple];
      last_tuple = tuple;
    }
    last->push_back(row);
  }
  return groups;
}

std::vector<detail::SortKey> build_sort_keys(const Resolver& r,
                                             std::span<const SortCriterion> sorting) {
  std::vector<detail::SortKey> keys;
  const std::size_t n = r.ds.row_count();
  for (const auto& criterion : sorting) {
    detail::SortKey key;
    key.direction = criterion.direction;
    if (auto c = r.ds.find_column(criterion.column)) {
      const auto& def = r.ds.column(*c);
      switch (def.kind) {
        case ColumnKind::numerical: {
          const auto v = r.ds.numbers(*c);
          key.numbers.assign(v.begin(), v.end());
          break;
        }
        case ColumnKind::categorical: {
          const auto v = r.ds.categories(*c);
          key.numbers.resize(n);
          for (std::size_t i = 0; i < n; ++i) {
            key.numbers[i] = v[i] == kMissingCategory ? kMissing : static_cast<double>(v[i]);
          }
          break;
        }
        case ColumnKind::text:
          key.texts = &r.ds;
          key.text_column = *c;
          break;
        case ColumnKind::matrix: {
          key.numbers.resize(n);
          std::vector<double> sorted;
          for (std::size_t i = 0; i < n; ++i) {
            const auto slice = r.ds.matrix_row(*c, static_cast<RowId>(i));
            bool any = std::any_of(slice.begin(), slice.end(), [](double v) { return !is_missing(v); });
            key.numbers[i] = any ? stat_measure(slice, *criterion.statistic) : kMissing;
          }
          break;
        }
      }
    } else {
      key.numbers = r.scalars(criterion.column);
    }
    keys.push_back(std::move(key));
  }
  return keys;
}

int compare_with(std::span<const detail::SortKey> keys, RowId a, RowId b) {
  for (const auto& k : keys) {
    if (int c = k.compare(a, b)) return c;
  }
  return a < b ? -1 : (a > b ? 1 : 0);
}

// Summary statistic of a group for group sorting; NaN when the group has no
// value for the column.
double group_statistic(const Resolver& r, const GroupSort& gs, std::span<const RowId> members,
                       const std::vector<double>& scalars) {
  std::vector<double> values;
  if (r.is_matrix(gs.column)) {
    const std::size_t c = r.ds.column_index(gs.column);
    for (RowId row : members) {
      for (double v : r.ds.matrix_row(c, row)) values.push_back(v);
    }
  } else {
    values.reserve(members.size());
    for (RowId row : members) values.push_back(scalars[row]);
  }
  if (std::all_of(values.begin(), values.end(), [](double v) { return is_missing(v); })) {
    return kMissing;
  }
  return stat_measure(values, gs.statistic);
}

void collect_members(AggregationTree& tree, std::uint32_t node) {
  auto& n = tree.nodes[node];
  if (n.children.empty()) return;
  n.members.clear();
  for (auto child : n.children) {
    collect_members(tree, child);
    const auto& cm = tree.nodes[child].members;
    tree.nodes[node].members.insert(tree.nodes[node].members.end(), cm.begin(), cm.end());
  }
}

AggregationTree build_tree(const Resolver& r, const TableState& st, std::span<const RowId> order) {
  AggregationTree tree;
  tree.levels = st.grouping.size();
  tree.nodes.emplace_back();
  if (st.grouping.empty()) {
    tree.nodes[0].members.assign(order.begin(), order.end());
    return tree;
  }

  std::vector<CriterionKeys> criteria;
  for (const auto& c : st.grouping) criteria.push_back(criterion_keys(r, c));
  const LeafGroups groups = partition(criteria, order);
  const std::size_t k = criteria.size();

  std::vector<std::uint32_t> path(k + 1, 0);  // node index per depth for the current prefix
  const std::vector<std::uint32_t>* previous = nullptr;
  for (const auto& [tuple, rows] : groups) {
    std::size_t shared = 0;
    if (previous) {
      while (shared < k && (*previous)[shared] == tuple[shared]) ++shared;
    }
    for (std::size_t d = shared; d < k; ++d) {
      GroupNode node;
      const auto& parent = tree.nodes[path[d]];
      node.label = criteria[d].labels[tuple[d]];
      node.path = parent.path;
      node.path.push_back(node.label);
      node.depth = d + 1;
      node.parent = path[d];
      node.id = (d == 0 ? std::string{} : parent.id + "|") + criteria[d].name + "=" + node.label;
      const auto index = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes.push_back(std::move(node));
      tree.nodes[path[d]].children.push_back(index);
      path[d + 1] = index;
    }
    tree.nodes[path[k]].members = rows;
    previous = &tuple;
  }
  collect_members(tree, 0);

  if (st.group_sort.by != GroupSort::By::natural) {
    const GroupSort& gs = st.group_sort;
    std::vector<double> stat(tree.nodes.size(), kMissing);
    if (gs.by == GroupSort::By::statistic) {
      const std::vector<double> scalars = r.is_matrix(gs.column) ? std::vector<double>{}
                                                                 : r.scalars(gs.column);
      for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
        stat[i] = group_statistic(r, gs, tree.nodes[i].members, scalars);
      }
    }
    const bool desc = gs.direction == Direction::desc;
    for (auto& node : tree.nodes) {
      auto& ch = node.children;
      std::vector<std::uint32_t> natural = ch;
      auto rank = [&](std::uint32_t x) {
        return std::find(natural.begin(), natural.end(), x) - natural.begin();
      };
      std::sort(ch.begin(), ch.end(), [&](std::uint32_t a, std::uint32_t b) {
        const auto& na = tree.nodes[a];
        const auto& nb = tree.nodes[b];
        int c = 0;
        switch (gs.by) {
          case GroupSort::By::name:
            c = na.label.compare(nb.label);
            c = c < 0 ? -1 : (c > 0 ? 1 : 0);
            break;
          case GroupSort::By::size:
            c = na.members.size() < nb.members.size() ? -1 : (na.members.size() > nb.members.size() ? 1 : 0);
            break;
          default: {
            const bool ma = is_missing(stat[a]);
            const bool mb = is_missing(stat[b]);
            if (ma || mb) {
              if (ma != mb) return mb;  // missing statistics last
            } else {
              c = stat[a] < stat[b] ? -1 : (stat[a] > stat[b] ? 1 : 0);
            }
            break;
          }
        }
        if (desc) c = -c;
        if (c != 0) return c < 0;
        if (int l = na.label.compare(nb.label)) return l < 0;
        return rank(a) < rank(b);
      });
    }
    collect_members(tree, 0);
  }
  return tree;
}

// --- columns ---------------------------------------------------------------

std::string leaf_id_for(const std::string& matrix, const MatrixColumnGroup& g, bool grouped) {
  return grouped ? matrix + "[" + g.label + "]" : matrix;
}

void add_leaves(const Resolver& r, const std::string& id, std::vector<LeafColumn>& out) {
  auto width_of = [&](const std::string& col) {
    auto it = r.st.widths.find(col);
    return it == r.st.widths.end() ? kDefaultColumnWidth : it->second;
  };
  if (auto c = r.ds.find_column(id)) {
    const auto& def = r.ds.column(*c);
    if (def.kind == ColumnKind::matrix) {
      auto git = r.st.matrix_groupings.find(id);
      const MatrixColumnGrouping* grouping = git == r.st.matrix_groupings.end() ? nullptr : &git->second;
      for (const auto& g : matrix_column_groups(def, grouping)) {
        LeafColumn leaf;
        leaf.id = leaf_id_for(id, g, grouping != nullptr);
        leaf.label = grouping ? def.label + " " + g.label : def.label;
        leaf.source = id;
        leaf.kind = CellKind::matrix;
        leaf.width = width_of(leaf.id);
        leaf.inner = g.inner;
        leaf.columns_aggregated = grouping && grouping->aggregated.count(g.label) > 0;
        out.push_back(std::move(leaf));
      }
      return;
    }
    LeafColumn leaf;
    leaf.id = id;
    leaf.label = def.label;
    leaf.source = id;
    leaf.kind = def.kind == ColumnKind::numerical     ? CellKind::numerical
                : def.kind == ColumnKind::categorical ? CellKind::categorical
                                                      : CellKind::text;
    leaf.width = width_of(id);
    out.push_back(std::move(leaf));
    return;
  }
  const auto* cc = r.combined(id);
  if (!cc) return;
  if (cc->kind == CombinedKind::nested) {
    for (const auto& child : cc->children) add_leaves(r, child, out);
    return;
  }
  LeafColumn leaf;
  leaf.id = id;
  leaf.label = cc->label;
  leaf.source = id;
  switch (cc->kind) {
    case CombinedKind::stacked:
      leaf.kind = CellKind::stacked;
      leaf.width = std::accumulate(cc->child_widths.begin(), cc->child_widths.end(), 0.0);
      break;
    case CombinedKind::interleaved:
      leaf.kind = CellKind::interleaved;
      leaf.width = width_of(id);
      break;
    case CombinedKind::imposition:
      leaf.kind = CellKind::imposition;
      leaf.width = width_of(id);
      break;
    default:
      leaf.kind = CellKind::numerical;
      leaf.width = width_of(id);
      break;
  }
  out.push_back(std::move(leaf));
}

std::vector<LeafColumn> build_leaves(const Resolver& r) {
  std::vector<LeafColumn> out;
  for (const auto& id : r.st.columns) add_leaves(r, id, out);
  return out;
}

EncodingContext context_of(const LeafColumn& leaf, bool aggregated) {
  EncodingContext ctx;
  ctx.kind = leaf.kind;
  ctx.aggregated = aggregated;
  ctx.columns_aggregated = leaf.columns_aggregated;
  return ctx;
}

bool numeric_producing(const Resolver& r, const std::string& id) { return r.is_scalar(id); }

}  // namespace

// ---------------------------------------------------------------------------

RowMask eval_filter(const FilterSpec& spec, const Dataset& dataset) {
  const TableState empty;
  const Resolver r{dataset, empty};
  check_filter(r, spec);
  RowMask mask(dataset.row_count(), 1);
  apply_filter(r, spec, mask);
  return mask;
}

std::vector<Group> compute_grouping(const Dataset& dataset, const RowMask& mask,
                                    std::span<const GroupCriterion> criteria) {
  const TableState empty;
  const Resolver r{dataset, empty};
  std::vector<RowId> rows;
  for (std::size_t i = 0; i < dataset.row_count(); ++i) {
    if (i < mask.size() && mask[i]) rows.push_back(static_cast<RowId>(i));
  }
  std::vector<Group> out;
  if (criteria.empty()) {
    if (!rows.empty()) out.push_back(Group{{}, {}, rows});
    return out;
  }
  std::vector<CriterionKeys> keys;
  for (const auto& c : criteria) keys.push_back(criterion_keys(r, c));
  for (auto& [tuple, members] : partition(keys, rows)) {
    Group g;
    g.keys = tuple;
    for (std::size_t c = 0; c < tuple.size(); ++c) g.labels.push_back(keys[c].labels[tuple[c]]);
    g.rows = members;
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<MatrixColumnGroup> matrix_column_groups(const ColumnDef& matrix,
                                                    const MatrixColumnGrouping* grouping) {
  std::vector<MatrixColumnGroup> out;
  const std::size_t w = matrix.inner_labels.size();
  if (!grouping) {
    MatrixColumnGroup all;
    all.inner.resize(w);
    std::iota(all.inner.begin(), all.inner.end(), std::size_t{0});
    out.push_back(std::move(all));
    return out;
  }
  if (grouping->thresholds.empty()) {
    for (std::size_t i = 0; i < w; ++i) {
      const auto& value = matrix.key.values[i];
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& g) { return g.label == value; });
      if (it == out.end()) {
        out.push_back(MatrixColumnGroup{value, {}});
        it = out.end() - 1;
      }
      it->inner.push_back(i);
    }
    return out;
  }
  const auto& t = grouping->thresholds;
  std::vector<MatrixColumnGroup> bins(t.size() + 1);
  for (std::size_t b = 0; b < bins.size(); ++b) bins[b].label = bin_label(t, b);
  for (std::size_t i = 0; i < w; ++i) bins[bin_index(t, matrix.key.numbers[i])].inner.push_back(i);
  for (auto& b : bins) {
    if (!b.inner.empty()) out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Table

Table::Table(std::shared_ptr<const Dataset> dataset) : dataset_(std::move(dataset)) {
  if (!dataset_) throw StateError("table requires a dataset");
  for (const auto& def : dataset_->columns()) state_.columns.push_back(def.id);
  TableState initial = state_;
  derived_ = rebuild(initial, Stage::mask);
  state_ = std::move(initial);
}

std::shared_ptr<const Table::Derived> Table::rebuild(TableState& next, Stage from) const {
  const Resolver r{*dataset_, next};
  auto d = std::make_shared<Derived>(from == Stage::none ? *derived_ : Derived{});
  if (from == Stage::none) return d;
  const bool have_previous = derived_ != nullptr;

  if (from <= Stage::mask) {
    d->mask.assign(dataset_->row_count(), 1);
    for (const auto& f : next.filters) apply_filter(r, f, d->mask);
  } else {
    d->mask = derived_->mask;
  }

  if (from <= Stage::order) {
    d->keys = build_sort_keys(r, next.sorting);
    d->order.clear();
    for (std::size_t i = 0; i < d->mask.size(); ++i) {
      if (d->mask[i]) d->order.push_back(static_cast<RowId>(i));
    }
    if (!d->keys.empty()) {
      std::sort(d->order.begin(), d->order.end(),
                [&](RowId a, RowId b) { return compare_with(d->keys, a, b) < 0; });
    }
  } else {
    d->order = derived_->order;
    d->keys = derived_->keys;
  }

  if (from <= Stage::tree) {
    d->tree = build_tree(r, next, d->order);
  } else {
    d->tree = derived_->tree;
  }

  if (from <= Stage::flags) {
    std::set<std::string> surviving;
    for (std::size_t i = 1; i < d->tree.nodes.size(); ++i) {
      auto& node = d->tree.nodes[i];
      node.aggregated = next.aggregated.count(node.id) > 0;
      if (node.aggregated) surviving.insert(node.id);
    }
    next.aggregated = std::move(surviving);
  }

  d->leaves = (from <= Stage::leaves || !have_previous) ? build_leaves(r) : derived_->leaves;
  return d;
}

void Table::commit(TableState next, Stage from) {
  auto derived = rebuild(next, from);
  next.version = state_.version + 1;
  state_ = std::move(next);
  derived_ = std::move(derived);
}

void Table::validate_filter(const TableState& s, const FilterSpec& f) const {
  check_filter(Resolver{*dataset_, s}, f);
}

void Table::validate_criterion(const TableState& s, const GroupCriterion& criterion) const {
  const Resolver r{*dataset_, s};
  std::visit(
      [&](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ByCategorical>) {
          r.require(c.column);
          if (!r.is_categorical(c.column)) {
            throw StateError("cannot group by non-categorical column '" + c.column + "'");
          }
        } else if constexpr (std::is_same_v<C, ByBins>) {
          r.require(c.column);
          if (!r.is_scalar(c.column)) {
            throw StateError("cannot bin non-numerical column '" + c.column + "'");
          }
          if (c.thresholds.empty() || !strictly_ascending(c.thresholds)) {
            throw StateError("bin thresholds must be non-empty and strictly ascending");
          }
        } else {
          for (RowId row : c.rows) {
            if (row >= dataset_->row_count()) {
              throw LookupError("selection grouping references unknown row " + std::to_string(row));
            }
          }
        }
      },
      criterion);
}

void Table::validate_sort(const TableState& s, const SortCriterion& c) const {
  const Resolver r{*dataset_, s};
  r.require(c.column);
  if (r.is_matrix(c.column)) {
    if (!c.statistic) throw StateError("sorting matrix column '" + c.column + "' needs a statistic");
    return;
  }
  if (c.statistic) {
    throw StateError("statistic given for non-matrix column '" + c.column + "'");
  }
  if (const auto* cc = r.combined(c.column); cc && !cc->has_scalar_value()) {
    throw StateError(std::string(to_string(cc->kind)) + " column '" + c.column +
                     "' is not sortable as a unit");
  }
}

void Table::validate_group_sort(const TableState& s, const GroupSort& g) const {
  if (g.by == GroupSort::By::natural) return;
  if (s.grouping.empty()) throw StateError("group sorting requires an active grouping");
  if (g.by != GroupSort::By::statistic) return;
  const Resolver r{*dataset_, s};
  r.require(g.column);
  if (!r.is_scalar(g.column) && !r.is_matrix(g.column)) {
    throw StateError("group statistic on non-numerical column '" + g.column + "'");
  }
}

void Table::set_filters(std::vector<FilterSpec> filters) {
  TableState next = state_;
  for (const auto& f : filters) validate_filter(next, f);
  next.filters = std::move(filters);
  commit(std::move(next), Stage::mask);
}

void Table::set_grouping(std::vector<GroupCriterion> criteria) {
  TableState next = state_;
  for (auto& c : criteria) {
    validate_criterion(next, c);
    if (auto* sel = std::get_if<BySelection>(&c)) {
      std::sort(sel->rows.begin(), sel->rows.end());
      sel->rows.erase(std::unique(sel->rows.begin(), sel->rows.end()), sel->rows.end());
    }
  }
  // Categorical grouping columns move to the front of the sort hierarchy in
  // grouping order. Binned columns keep the existing sort.
  std::vector<SortCriterion> promoted;
  for (const auto& c : criteria) {
    const auto* cat = std::get_if<ByCategorical>(&c);
    if (!cat) continue;
    if (std::any_of(promoted.begin(), promoted.end(),
                    [&](const SortCriterion& s) { return s.column == cat->column; })) {
      continue;
    }
    auto it = std::find_if(next.sorting.begin(), next.sorting.end(),
                           [&](const SortCriterion& s) { return s.column == cat->column; });
    promoted.push_back(it != next.sorting.end() ? *it : SortCriterion{cat->column, Direction::asc, {}});
  }
  for (const auto& s : next.sorting) {
    if (std::none_of(promoted.begin(), promoted.end(),
                     [&](const SortCriterion& p) { return p.column == s.column; })) {
      promoted.push_back(s);
    }
  }
  next.sorting = std::move(promoted);
  next.grouping = std::move(criteria);
  if (next.grouping.empty()) next.group_sort = GroupSort{};
  commit(std::move(next), Stage::order);
}

void Table::set_sort(std::vector<SortCriterion> criteria) {
  TableState next = state_;
  for (const auto& c : criteria) validate_sort(next, c);
  next.sorting = std::move(criteria);
  commit(std::move(next), Stage::order);
}

void Table::sort_groups(GroupSort order) {
  TableState next = state_;
  validate_group_sort(next, order);
  if (order.by != GroupSort::By::statistic) order.column.clear();
  next.group_sort = std::move(order);
  commit(std::move(next), Stage::tree);
}

void Table::toggle_aggregate(std::string_view group_id, bool aggregated) {
  if (!derived_->tree.find(group_id)) {
    throw LookupError("unknown group '" + std::string(group_id) + "'");
  }
  TableState next = state_;
  if (aggregated) {
    next.aggregated.insert(std::string(group_id));
  } else {
    next.aggregated.erase(std::string(group_id));
  }
  commit(std::move(next), Stage::flags);
}

void Table::set_selection(std::vector<RowId> rows) {
  for (RowId row : rows) {
    if (row >= dataset_->row_count()) throw LookupError("unknown row id " + std::to_string(row));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  TableState next = state_;
  next.selection = std::move(rows);
  commit(std::move(next), Stage::none);
}

void Table::set_mode(LayoutMode mode) {
  TableState next = state_;
  next.mode = mode;
  commit(std::move(next), Stage::none);
}

void Table::set_mapping(std::string_view column, const MappingSpec& spec) {
  const Resolver r{*dataset_, state_};
  r.require(column);
  if (!r.is_scalar(column) && !r.is_matrix(column)) {
    throw StateError("column '" + std::string(column) + "' has no numerical mapping");
  }
  spec.validate();
  TableState next = state_;
  next.mappings[std::string(column)] = spec;
  commit(std::move(next), Stage::mask);
}

void Table::set_encoding(std::string_view leaf_id, EncodingSlot slot,
                         std::optional<EncodingKind> kind, std::string_view group_id) {
  const LeafColumn* leaf = find_leaf(leaf_id);
  if (!leaf) throw LookupError("unknown display column '" + std::string(leaf_id) + "'");
  if (!group_id.empty()) {
    if (slot != EncodingSlot::aggregate) {
      throw StateError("per-group encodings apply to aggregated rows only");
    }
    if (!derived_->tree.find(group_id)) {
      throw LookupError("unknown group '" + std::string(group_id) + "'");
    }
  }
  if (kind) {
    const auto ctx = context_of(*leaf, slot == EncodingSlot::aggregate);
    if (!is_legal(ctx, *kind)) {
      throw StateError("encoding '" + std::string(to_string(*kind)) + "' is not legal for column '" +
                       leaf->id + "'");
    }
  }
  TableState next = state_;
  auto& o = next.encodings[leaf->id];
  if (!group_id.empty()) {
    if (kind) {
      o.groups[std::string(group_id)] = *kind;
    } else {
      o.groups.erase(std::string(group_id));
    }
  } else if (slot == EncodingSlot::item) {
    o.item = kind;
  } else {
    o.aggregate = kind;
  }
  if (o.empty()) next.encodings.erase(leaf->id);
  commit(std::move(next), Stage::none);
}

std::string Table::combine_columns(CombinedKind kind, std::vector<std::string> children,
                                   const CombineOptions& options) {
  const Resolver r{*dataset_, state_};
  CombinedColumn col;
  col.kind = kind;

  if (kind == CombinedKind::scripted) {
    if (options.script.empty()) throw StateError("scripted column needs a script");
    col.script = options.script;
    col.expression = parse_script(options.script, [&](std::string_view id) { return r.is_scalar(id); });
    children.clear();
    collect_columns(col.expression, children);
  } else {
    if (children.empty()) throw StateError("combined column needs at least one child");
    for (std::size_t i = 0; i < children.size(); ++i) {
      r.require(children[i]);
      if (std::find(state_.columns.begin(), state_.columns.end(), children[i]) == state_.columns.end()) {
        throw StateError("column '" + children[i] + "' is not a top-level display column");
      }
      if (std::find(children.begin(), children.begin() + static_cast<std::ptrdiff_t>(i), children[i]) !=
          children.begin() + static_cast<std::ptrdiff_t>(i)) {
        throw StateError("column '" + children[i] + "' repeated in a combination");
      }
    }
  }

  switch (kind) {
    case CombinedKind::nested:
      break;
    case CombinedKind::stacked:
    case CombinedKind::interleaved:
    case CombinedKind::reducer:
      for (const auto& c : children) {
        if (!numeric_producing(r, c)) {
          throw StateError(std::string(to_string(kind)) + " column cannot contain non-numerical column '" +
                           c + "'");
        }
      }
      break;
    case CombinedKind::imposition: {
      const bool ok = children.size() == 2 &&
                      ((numeric_producing(r, children[0]) && r.is_categorical(children[1])) ||
                       (r.is_categorical(children[0]) && numeric_producing(r, children[1])));
      if (!ok) {
        throw StateError("imposition needs exactly one numerical and one categorical column");
      }
      break;
    }
    case CombinedKind::scripted:
      break;
  }

  if (kind == CombinedKind::stacked) {
    col.child_widths.assign(children.size(), kDefaultColumnWidth);
    col.weights = normalize_weights(col.child_widths);
  }
  col.reducer = options.reducer;

  if (!options.id.empty()) {
    if (r.exists(options.id)) throw StateError("column id '" + options.id + "' already exists");
    col.id = options.id;
  } else {
    for (std::size_t n = 1;; ++n) {
      std::string candidate = std::string(to_string(kind)) + "_" + std::to_string(n);
      if (!r.exists(candidate)) {
        col.id = std::move(candidate);
        break;
      }
    }
  }
  if (!options.label.empty()) {
    col.label = options.label;
  } else if (kind == CombinedKind::scripted) {
    col.label = col.script;
  } else {
    std::string label = kind == CombinedKind::reducer ? std::string(to_string(options.reducer))
                                                      : std::string(to_string(kind));
    label += "(";
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (i > 0) label += ", ";
      label += r.label(children[i]);
    }
    col.label = label + ")";
  }
  col.children = children;

  TableState next = state_;
  std::size_t position = next.columns.size();
  if (kind != CombinedKind::scripted) {
    position = static_cast<std::size_t>(
        std::find(next.columns.begin(), next.columns.end(), children.front()) - next.columns.begin());
    std::size_t removed_before = 0;
    for (const auto& c : children) {
      const auto it = std::find(next.columns.begin(), next.columns.end(), c);
      if (static_cast<std::size_t>(it - next.columns.begin()) < position) ++removed_before;
      next.columns.erase(it);
    }
    position -= removed_before;
  }
  if (options.position) position = std::min(*options.position, next.columns.size());
  next.columns.insert(next.columns.begin() + static_cast<std::ptrdiff_t>(position), col.id);
  const std::string id = col.id;
  next.combined.push_back(std::move(col));

  if (kind == CombinedKind::scripted) {
    const Resolver nr{*dataset_, next};
    MappingSpec spec;
    try {
      spec.domain = derive_domain(nr.scalars(id));
    } catch (const DomainError&) {
      spec.domain = Domain{0.0, 1.0};
    }
    next.mappings[id] = spec;
  }
  commit(std::move(next), Stage::leaves);
  return id;
}

void Table::move_column(std::string_view column, std::size_t index) {
  auto it = std::find(state_.columns.begin(), state_.columns.end(), column);
  if (it == state_.columns.end()) {
    throw LookupError("'" + std::string(column) + "' is not a top-level display column");
  }
  TableState next = state_;
  next.columns.erase(next.columns.begin() + (it - state_.columns.begin()));
  index = std::min(index, next.columns.size());
  next.columns.insert(next.columns.begin() + static_cast<std::ptrdiff_t>(index), std::string(column));
  commit(std::move(next), Stage::leaves);
}

void Table::resize_column(std::string_view column, double width) {
  if (!(width > 0.0) || !std::isfinite(width)) throw StateError("column width must be positive");
  const Resolver r{*dataset_, state_};
  TableState next = state_;
  // A child of a stacked column re-weights its parent.
  for (auto& c : next.combined) {
    if (c.kind != CombinedKind::stacked) continue;
    auto it = std::find(c.children.begin(), c.children.end(), column);
    if (it == c.children.end()) continue;
    c.child_widths[static_cast<std::size_t>(it - c.children.begin())] = width;
    c.weights = normalize_weights(c.child_widths);
    commit(std::move(next), Stage::mask);
    return;
  }
  if (!r.exists(column) && !find_leaf(column)) {
    throw LookupError("unknown column '" + std::string(column) + "'");
  }
  next.widths[std::string(column)] = width;
  commit(std::move(next), Stage::leaves);
}

void Table::set_matrix_grouping(std::string_view matrix_column,
                                std::optional<MatrixColumnGrouping> grouping) {
  const Resolver r{*dataset_, state_};
  r.require(matrix_column);
  if (!r.is_matrix(matrix_column)) {
    throw StateError("column '" + std::string(matrix_column) + "' is not a matrix");
  }
  const auto& def = dataset_->column(matrix_column);
  TableState next = state_;
  const std::string id(matrix_column);
  if (grouping) {
    if (!grouping->thresholds.empty()) {
      if (!def.key.numeric) throw StateError("binning a matrix needs a numeric second key");
      if (!strictly_ascending(grouping->thresholds)) {
        throw StateError("matrix bin thresholds must be strictly ascending");
      }
    }
    const auto groups = matrix_column_groups(def, &*grouping);
    for (const auto& label : grouping->aggregated) {
      if (std::none_of(groups.begin(), groups.end(), [&](const auto& g) { return g.label == label; })) {
        throw LookupError("matrix '" + id + "' has no column group '" + label + "'");
      }
    }
    next.matrix_groupings[id] = *grouping;
  } else {
    next.matrix_groupings.erase(id);
  }
  // Overrides of the previous column groups may no longer be legal.
  for (auto it = next.encodings.begin(); it != next.encodings.end();) {
    if (it->first == id || it->first.starts_with(id + "[")) {
      it = next.encodings.erase(it);
    } else {
      ++it;
    }
  }
  commit(std::move(next), Stage::leaves);
}

void Table::restore(const TableState& s) {
  Table t(dataset_);
  for (const auto& c : s.combined) {
    CombineOptions o;
    o.id = c.id;
    o.label = c.label;
    o.script = c.script;
    o.reducer = c.reducer;
    t.combine_columns(c.kind, c.children, o);
    if (c.kind == CombinedKind::stacked && !c.child_widths.empty()) {
      if (c.child_widths.size() != c.children.size()) {
        throw ValidationError("stacked column '" + c.id + "' width count differs from children");
      }
      auto& stored = t.state_.combined.back();
      stored.child_widths = c.child_widths;
      stored.weights = normalize_weights(c.child_widths);
    }
  }
  {
    auto current = t.state_.columns;
    auto wanted = s.columns;
    std::sort(current.begin(), current.end());
    std::sort(wanted.begin(), wanted.end());
    if (current != wanted) throw ValidationError("column order does not match the column tree");
    TableState next = t.state_;
    next.columns = s.columns;
    for (const auto& [id, w] : s.widths) {
      if (!(w > 0.0)) throw ValidationError("column width must be positive");
      next.widths[id] = w;
    }
    t.commit(std::move(next), Stage::mask);
  }
  for (const auto& [id, spec] : s.mappings) t.set_mapping(id, spec);
  for (const auto& [id, g] : s.matrix_groupings) t.set_matrix_grouping(id, g);
  t.set_filters(s.filters);
  t.set_grouping(s.grouping);
  t.set_sort(s.sorting);
  if (s.group_sort.by != GroupSort::By::natural) t.sort_groups(s.group_sort);
  for (const auto& id : s.aggregated) t.toggle_aggregate(id, true);
  for (const auto& [leaf, o] : s.encodings) {
    if (o.item) t.set_encoding(leaf, EncodingSlot::item, o.item);
    if (o.aggregate) t.set_encoding(leaf, EncodingSlot::aggregate, o.aggregate);
    for (const auto& [group, kind] : o.groups) t.set_encoding(leaf, EncodingSlot::aggregate, kind, group);
  }
  t.set_selection(s.selection);
  t.set_mode(s.mode);
  t.state_.version = 0;
  *this = std::move(t);
}

std::vector<RenderRow> Table::traverse() const {
  const auto& tree = derived_->tree;
  std::vector<RenderRow> rows;
  rows.reserve(derived_->order.size() + tree.nodes.size());
  const std::size_t item_depth = tree.levels + 1;

  auto emit_items = [&](const GroupNode& node) {
    for (RowId row : node.members) rows.push_back(RenderRow{RenderRow::Kind::item, row, 0, item_depth});
  };
  if (tree.levels == 0) {
    emit_items(tree.root());
    return rows;
  }
  // Explicit stack keeps deep hierarchies off the call stack.
  std::vector<std::uint32_t> stack(tree.root().children.rbegin(), tree.root().children.rend());
  while (!stack.empty()) {
    const std::uint32_t index = stack.back();
    stack.pop_back();
    const GroupNode& node = tree.nodes[index];
    if (node.aggregated) {
      rows.push_back(RenderRow{RenderRow::Kind::group, 0, index, node.depth});
      continue;
    }
    rows.push_back(RenderRow{RenderRow::Kind::header, 0, index, node.depth});
    if (node.children.empty()) {
      emit_items(node);
    } else {
      stack.insert(stack.end(), node.children.rbegin(), node.children.rend());
    }
  }
  return rows;
}

int Table::compare_rows(RowId a, RowId b) const { return compare_with(derived_->keys, a, b); }

bool Table::has_column(std::string_view id) const { return Resolver{*dataset_, state_}.exists(id); }

const CombinedColumn* Table::find_combined(std::string_view id) const {
  return Resolver{*dataset_, state_}.combined(id);
}

bool Table::is_scalar(std::string_view id) const { return Resolver{*dataset_, state_}.is_scalar(id); }

double Table::scalar_value(std::string_view id, RowId row) const {
  return Resolver{*dataset_, state_}.scalar(id, row);
}

std::vector<double> Table::scalar_values(std::string_view id) const {
  return Resolver{*dataset_, state_}.scalars(id);
}

double Table::unit_value(std::string_view id, RowId row) const {
  return Resolver{*dataset_, state_}.unit(id, row);
}

MappingSpec Table::mapping(std::string_view id) const { return Resolver{*dataset_, state_}.mapping(id); }

std::string Table::column_label(std::string_view id) const {
  return Resolver{*dataset_, state_}.label(id);
}

const LeafColumn* Table::find_leaf(std::string_view leaf_id) const {
  for (const auto& leaf : derived_->leaves) {
    if (leaf.id == leaf_id) return &leaf;
  }
  return nullptr;
}

EncodingContext Table::encoding_context(const LeafColumn& leaf, bool aggregated) const {
  return context_of(leaf, aggregated);
}

EncodingKind Table::encoding_for(const LeafColumn& leaf, const RenderRow& row) const {
  const bool aggregated = row.kind == RenderRow::Kind::group;
  const auto ctx = context_of(leaf, aggregated);
  std::optional<EncodingKind> chosen;
  if (auto it = state_.encodings.find(leaf.id); it != state_.encodings.end()) {
    const auto& o = it->second;
    if (aggregated) {
      const auto& gid = derived_->tree.nodes[row.node].id;
      if (auto g = o.groups.find(gid); g != o.groups.end()) {
        chosen = g->second;
      } else {
        chosen = o.aggregate;
      }
    } else {
      chosen = o.item;
    }
  }
  if (!chosen) return default_encoding(ctx);
  if (!is_legal(ctx, *chosen)) {
    throw SceneError("encoding '" + std::string(to_string(*chosen)) + "' is not legal for column '" +
                     leaf.id + "'");
  }
  return *chosen;
}

bool Table::is_selected(RowId row) const {
  return std::binary_search(state_.selection.begin(), state_.selection.end(), row);
}

}  // namespace strata
