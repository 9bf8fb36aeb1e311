#pragma once

// JSON form of the exploration state. The field layout is documented in
// docs/formats.md.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "strata/table.hpp"

namespace strata {

inline constexpr int kProtocolVersion = 1;

struct StateDocument {
  int protocol_version = kProtocolVersion;
  std::optional<std::string> fingerprint;  // dataset content hash, hex
  TableState state;
};

nlohmann::json state_to_json(const TableState& state, const Dataset& dataset);

// Schema validation only; semantic checks against a dataset happen in
// Table::restore. Throws ValidationError.
StateDocument state_from_json(const nlohmann::json& doc);
StateDocument parse_state_document(std::string_view text);

// Restores `doc` into `table`, rejecting a fingerprint that differs from the
// table's dataset.
void restore_document(Table& table, const StateDocument& doc);

// Pieces shared with the command protocol.

// Accepts both signed and unsigned JSON integers.
inline bool is_non_negative_integer(const nlohmann::json& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

nlohmann::json to_json(const FilterSpec& f);
nlohmann::json to_json(const GroupCriterion& c);
nlohmann::json to_json(const SortCriterion& c);
nlohmann::json to_json(const GroupSort& g);
nlohmann::json to_json(const MappingSpec& m);
nlohmann::json to_json(const MatrixColumnGrouping& g);

FilterSpec filter_from_json(const nlohmann::json& j);
GroupCriterion criterion_from_json(const nlohmann::json& j);
SortCriterion sort_from_json(const nlohmann::json& j);
GroupSort group_sort_from_json(const nlohmann::json& j);
MappingSpec mapping_from_json(const nlohmann::json& j);
MatrixColumnGrouping matrix_grouping_from_json(const nlohmann::json& j);

}  // namespace strata
