#pragma once

#include <span>
#include <string_view>

#include "strata/dataset.hpp"

namespace strata {

enum class MappingKind { linear, inverse_linear, log10 };

std::string_view to_string(MappingKind kind);
MappingKind mapping_kind_from_string(std::string_view name);

// Maps raw data units onto the unit interval used by every visual channel.
struct MappingSpec {
  MappingKind kind = MappingKind::linear;
  Domain domain;
  bool clip = false;

  // Throws DomainError unless min < max and, for log10, min > 0.
  void validate() const;

  bool operator==(const MappingSpec&) const = default;
};

struct MappedValue {
  enum class Status { value, missing, out_of_range };
  Status status = Status::missing;
  // In [0,1] unless missing. Out-of-range values are clamped here and
  // flagged through `status`.
  double unit = 0.0;

  bool ok() const { return status == Status::value; }
};

// Throws DomainError for log10 of a non-positive value when clip is off.
MappedValue apply_mapping(const MappingSpec& spec, double raw);

// Convenience for renderers: the clamped unit value, or NaN when missing.
// Non-positive values under an unclipped log10 mapping map to 0.
double map_unit(const MappingSpec& spec, double raw) noexcept;

// Tight [min,max] over non-missing values; all-equal input widens to
// [v-0.5, v+0.5]. Throws DomainError when every value is missing.
Domain derive_domain(std::span<const double> values);

}  // namespace strata
