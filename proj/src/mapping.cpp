#include "strata/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "strata/error.hpp"

namespace strata {

std::string_view to_string(MappingKind kind) {
  switch (kind) {
    case MappingKind::linear: return "linear";
    case MappingKind::inverse_linear: return "inverse_linear";
    case MappingKind::log10: return "log10";
  }
  return "linear";
}

MappingKind mapping_kind_from_string(std::string_view name) {
  if (name == "linear") return MappingKind::linear;
  if (name == "inverse_linear") return MappingKind::inverse_linear;
  if (name == "log10") return MappingKind::log10;
  throw ValidationError("unknown mapping kind '" + std::string(name) + "'");
}

void MappingSpec::validate() const {
  if (!(domain.min < domain.max)) {
    throw DomainError("mapping domain requires min < max, got [" + std::to_string(domain.min) +
                      ", " + std::to_string(domain.max) + "]");
  }
  if (kind == MappingKind::log10 && !(domain.min > 0.0)) {
    throw DomainError("log10 mapping requires a positive domain minimum");
  }
}

namespace {

double raw_unit(const MappingSpec& spec, double x) {
  switch (spec.kind) {
    case MappingKind::linear:
      return (x - spec.domain.min) / (spec.domain.max - spec.domain.min);
    case MappingKind::inverse_linear:
      return 1.0 - (x - spec.domain.min) / (spec.domain.max - spec.domain.min);
    case MappingKind::log10: {
      const double lo = std::log10(spec.domain.min);
      const double hi = std::log10(spec.domain.max);
      return (std::log10(x) - lo) / (hi - lo);
    }
  }
  return 0.0;
}

}  // namespace

MappedValue apply_mapping(const MappingSpec& spec, double raw) {
  if (is_missing(raw)) return {MappedValue::Status::missing, 0.0};
  if (spec.kind == MappingKind::log10 && raw <= 0.0) {
    if (!spec.clip) throw DomainError("log10 mapping of non-positive value " + std::to_string(raw));
    return {MappedValue::Status::value, 0.0};
  }
  const double u = raw_unit(spec, raw);
  if (u >= 0.0 && u <= 1.0) return {MappedValue::Status::value, u};
  const double clamped = std::clamp(u, 0.0, 1.0);
  if (spec.clip) return {MappedValue::Status::value, clamped};
  return {MappedValue::Status::out_of_range, clamped};
}

double map_unit(const MappingSpec& spec, double raw) noexcept {
  if (is_missing(raw)) return kMissing;
  if (spec.kind == MappingKind::log10 && raw <= 0.0) return 0.0;
  return std::clamp(raw_unit(spec, raw), 0.0, 1.0);
}

Domain derive_domain(std::span<const double> values) {
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (double v : values) {
    if (is_missing(v)) continue;
    if (!any) {
      lo = hi = v;
      any = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!any) throw DomainError("cannot derive a domain from all-missing values");
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

}  // namespace strata
