#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "strata/dataset.hpp"

namespace fixtures {

inline std::shared_ptr<const strata::Dataset> share(strata::Dataset ds) {
  return std::make_shared<const strata::Dataset>(std::move(ds));
}

inline const std::vector<std::string>& continents() {
  static const std::vector<std::string> v = {"Africa", "Americas", "Asia", "Europe", "Oceania"};
  return v;
}

inline const std::vector<std::string>& hdi_levels() {
  static const std::vector<std::string> v = {"low", "medium", "high", "very high"};
  return v;
}

// Country-level table shaped like a public-health dataset: a name, two
// categorical stratifiers, three numerical indicators and a yearly matrix.
// Rows listed in `missing_rows` lose their gdp and prevalence values.
struct HealthTable {
  std::shared_ptr<const strata::Dataset> dataset;
  std::vector<strata::RowId> missing_rows;
};

inline HealthTable health_table(std::size_t rows = 160, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::optional<std::string>> names(rows);
  std::vector<std::int32_t> continent(rows), hdi(rows);
  std::vector<double> gdp(rows), prevalence(rows), coverage(rows);
  const std::size_t years = 12;
  std::vector<double> deaths(rows * years);
  HealthTable out;
  for (std::size_t r = 0; r < rows; ++r) {
    names[r] = "Country " + std::to_string(r + 1);
    continent[r] = static_cast<std::int32_t>(r % 5);
    hdi[r] = static_cast<std::int32_t>((r / 5 + r % 3) % 4);
    gdp[r] = 500.0 + 60000.0 * unit(rng) * (1.0 + hdi[r]) / 4.0;
    prevalence[r] = 25.0 * unit(rng) * unit(rng);
    coverage[r] = 100.0 * unit(rng);
    const double base = 1000.0 * prevalence[r];
    for (std::size_t y = 0; y < years; ++y) {
      deaths[r * years + y] = unit(rng) < 0.05 ? strata::kMissing : base * (0.6 + 0.05 * y) + 50.0 * unit(rng);
    }
  }
  for (strata::RowId r : {3U, 41U, 97U, 128U}) {
    if (r >= rows) continue;
    gdp[r] = strata::kMissing;
    prevalence[r] = strata::kMissing;
    out.missing_rows.push_back(r);
  }
  std::vector<std::string> labels;
  strata::SecondKey key{"year", {}, true, {}};
  for (std::size_t y = 0; y < years; ++y) {
    labels.push_back(std::to_string(1999 + y));
    key.values.push_back(std::to_string(1999 + y));
    key.numbers.push_back(1999.0 + static_cast<double>(y));
  }
  strata::DatasetBuilder b(rows);
  b.add_text("country", "Country", names)
      .add_categorical("continent", "Continent", continents(), continent)
      .add_categorical("hdi", "HDI", hdi_levels(), hdi)
      .add_numerical("gdp", "GDP per capita", gdp)
      .add_numerical("prevalence", "Prevalence %", prevalence, strata::Domain{0, 25})
      .add_numerical("coverage", "Coverage %", coverage, strata::Domain{0, 100})
      .add_matrix("deaths", "Deaths", labels, key, deaths);
  out.dataset = share(std::move(b).build());
  return out;
}

// n rows, `cols` numerical columns plus one categorical column "cat" with
// cardinality 8. Values are deterministic in (n, seed).
inline std::shared_ptr<const strata::Dataset> wide_numeric(std::size_t n, std::size_t cols,
                                                           std::uint64_t seed = 11) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 100.0);
  strata::DatasetBuilder b(n);
  for (std::size_t c = 0; c < cols; ++c) {
    std::vector<double> v(n);
    for (auto& x : v) x = unit(rng);
    b.add_numerical("n" + std::to_string(c), "N" + std::to_string(c), std::move(v),
                    strata::Domain{0, 100});
  }
  std::vector<std::int32_t> cat(n);
  for (std::size_t i = 0; i < n; ++i) cat[i] = static_cast<std::int32_t>(rng() % 8);
  b.add_categorical("cat", "Category", {"a", "b", "c", "d", "e", "f", "g", "h"}, std::move(cat));
  return share(std::move(b).build());
}

}  // namespace fixtures
