#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "subscan/dataset.hpp"
#include "subscan/error.hpp"
#include "subscan/rng.hpp"

namespace subscan {

// Cohort with a planted high-odds subgroup. Outside the subgroup the outcome
// odds are base_rate / (1 - base_rate); inside they are multiplied by q.
struct SyntheticSpec {
  std::size_t n_records = 2000;
  std::vector<std::size_t> cardinalities;
  double base_rate = 0.05;
  SubsetDescriptor planted;
  double odds_multiplier = 3.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_records == 0) throw ConfigError("synthetic cohort needs at least one record");
    if (!(base_rate > 0.0 && base_rate < 1.0)) throw ConfigError("base_rate must lie in (0, 1)");
    if (!(odds_multiplier > 1.0)) throw ConfigError("planted odds multiplier must exceed 1");
    for (auto c : cardinalities) {
      if (c == 0) throw ConfigError("feature cardinality must be at least 1");
    }
  }

  Schema schema() const {
    std::vector<Schema::Feature> features;
    for (std::size_t f = 0; f < cardinalities.size(); ++f) {
      Schema::Feature feat{"f" + std::to_string(f), {}};
      for (std::size_t v = 0; v < cardinalities[f]; ++v) feat.categories.push_back("c" + std::to_string(v));
      features.push_back(std::move(feat));
    }
    return Schema(std::move(features));
  }
};

struct SyntheticCohort {
  Dataset data;
  SubsetDescriptor planted;
  std::vector<std::size_t> planted_members;  // as recorded during generation
};

inline SyntheticCohort generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Schema schema = spec.schema();
  try {
    spec.planted.validate(schema);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("planted descriptor: ") + e.what());
  }

  const double base_odds = spec.base_rate / (1.0 - spec.base_rate);
  const double lifted_odds = spec.odds_multiplier * base_odds;
  const double inside_rate = lifted_odds / (1.0 + lifted_odds);
  if (!(inside_rate < 1.0)) throw ConfigError("planted outcome probability rounds to 1");

  Rng rng(spec.seed);
  const std::size_t m = spec.cardinalities.size();
  std::vector<Dataset::Column> columns(m, Dataset::Column(spec.n_records));
  std::vector<std::uint8_t> outcomes(spec.n_records);
  std::vector<std::size_t> members;

  for (std::size_t i = 0; i < spec.n_records; ++i) {
    bool inside = true;
    for (std::size_t f = 0; f < m; ++f) {
      const auto v = static_cast<CategoryIndex>(rng.below(spec.cardinalities[f]));
      columns[f][i] = v;
      if (!spec.planted.contains(f, v)) inside = false;
    }
    if (inside) members.push_back(i);
    outcomes[i] = rng.bernoulli(inside ? inside_rate : spec.base_rate) ? 1 : 0;
  }
  return {Dataset(std::move(schema), std::move(columns), std::move(outcomes)), spec.planted, std::move(members)};
}

}  // namespace subscan
