#pragma once

#include <cstdint>
#include <vector>

#include "subscan/dataset.hpp"
#include "subscan/rng.hpp"
#include "subscan/synthetic.hpp"

namespace subscan::fixtures {

// Planted-recovery cohort: 2000 records, five binary features, base rate 0.05,
// odds multiplier 3 on the subgroup f0 = c0 AND f1 = c0.
inline SyntheticSpec recovery_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.n_records = 2000;
  s.cardinalities = {2, 2, 2, 2, 2};
  s.base_rate = 0.05;
  s.odds_multiplier = 3.0;
  s.planted.constrain(0, {0}).constrain(1, {0});
  s.seed = seed;
  return s;
}

// Mixed-cardinality cohort used by generator tests.
inline SyntheticSpec mixed_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.n_records = 2000;
  s.cardinalities = {2, 3, 4, 5, 2};
  s.base_rate = 0.05;
  s.odds_multiplier = 3.0;
  s.planted.constrain(0, {0}).constrain(1, {1, 2});
  s.seed = seed;
  return s;
}

// Random dataset with uniform features and i.i.d. outcomes at `rate`;
// redrawn until it has at least one positive and one negative.
inline Dataset random_dataset(std::uint64_t seed, std::size_t n, const std::vector<std::size_t>& cards, double rate) {
  Rng rng(seed, 777);
  std::vector<Schema::Feature> features;
  for (std::size_t f = 0; f < cards.size(); ++f) {
    Schema::Feature feat{"x" + std::to_string(f), {}};
    for (std::size_t v = 0; v < cards[f]; ++v) feat.categories.push_back("v" + std::to_string(v));
    features.push_back(std::move(feat));
  }
  std::vector<Dataset::Column> cols(cards.size(), Dataset::Column(n));
  for (std::size_t f = 0; f < cards.size(); ++f) {
    for (auto& v : cols[f]) v = static_cast<CategoryIndex>(rng.below(cards[f]));
  }
  std::vector<std::uint8_t> y(n);
  std::size_t pos = 0;
  while (pos == 0 || pos == n) {
    pos = 0;
    for (auto& v : y) {
      v = rng.bernoulli(rate) ? 1 : 0;
      pos += v;
    }
  }
  return Dataset(Schema(std::move(features)), std::move(cols), std::move(y));
}

}  // namespace subscan::fixtures
