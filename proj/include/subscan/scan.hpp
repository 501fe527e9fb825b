#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subscan/dataset.hpp"
#include "subscan/error.hpp"
#include "subscan/parallel.hpp"
#include "subscan/rng.hpp"
#include "subscan/scoring.hpp"

namespace subscan {

enum class FeatureOrder { fixed, shuffled };

// One coordinate-ascent step on a single feature, reported to
// ScanConfig::step_observer. counts/positives are per category over the
// records that satisfy every other feature's current constraint.
struct StepTrace {
  std::size_t restart = 0;
  std::size_t pass = 0;
  std::size_t feature = 0;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> positives;
  SubsetDescriptor::ValueSet previous;
  SubsetDescriptor::ValueSet adopted;
  double previous_score = 0.0;
  double adopted_score = 0.0;
};

struct ScanConfig {
  std::size_t n_restarts = 10;
  std::size_t max_passes = 20;
  std::uint64_t seed = 0;
  FeatureOrder feature_order = FeatureOrder::fixed;
  std::size_t workers = 1;
  // Called after every feature step. Invoked from worker threads when workers > 1.
  std::function<void(const StepTrace&)> step_observer;

  void validate() const {
    if (n_restarts < 1) throw ConfigError("n_restarts must be at least 1");
    if (max_passes < 1) throw ConfigError("max_passes must be at least 1");
  }
};

struct ScanResult {
  SubsetDescriptor descriptor;
  ScorePanel panel;
  std::optional<EffectMeasures> effects;  // unset when subset or complement is empty
  std::size_t restart_index = 0;
};

inline void require_nondegenerate(const Dataset& data) {
  if (data.n_positive() == 0) throw DegenerateDataError("dataset has no positive outcomes");
  if (data.n_positive() == data.n_records()) throw DegenerateDataError("dataset has no negative outcomes");
}

struct SubsetEvaluation {
  SubsetCounts counts;
  ScorePanel panel;
  std::optional<EffectMeasures> effects;
};

inline ScorePanel panel_for(const SubsetCounts& c, double global_mean) {
  if (c.n_subset == 0) {
    ScorePanel p;
    p.global_mean = global_mean;
    return p;
  }
  return bernoulli_score(c.n_positive, c.n_subset, global_mean);
}

inline std::optional<EffectMeasures> effects_for(const SubsetCounts& c) {
  if (c.n_subset == 0 || c.complement_size() == 0) return std::nullopt;
  return odds_ratio(c.n_positive, c.n_subset - c.n_positive, c.complement_positive(),
                    c.complement_size() - c.complement_positive());
}

// Score panel and effect measures for a descriptor, recomputed from membership.
inline SubsetEvaluation evaluate_subset(const Dataset& data, const SubsetDescriptor& d) {
  SubsetEvaluation ev;
  ev.counts = count_subset(data, d);
  ev.panel = panel_for(ev.counts, data.global_mean());
  ev.effects = effects_for(ev.counts);
  return ev;
}

namespace detail {

// LTSS priority: positive rate descending, then larger count, then lower index.
// Categories with no records go last. Rates compare by cross-multiplication.
inline std::vector<CategoryIndex> priority_order(const std::vector<std::size_t>& counts,
                                                 const std::vector<std::size_t>& positives) {
  std::vector<CategoryIndex> order(counts.size());
  std::iota(order.begin(), order.end(), CategoryIndex{0});
  std::sort(order.begin(), order.end(), [&](CategoryIndex a, CategoryIndex b) {
    if ((counts[a] == 0) != (counts[b] == 0)) return counts[b] == 0;
    const auto lhs = static_cast<unsigned __int128>(positives[a]) * counts[b];
    const auto rhs = static_cast<unsigned __int128>(positives[b]) * counts[a];
    if (lhs != rhs) return lhs > rhs;
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;
  });
  return order;
}

struct PrefixChoice {
  std::size_t length = 0;
  double score = -1.0;
};

inline PrefixChoice best_prefix(const std::vector<CategoryIndex>& order, const std::vector<std::size_t>& counts,
                                const std::vector<std::size_t>& positives, double mu) {
  PrefixChoice best;
  std::size_t n = 0, c = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    n += counts[order[k]];
    c += positives[order[k]];
    const double s = score_counts(c, n, mu);
    if (s > best.score) {
      best.score = s;
      best.length = k + 1;
    }
  }
  return best;
}

struct RestartOutcome {
  SubsetDescriptor descriptor;
  ScorePanel panel;
};

inline RestartOutcome run_restart(const Dataset& data, const ScanConfig& config, std::size_t restart) {
  const std::size_t m = data.n_features();
  const std::size_t n = data.n_records();
  const double mu = data.global_mean();
  const auto& schema = data.schema();
  Rng rng(config.seed, restart);

  // in_set[f][v]: category v of feature f is in the current value set.
  std::vector<std::vector<char>> in_set(m);
  for (std::size_t f = 0; f < m; ++f) {
    const std::size_t h = schema.cardinality(f);
    in_set[f].assign(h, 0);
    bool any = false;
    while (!any) {
      for (std::size_t v = 0; v < h; ++v) {
        in_set[f][v] = rng.bernoulli(0.5) ? 1 : 0;
        any = any || in_set[f][v];
      }
    }
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (config.feature_order == FeatureOrder::shuffled) rng.shuffle(order.begin(), order.end());

  // Number of features whose constraint record i violates.
  std::vector<std::uint32_t> violations(n, 0);
  for (std::size_t f = 0; f < m; ++f) {
    const auto col = data.column(f);
    for (std::size_t i = 0; i < n; ++i) violations[i] += in_set[f][col[i]] ? 0 : 1;
  }
  const auto outcomes = data.outcomes();

  auto value_set = [&](std::size_t f) {
    SubsetDescriptor::ValueSet s;
    for (std::size_t v = 0; v < in_set[f].size(); ++v) {
      if (in_set[f][v]) s.push_back(static_cast<CategoryIndex>(v));
    }
    return s;
  };

  for (std::size_t pass = 0; pass < config.max_passes; ++pass) {
    bool changed = false;
    for (std::size_t f : order) {
      const std::size_t h = schema.cardinality(f);
      const auto col = data.column(f);
      std::vector<std::size_t> counts(h, 0), positives(h, 0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t own = in_set[f][col[i]] ? 0 : 1;
        if (violations[i] == own) {
          ++counts[col[i]];
          positives[col[i]] += outcomes[i];
        }
      }

      std::size_t prev_n = 0, prev_c = 0;
      for (std::size_t v = 0; v < h; ++v) {
        if (in_set[f][v]) {
          prev_n += counts[v];
          prev_c += positives[v];
        }
      }
      const double previous_score = score_counts(prev_c, prev_n, mu);

      const auto prio = priority_order(counts, positives);
      const auto best = best_prefix(prio, counts, positives, mu);
      std::vector<char> next(h, 0);
      for (std::size_t k = 0; k < best.length; ++k) next[prio[k]] = 1;

      if (best.score < previous_score - 1e-9 * std::max(1.0, std::abs(previous_score))) {
        throw std::logic_error("scan ascent decreased the score on feature " + std::to_string(f));
      }

      StepTrace trace;
      if (config.step_observer) {
        trace.previous = value_set(f);
      }
      if (next != in_set[f]) {
        changed = true;
        for (std::size_t i = 0; i < n; ++i) {
          const std::uint32_t before = in_set[f][col[i]] ? 0 : 1;
          const std::uint32_t after = next[col[i]] ? 0 : 1;
          violations[i] = violations[i] - before + after;
        }
        in_set[f] = std::move(next);
      }
      if (config.step_observer) {
        trace.restart = restart;
        trace.pass = pass;
        trace.feature = f;
        trace.counts = std::move(counts);
        trace.positives = std::move(positives);
        trace.adopted = value_set(f);
        trace.previous_score = previous_score;
        trace.adopted_score = best.score;
        config.step_observer(trace);
      }
    }
    if (!changed) break;
  }

  SubsetDescriptor d;
  for (std::size_t f = 0; f < m; ++f) d.constrain(f, value_set(f));
  d = d.normalized(schema);

  SubsetCounts counts{0, 0, n, data.n_positive()};
  for (std::size_t i = 0; i < n; ++i) {
    if (violations[i] == 0) {
      ++counts.n_subset;
      counts.n_positive += outcomes[i];
    }
  }
  return {std::move(d), panel_for(counts, mu)};
}

}  // namespace detail

// Multidimensional subset scan with random restarts. Each restart starts from
// random nonempty value sets and performs coordinate ascent: for one feature
// at a time, the best value set given all other constraints is found by
// scoring the prefixes of the categories sorted by positive rate.
inline ScanResult scan(const Dataset& data, const ScanConfig& config) {
  config.validate();
  require_nondegenerate(data);

  std::vector<detail::RestartOutcome> outcomes(config.n_restarts);
  parallel_for(config.n_restarts, config.workers,
               [&](std::size_t r) { outcomes[r] = detail::run_restart(data, config, r); });

  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r) {
    if (outcomes[r].panel.score > outcomes[best].panel.score) best = r;
  }
  ScanResult result;
  result.descriptor = std::move(outcomes[best].descriptor);
  auto ev = evaluate_subset(data, result.descriptor);
  result.panel = ev.panel;
  result.effects = ev.effects;
  result.restart_index = best;
  return result;
}

// Number of descriptors exhaustive_scan would consider, bounded by the
// product over features of 2^cardinality. Saturates at UINT64_MAX.
inline std::uint64_t exhaustive_budget(const Schema& schema) {
  std::uint64_t total = 1;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto h = schema.cardinality(f);
    if (h >= 63) return UINT64_MAX;
    const std::uint64_t choices = std::uint64_t{1} << h;
    if (total > UINT64_MAX / choices) return UINT64_MAX;
    total *= choices;
  }
  return total;
}

// Global maximum by enumerating every descriptor. Ties go to fewer
// constrained features, then to the lexicographically first descriptor
// (per feature: unconstrained first, then value bitmasks ascending).
inline ScanResult exhaustive_scan(const Dataset& data, std::uint64_t limit) {
  const auto& schema = data.schema();
  const auto budget = exhaustive_budget(schema);
  if (budget > limit) {
    throw ContractError("exhaustive scan needs " + std::to_string(budget) + " evaluations, limit is " +
                        std::to_string(limit));
  }
  require_nondegenerate(data);
  const std::size_t m = schema.size();
  const double mu = data.global_mean();

  // Aggregate records into cells of the full cross-classification.
  std::vector<std::size_t> stride(m, 1);
  std::size_t n_cells = 1;
  for (std::size_t f = m; f-- > 0;) {
    stride[f] = n_cells;
    n_cells *= schema.cardinality(f);
  }
  std::vector<std::size_t> cell_n(n_cells, 0), cell_c(n_cells, 0);
  for (std::size_t i = 0; i < data.n_records(); ++i) {
    std::size_t cell = 0;
    for (std::size_t f = 0; f < m; ++f) cell += data.value(i, f) * stride[f];
    ++cell_n[cell];
    cell_c[cell] += data.outcomes()[i];
  }

  // choices[f]: 0 = unconstrained, then every strict nonempty bitmask.
  std::vector<std::vector<std::uint64_t>> choices(m);
  for (std::size_t f = 0; f < m; ++f) {
    const std::uint64_t full = (std::uint64_t{1} << schema.cardinality(f)) - 1;
    choices[f].push_back(0);
    for (std::uint64_t mask = 1; mask < full; ++mask) choices[f].push_back(mask);
  }

  std::vector<std::size_t> pick(m, 0);
  std::vector<std::size_t> best_pick(m, 0);
  double best_score = -1.0;
  std::size_t best_constrained = 0;
  for (bool done = false; !done;) {
    std::size_t n = 0, c = 0, constrained = 0;
    for (std::size_t f = 0; f < m; ++f) constrained += pick[f] != 0;
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      if (cell_n[cell] == 0) continue;
      bool inside = true;
      for (std::size_t f = 0; f < m && inside; ++f) {
        const std::uint64_t mask = choices[f][pick[f]];
        const std::size_t v = (cell / stride[f]) % schema.cardinality(f);
        if (mask != 0 && !((mask >> v) & 1)) inside = false;
      }
      if (inside) {
        n += cell_n[cell];
        c += cell_c[cell];
      }
    }
    const double s = score_counts(c, n, mu);
    if (s > best_score || (s == best_score && constrained < best_constrained)) {
      best_score = s;
      best_constrained = constrained;
      best_pick = pick;
    }
    // Advance the odometer; the last feature varies fastest.
    for (std::size_t f = m;;) {
      if (f == 0) {
        done = true;
        break;
      }
      --f;
      if (++pick[f] < choices[f].size()) break;
      pick[f] = 0;
    }
  }

  ScanResult result;
  for (std::size_t f = 0; f < m; ++f) {
    const std::uint64_t mask = choices[f][best_pick[f]];
    if (mask == 0) continue;
    SubsetDescriptor::ValueSet set;
    for (std::size_t v = 0; v < schema.cardinality(f); ++v) {
      if ((mask >> v) & 1) set.push_back(static_cast<CategoryIndex>(v));
    }
    result.descriptor.constrain(f, std::move(set));
  }
  auto ev = evaluate_subset(data, result.descriptor);
  result.panel = ev.panel;
  result.effects = ev.effects;
  return result;
}

}  // namespace subscan
