#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "subscan/dataset.hpp"
#include "subscan/error.hpp"
#include "subscan/relevance.hpp"
#include "subscan/scan.hpp"
#include "subscan/significance.hpp"

namespace subscan {

// Replace `from_values` of one constrained feature by `to_value`, a value
// outside the descriptor's set for that feature.
struct SubstitutionCandidate {
  std::size_t feature = 0;
  SubsetDescriptor::ValueSet from_values;
  CategoryIndex to_value = 0;
  SubsetDescriptor resulting;

  bool is_collapse() const noexcept { return from_values.size() > 1; }
};

inline SubstitutionCandidate make_substitution(const SubsetDescriptor& base, std::size_t feature,
                                               SubsetDescriptor::ValueSet from_values, CategoryIndex to_value) {
  const auto* set = base.values(feature);
  if (set == nullptr) throw ContractError("substitution on an unconstrained feature");
  SubsetDescriptor::ValueSet next;
  for (auto v : *set) {
    if (!std::binary_search(from_values.begin(), from_values.end(), v)) next.push_back(v);
  }
  next.push_back(to_value);
  SubstitutionCandidate c{feature, std::move(from_values), to_value, base};
  c.resulting.constrain(feature, std::move(next));
  return c;
}

// All single swaps [v -> v'] and, for features with two or more anomalous
// values, all collapses [(every value) -> v']. Order: feature, then swaps by
// (from, to), then collapses by to.
inline std::vector<SubstitutionCandidate> enumerate_substitutions(const SubsetDescriptor& descriptor,
                                                                  const Schema& schema) {
  descriptor.validate(schema);
  std::vector<SubstitutionCandidate> out;
  for (const auto& [f, set] : descriptor.constraints()) {
    std::vector<CategoryIndex> complement;
    for (CategoryIndex v = 0; v < schema.cardinality(f); ++v) {
      if (!std::binary_search(set.begin(), set.end(), v)) complement.push_back(v);
    }
    if (complement.empty()) continue;
    for (auto from : set) {
      for (auto to : complement) out.push_back(make_substitution(descriptor, f, {from}, to));
    }
    if (set.size() >= 2) {
      for (auto to : complement) out.push_back(make_substitution(descriptor, f, set, to));
    }
  }
  return out;
}

struct SubstitutionOutcome {
  SubstitutionCandidate candidate;
  double old_score = 0.0;
  double new_score = 0.0;
  std::optional<double> old_or;
  std::optional<double> new_or;
  std::optional<EffectMeasures> new_effects;
  ScorePanel new_panel;
  double new_p = 1.0;
  bool p_at_floor = false;
  bool significant = false;
  bool empty = false;  // the substituted descriptor matches no records
};

namespace detail {

inline SubstitutionOutcome rescore(const Dataset& data, SubstitutionCandidate candidate, double old_score,
                                   std::optional<double> old_or, const NullDistribution& null, double alpha) {
  SubstitutionOutcome o;
  const auto ev = evaluate_subset(data, candidate.resulting);
  o.candidate = std::move(candidate);
  o.old_score = old_score;
  o.old_or = old_or;
  o.new_panel = ev.panel;
  o.empty = ev.counts.n_subset == 0;
  o.new_score = o.empty ? 0.0 : ev.panel.score;
  o.new_effects = ev.effects;
  if (ev.effects) o.new_or = ev.effects->odds_ratio;
  const auto p = null.p_value(o.new_score);
  o.new_p = p.p;
  o.p_at_floor = p.at_floor();
  o.significant = o.new_p <= alpha;
  return o;
}

inline std::optional<double> or_of(const ScanResult& r) {
  return r.effects ? std::optional<double>(r.effects->odds_ratio) : std::nullopt;
}

}  // namespace detail

// Every candidate scored independently against the original descriptor. The
// p-values reuse one null distribution. Ordered by the best relevance rank
// among the substituted values (unranked last), then enumeration order.
inline std::vector<SubstitutionOutcome> single_substitution_sweep(const Dataset& data, const ScanResult& result,
                                                                  const std::vector<RelevanceEntry>& ranking,
                                                                  double alpha, const NullDistribution& null,
                                                                  std::size_t workers = 1) {
  auto candidates = enumerate_substitutions(result.descriptor, data.schema());
  std::map<std::pair<std::size_t, CategoryIndex>, std::size_t> rank_of;
  for (const auto& e : ranking) rank_of.emplace(std::pair{e.feature, e.value}, e.rank);

  std::vector<SubstitutionOutcome> outcomes(candidates.size());
  parallel_for(candidates.size(), workers, [&](std::size_t i) {
    outcomes[i] = detail::rescore(data, candidates[i], result.panel.score, detail::or_of(result), null, alpha);
  });

  auto key = [&](const SubstitutionOutcome& o) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (auto v : o.candidate.from_values) {
      auto it = rank_of.find({o.candidate.feature, v});
      if (it != rank_of.end()) best = std::min(best, it->second);
    }
    return best;
  };
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [&](const SubstitutionOutcome& a, const SubstitutionOutcome& b) { return key(a) < key(b); });
  return outcomes;
}

inline std::vector<SubstitutionOutcome> single_substitution_sweep(const Dataset& data, const ScanResult& result,
                                                                  const std::vector<RelevanceEntry>& ranking,
                                                                  double alpha, const BootstrapConfig& bootstrap) {
  return single_substitution_sweep(data, result, ranking, alpha, null_distribution(data, bootstrap),
                                   bootstrap.workers);
}

struct StoppingRule {
  enum class Kind {
    p_value_above,  // stop once the empirical p-value exceeds threshold
    score_at_most,  // stop once the score is at or below threshold
  };
  Kind kind = Kind::p_value_above;
  double threshold = 0.05;

  bool satisfied(double score, double p) const {
    return kind == Kind::p_value_above ? p > threshold : score <= threshold;
  }
};

enum class RetentionPolicy {
  score_decreasing,  // keep a substitution only if it strictly lowers the score
  unconditional,     // keep every applicable substitution
};

struct GreedyStep {
  SubstitutionOutcome outcome;
  bool retained = false;
};

struct GreedyResult {
  SubsetDescriptor descriptor;
  ScorePanel panel;
  std::optional<EffectMeasures> effects;
  PValue p;
  std::vector<SubstitutionOutcome> applied;
  std::vector<GreedyStep> trace;  // every attempted substitution, in order
  bool denormalized = false;      // stopping rule reached
};

// Cumulative cross-substitution. Features are taken in order of first
// appearance in the ranking; each ranked value of the feature is swapped for
// complement values of that feature (relative to the input descriptor) until
// one swap is kept. Runs until the stopping rule holds or the queue is empty.
inline GreedyResult cross_substitute_greedy(const Dataset& data, const ScanResult& result,
                                            const std::vector<RelevanceEntry>& ranking, const StoppingRule& stop,
                                            double alpha, const NullDistribution& null,
                                            RetentionPolicy policy = RetentionPolicy::score_decreasing) {
  const auto& schema = data.schema();
  GreedyResult g;
  g.descriptor = result.descriptor;
  g.panel = result.panel;
  g.effects = result.effects;
  g.p = null.p_value(result.panel.score);
  if (g.effects) {
    g.effects->p_value = g.p.p;
    g.effects->p_at_floor = g.p.at_floor();
  }
  if (stop.satisfied(g.panel.score, g.p.p)) {
    g.denormalized = true;
    return g;
  }

  std::vector<std::size_t> queue;
  for (const auto& e : ranking) {
    if (std::find(queue.begin(), queue.end(), e.feature) == queue.end()) queue.push_back(e.feature);
  }

  for (std::size_t f : queue) {
    const auto* original = result.descriptor.values(f);
    if (original == nullptr) continue;
    std::vector<CategoryIndex> complement;
    for (CategoryIndex v = 0; v < schema.cardinality(f); ++v) {
      if (!std::binary_search(original->begin(), original->end(), v)) complement.push_back(v);
    }
    for (const auto& entry : ranking) {
      if (entry.feature != f) continue;
      for (auto to : complement) {
        if (!g.descriptor.contains(f, entry.value)) break;
        if (g.descriptor.contains(f, to)) continue;
        auto cand = make_substitution(g.descriptor, f, {entry.value}, to);
        auto outcome = detail::rescore(data, std::move(cand), g.panel.score,
                                       g.effects ? std::optional<double>(g.effects->odds_ratio) : std::nullopt, null,
                                       alpha);
        const bool keep = !outcome.empty && (policy == RetentionPolicy::unconditional ||
                                             outcome.new_score < outcome.old_score);
        g.trace.push_back({outcome, keep});
        if (!keep) continue;
        g.descriptor = outcome.candidate.resulting;
        g.panel = outcome.new_panel;
        g.effects = outcome.new_effects;
        g.p = null.p_value(outcome.new_score);
        if (g.effects) {
          g.effects->p_value = g.p.p;
          g.effects->p_at_floor = g.p.at_floor();
        }
        g.applied.push_back(std::move(outcome));
        if (stop.satisfied(g.panel.score, g.p.p)) {
          g.denormalized = true;
          return g;
        }
      }
    }
  }
  return g;
}

}  // namespace subscan
