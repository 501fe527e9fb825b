#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "subscan/dataset.hpp"
#include "subscan/error.hpp"
#include "subscan/scan.hpp"

namespace subscan {

// Expected outcome of the anomalous subset used for the subset deviation.
enum class ReferenceExpectation {
  subset_mean,  // observed outcome rate of the subset
  unity,        // 1.0
};

enum class RankingMode {
  // Negative ratios first (descending), then nonnegative ratios (descending),
  // undefined ratios last.
  deviation_ratio,
  // Global deviation descending.
  global_deviation,
};

struct Selection {
  enum class Rule { all, top_k, threshold };
  Rule rule = Rule::all;
  std::size_t k = 0;
  double threshold = 0.0;  // keep entries whose ranking statistic exceeds this

  static Selection keep_all() { return {}; }
  static Selection top(std::size_t k) { return {Rule::top_k, k, 0.0}; }
  static Selection above(double delta0) { return {Rule::threshold, 0, delta0}; }
};

struct RelevanceConfig {
  ReferenceExpectation reference = ReferenceExpectation::subset_mean;
  RankingMode ranking = RankingMode::deviation_ratio;
  Selection selection;
};

struct RelevanceEntry {
  std::size_t feature = 0;
  CategoryIndex value = 0;
  std::string feature_name;
  std::string value_label;
  std::size_t support = 0;  // records in the whole dataset with this value
  double e_value = 0.0;     // outcome mean over those records
  double subset_deviation = 0.0;
  double global_deviation = 0.0;
  std::optional<double> deviation_ratio;  // unset when the global deviation is 0
  std::size_t rank = 0;                   // 1-based position before selection

  std::optional<double> statistic(RankingMode mode) const {
    if (mode == RankingMode::global_deviation) {
      return support ? std::optional<double>(global_deviation) : std::nullopt;
    }
    return deviation_ratio;
  }
};

// Input to the ranking: one anomalous value and its marginal outcome mean.
struct ValueExpectation {
  std::size_t feature = 0;
  CategoryIndex value = 0;
  std::string feature_name;
  std::string value_label;
  std::size_t support = 0;
  double e_value = 0.0;
};

// Ranks anomalous values given their marginal means, the dataset mean and the
// subset reference expectation. Entries with equal keys keep input order.
inline std::vector<RelevanceEntry> rank_values(const std::vector<ValueExpectation>& values, double dataset_mean,
                                               double reference, const RelevanceConfig& config) {
  std::vector<RelevanceEntry> entries;
  entries.reserve(values.size());
  for (const auto& v : values) {
    RelevanceEntry e;
    e.feature = v.feature;
    e.value = v.value;
    e.feature_name = v.feature_name;
    e.value_label = v.value_label;
    e.support = v.support;
    e.e_value = v.e_value;
    e.subset_deviation = v.e_value - reference;
    e.global_deviation = v.e_value - dataset_mean;
    if (v.support > 0 && e.global_deviation != 0.0) e.deviation_ratio = e.subset_deviation / e.global_deviation;
    entries.push_back(std::move(e));
  }

  auto group = [&](const RelevanceEntry& e) {
    const auto s = e.statistic(config.ranking);
    if (!s) return 2;
    if (config.ranking == RankingMode::deviation_ratio && *s >= 0.0) return 1;
    return 0;
  };
  std::stable_sort(entries.begin(), entries.end(), [&](const RelevanceEntry& a, const RelevanceEntry& b) {
    const int ga = group(a), gb = group(b);
    if (ga != gb) return ga < gb;
    if (ga == 2) return false;
    return *a.statistic(config.ranking) > *b.statistic(config.ranking);
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;

  switch (config.selection.rule) {
    case Selection::Rule::all:
      break;
    case Selection::Rule::top_k:
      if (entries.size() > config.selection.k) entries.resize(config.selection.k);
      break;
    case Selection::Rule::threshold:
      std::erase_if(entries, [&](const RelevanceEntry& e) {
        const auto s = e.statistic(config.ranking);
        return !s || !(*s > config.selection.threshold);
      });
      break;
  }
  return entries;
}

// One entry per (constrained feature, anomalous value) of the scan result.
// Each value's expectation is its outcome mean over the entire dataset.
inline std::vector<RelevanceEntry> rank_feature_relevance(const Dataset& data, const ScanResult& result,
                                                          const RelevanceConfig& config) {
  if (result.descriptor.empty()) throw ContractError("relevance ranking needs a nonempty descriptor");
  const auto& schema = data.schema();
  result.descriptor.validate(schema);

  std::vector<ValueExpectation> values;
  for (const auto& [f, set] : result.descriptor.constraints()) {
    std::vector<std::size_t> count(schema.cardinality(f), 0), pos(schema.cardinality(f), 0);
    const auto col = data.column(f);
    for (std::size_t i = 0; i < data.n_records(); ++i) {
      ++count[col[i]];
      pos[col[i]] += data.outcomes()[i];
    }
    for (auto v : set) {
      ValueExpectation ve{f, v, schema.feature(f).name, schema.label(f, v), count[v], 0.0};
      if (count[v]) ve.e_value = static_cast<double>(pos[v]) / static_cast<double>(count[v]);
      values.push_back(std::move(ve));
    }
  }
  const double reference = config.reference == ReferenceExpectation::unity ? 1.0 : result.panel.subset_mean;
  return rank_values(values, data.global_mean(), reference, config);
}

}  // namespace subscan
