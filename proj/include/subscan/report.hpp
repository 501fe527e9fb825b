#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "subscan/csv.hpp"
#include "subscan/dataset.hpp"
#include "subscan/error.hpp"
#include "subscan/relevance.hpp"
#include "subscan/scan.hpp"
#include "subscan/significance.hpp"
#include "subscan/substitution.hpp"

namespace subscan::report {

using nlohmann::ordered_json;

inline ordered_json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

inline ordered_json labels(const Schema& schema, std::size_t f, const SubsetDescriptor::ValueSet& values) {
  ordered_json out = ordered_json::array();
  for (auto v : values) out.push_back(schema.label(f, v));
  return out;
}

inline ordered_json descriptor_json(const SubsetDescriptor& d, const Schema& schema) {
  ordered_json out = ordered_json::array();
  for (const auto& [f, set] : d.constraints()) {
    out.push_back({{"feature", schema.feature(f).name}, {"values", labels(schema, f, set)}});
  }
  return out;
}

inline SubsetDescriptor descriptor_from_json(const nlohmann::json& j, const Schema& schema) {
  if (!j.is_array()) throw InputError("descriptor must be a JSON array");
  SubsetDescriptor d;
  for (const auto& c : j) {
    const auto name = c.at("feature").get<std::string>();
    const auto f = schema.find_feature(name);
    if (!f) throw InputError("descriptor names unknown feature '" + name + "'");
    SubsetDescriptor::ValueSet set;
    for (const auto& label : c.at("values")) {
      const auto v = schema.find_category(*f, label.get<std::string>());
      if (!v) throw InputError("descriptor names unknown value '" + label.get<std::string>() + "' of '" + name + "'");
      set.push_back(*v);
    }
    if (set.empty()) throw InputError("descriptor constraint on '" + name + "' has no values");
    d.constrain(*f, std::move(set));
  }
  return d;
}

inline ordered_json panel_json(const ScorePanel& p) {
  return {{"score", p.score},
          {"q_mle", number_or_null(p.q_mle)},
          {"q_unbounded", p.q_unbounded()},
          {"n_subset", p.n_subset},
          {"n_positive", p.n_positive},
          {"global_mean", p.global_mean},
          {"subset_mean", p.subset_mean}};
}

inline ordered_json effects_json(const std::optional<EffectMeasures>& e) {
  if (!e) return nullptr;
  return {{"odds_ratio", e->odds_ratio},
          {"ci_low", e->ci_low},
          {"ci_high", e->ci_high},
          {"subset_rate", e->subset_rate},
          {"complement_rate", e->complement_rate},
          {"continuity_corrected", e->continuity_corrected},
          {"p_value", number_or_null(e->p_value)},
          {"p_at_floor", e->p_at_floor}};
}

inline ordered_json dataset_json(const Dataset& data) {
  ordered_json features = ordered_json::array();
  for (const auto& f : data.schema().features()) {
    features.push_back({{"name", f.name}, {"categories", f.categories}});
  }
  return {{"n_records", data.n_records()},
          {"n_positive", data.n_positive()},
          {"global_mean", data.global_mean()},
          {"features", features}};
}

inline ordered_json scan_json(const ScanResult& r, const Schema& schema, const PValue& p, const NullDistribution& null) {
  auto effects = r.effects;
  if (effects) {
    effects->p_value = p.p;
    effects->p_at_floor = p.at_floor();
  }
  return {{"descriptor", descriptor_json(r.descriptor, schema)},
          {"description", to_string(r.descriptor, schema)},
          {"panel", panel_json(r.panel)},
          {"effects", effects_json(effects)},
          {"p_value", p.p},
          {"p_at_floor", p.at_floor()},
          {"exceedances", p.exceedances},
          {"restart_index", r.restart_index},
          {"null_scores", null.scores}};
}

inline ordered_json relevance_json(const std::vector<RelevanceEntry>& entries) {
  ordered_json out = ordered_json::array();
  for (const auto& e : entries) {
    out.push_back({{"rank", e.rank},
                   {"feature", e.feature_name},
                   {"value", e.value_label},
                   {"support", e.support},
                   {"e_value", e.e_value},
                   {"subset_deviation", e.subset_deviation},
                   {"global_deviation", e.global_deviation},
                   {"deviation_ratio", number_or_null(e.deviation_ratio)},
                   {"ratio_defined", e.deviation_ratio.has_value()}});
  }
  return out;
}

inline std::string from_label(const SubstitutionCandidate& c, const Schema& schema) {
  std::string out;
  for (std::size_t i = 0; i < c.from_values.size(); ++i) {
    if (i) out += '|';
    out += schema.label(c.feature, c.from_values[i]);
  }
  return out;
}

inline ordered_json outcome_json(const SubstitutionOutcome& o, const Schema& schema) {
  return {{"feature", schema.feature(o.candidate.feature).name},
          {"from_values", labels(schema, o.candidate.feature, o.candidate.from_values)},
          {"to_value", schema.label(o.candidate.feature, o.candidate.to_value)},
          {"collapse", o.candidate.is_collapse()},
          {"resulting_descriptor", descriptor_json(o.candidate.resulting, schema)},
          {"old_score", o.old_score},
          {"new_score", o.new_score},
          {"old_or", number_or_null(o.old_or)},
          {"new_or", number_or_null(o.new_or)},
          {"new_n_subset", o.new_panel.n_subset},
          {"new_p", o.new_p},
          {"p_at_floor", o.p_at_floor},
          {"significant", o.significant},
          {"empty", o.empty}};
}

inline ordered_json outcomes_json(const std::vector<SubstitutionOutcome>& outcomes, const Schema& schema) {
  ordered_json out = ordered_json::array();
  for (const auto& o : outcomes) out.push_back(outcome_json(o, schema));
  return out;
}

inline ordered_json greedy_json(const GreedyResult& g, const Schema& schema) {
  ordered_json trace = ordered_json::array();
  for (const auto& step : g.trace) {
    auto j = outcome_json(step.outcome, schema);
    j["retained"] = step.retained;
    trace.push_back(std::move(j));
  }
  return {{"denormalized", g.denormalized},
          {"descriptor", descriptor_json(g.descriptor, schema)},
          {"description", to_string(g.descriptor, schema)},
          {"panel", panel_json(g.panel)},
          {"effects", effects_json(g.effects)},
          {"p_value", g.p.p},
          {"p_at_floor", g.p.at_floor()},
          {"applied", outcomes_json(g.applied, schema)},
          {"trace", trace}};
}

namespace detail {

inline std::string fmt_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fmt_optional(std::optional<double> v) { return v ? fmt_number(*v) : std::string(); }

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += subscan::detail::quote_field(fields[i]);
  }
  return out + "\r\n";
}

}  // namespace detail

// Relevance table: Rank, Feature, Value, E, Subset_Dev, Global_Dev, D.R
inline std::string relevance_csv(const std::vector<RelevanceEntry>& entries) {
  std::string out = detail::csv_row({"Rank", "Feature", "Value", "E", "Subset_Dev", "Global_Dev", "D.R"});
  for (const auto& e : entries) {
    out += detail::csv_row({std::to_string(e.rank), e.feature_name, e.value_label, detail::fmt_number(e.e_value),
                            detail::fmt_number(e.subset_deviation), detail::fmt_number(e.global_deviation),
                            detail::fmt_optional(e.deviation_ratio)});
  }
  return out;
}

// Score and odds-ratio changes per substitution.
inline std::string substitution_table_csv(const std::vector<SubstitutionOutcome>& outcomes, const Schema& schema) {
  std::string out = detail::csv_row({"Feature", "Feature Value", "Substitute", "O_Score", "N_Score", "O_OR", "N_OR",
                                     "P_Value", "P_At_Floor", "Significant", "Empty"});
  for (const auto& o : outcomes) {
    out += detail::csv_row({schema.feature(o.candidate.feature).name, from_label(o.candidate, schema),
                            schema.label(o.candidate.feature, o.candidate.to_value), detail::fmt_number(o.old_score),
                            detail::fmt_number(o.new_score), detail::fmt_optional(o.old_or),
                            detail::fmt_optional(o.new_or), detail::fmt_number(o.new_p),
                            o.p_at_floor ? "true" : "false", o.significant ? "true" : "false",
                            o.empty ? "true" : "false"});
  }
  return out;
}

// Plot-ready rows; substitutions that produce an empty subset are omitted.
inline std::string substitution_plot_csv(const std::vector<SubstitutionOutcome>& outcomes, const Schema& schema) {
  std::string out =
      detail::csv_row({"feature", "from_value", "to_value", "new_score", "p_value", "odds_ratio", "p_at_floor"});
  for (const auto& o : outcomes) {
    if (o.empty) continue;
    out += detail::csv_row({schema.feature(o.candidate.feature).name, from_label(o.candidate, schema),
                            schema.label(o.candidate.feature, o.candidate.to_value), detail::fmt_number(o.new_score),
                            detail::fmt_number(o.new_p), detail::fmt_optional(o.new_or),
                            o.p_at_floor ? "true" : "false"});
  }
  return out;
}

}  // namespace subscan::report
