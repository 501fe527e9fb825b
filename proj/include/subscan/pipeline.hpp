#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "json.hpp"

#include "subscan/csv.hpp"
#include "subscan/dataset.hpp"
#include "subscan/error.hpp"
#include "subscan/relevance.hpp"
#include "subscan/report.hpp"
#include "subscan/rng.hpp"
#include "subscan/scan.hpp"
#include "subscan/significance.hpp"
#include "subscan/substitution.hpp"
#include "subscan/synthetic.hpp"

namespace subscan {

inline constexpr const char* kToolName = "subscan";
inline constexpr const char* kToolVersion = "0.1.0";

// Every knob of a run. The seed is the only source of randomness: scan and
// bootstrap streams are derived from it.
struct PipelineConfig {
  std::string input;
  std::string outcome = "y";
  bool boolean_aliases = false;
  std::string out = ".";
  std::string scan_report;  // prior scan.json for rank / substitute

  std::uint64_t seed = 0;
  std::size_t workers = 1;

  std::size_t restarts = 10;
  std::size_t max_passes = 20;
  FeatureOrder feature_order = FeatureOrder::fixed;

  std::size_t replicates = 50;
  double alpha = 0.05;

  RelevanceConfig relevance;

  StoppingRule::Kind stop_rule = StoppingRule::Kind::p_value_above;
  std::optional<double> stop_threshold;  // defaults to alpha for the p-value rule
  RetentionPolicy greedy_policy = RetentionPolicy::score_decreasing;

  void validate() const {
    if (restarts < 1) throw ConfigError("restarts must be at least 1");
    if (max_passes < 1) throw ConfigError("max-passes must be at least 1");
    if (replicates < 1) throw ConfigError("replicates must be at least 1");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (relevance.selection.rule == Selection::Rule::top_k && relevance.selection.k == 0) {
      throw ConfigError("top-k selection needs top-k >= 1");
    }
  }

  ScanConfig scan_config() const {
    ScanConfig sc;
    sc.n_restarts = restarts;
    sc.max_passes = max_passes;
    sc.seed = derive_seed(seed, 1);
    sc.feature_order = feature_order;
    sc.workers = workers;
    return sc;
  }

  BootstrapConfig bootstrap_config() const {
    BootstrapConfig bc;
    bc.n_replicates = replicates;
    bc.seed = derive_seed(seed, 2);
    bc.scan = scan_config();
    bc.workers = workers;
    return bc;
  }

  StoppingRule stopping() const {
    StoppingRule rule;
    rule.kind = stop_rule;
    rule.threshold = stop_threshold.value_or(stop_rule == StoppingRule::Kind::p_value_above ? alpha : 0.0);
    return rule;
  }
};

namespace detail {

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  return x;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace detail

// Sets one configuration key from its textual value. Keys are the long CLI
// flag names without the leading dashes.
inline void apply_setting(PipelineConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  if (key == "input") {
    c.input = v;
  } else if (key == "outcome") {
    c.outcome = v;
  } else if (key == "bool-aliases") {
    c.boolean_aliases = parse_bool(key, v);
  } else if (key == "out") {
    c.out = v;
  } else if (key == "scan-report") {
    c.scan_report = v;
  } else if (key == "seed") {
    c.seed = parse_unsigned(key, v);
  } else if (key == "workers") {
    c.workers = parse_unsigned(key, v);
  } else if (key == "restarts") {
    c.restarts = parse_unsigned(key, v);
  } else if (key == "max-passes") {
    c.max_passes = parse_unsigned(key, v);
  } else if (key == "feature-order") {
    if (v == "fixed") c.feature_order = FeatureOrder::fixed;
    else if (v == "shuffled") c.feature_order = FeatureOrder::shuffled;
    else throw ConfigError("feature-order: expected fixed or shuffled");
  } else if (key == "replicates") {
    c.replicates = parse_unsigned(key, v);
  } else if (key == "alpha") {
    c.alpha = parse_double(key, v);
  } else if (key == "reference") {
    if (v == "subset_mean") c.relevance.reference = ReferenceExpectation::subset_mean;
    else if (v == "unity") c.relevance.reference = ReferenceExpectation::unity;
    else throw ConfigError("reference: expected subset_mean or unity");
  } else if (key == "ranking") {
    if (v == "deviation_ratio") c.relevance.ranking = RankingMode::deviation_ratio;
    else if (v == "global_deviation") c.relevance.ranking = RankingMode::global_deviation;
    else throw ConfigError("ranking: expected deviation_ratio or global_deviation");
  } else if (key == "selection") {
    if (v == "all") c.relevance.selection.rule = Selection::Rule::all;
    else if (v == "top_k") c.relevance.selection.rule = Selection::Rule::top_k;
    else if (v == "threshold") c.relevance.selection.rule = Selection::Rule::threshold;
    else throw ConfigError("selection: expected all, top_k or threshold");
  } else if (key == "top-k") {
    c.relevance.selection.k = parse_unsigned(key, v);
  } else if (key == "delta0") {
    c.relevance.selection.threshold = parse_double(key, v);
  } else if (key == "stop-rule") {
    if (v == "p_value") c.stop_rule = StoppingRule::Kind::p_value_above;
    else if (v == "score") c.stop_rule = StoppingRule::Kind::score_at_most;
    else throw ConfigError("stop-rule: expected p_value or score");
  } else if (key == "stop-threshold") {
    c.stop_threshold = parse_double(key, v);
  } else if (key == "greedy-policy") {
    if (v == "score_decreasing") c.greedy_policy = RetentionPolicy::score_decreasing;
    else if (v == "unconditional") c.greedy_policy = RetentionPolicy::unconditional;
    else throw ConfigError("greedy-policy: expected score_decreasing or unconditional");
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

// Reads a JSON object of {key: value} settings; values may be strings,
// numbers or booleans.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw InputError("config file must hold a JSON object");
  std::vector<std::pair<std::string, std::string>> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    out.emplace_back(it.key(), it->is_string() ? it->get<std::string>() : it->dump());
  }
  return out;
}

namespace report {

inline ordered_json config_json(const PipelineConfig& c) {
  const char* ref = c.relevance.reference == ReferenceExpectation::unity ? "unity" : "subset_mean";
  const char* rank = c.relevance.ranking == RankingMode::global_deviation ? "global_deviation" : "deviation_ratio";
  const char* sel = c.relevance.selection.rule == Selection::Rule::all     ? "all"
                    : c.relevance.selection.rule == Selection::Rule::top_k ? "top_k"
                                                                          : "threshold";
  const auto stop = c.stopping();
  return {{"input", c.input},
          {"outcome", c.outcome},
          {"bool_aliases", c.boolean_aliases},
          {"seed", c.seed},
          {"restarts", c.restarts},
          {"max_passes", c.max_passes},
          {"feature_order", c.feature_order == FeatureOrder::fixed ? "fixed" : "shuffled"},
          {"replicates", c.replicates},
          {"alpha", c.alpha},
          {"reference", ref},
          {"ranking", rank},
          {"selection", sel},
          {"top_k", c.relevance.selection.k},
          {"delta0", c.relevance.selection.threshold},
          {"stop_rule", stop.kind == StoppingRule::Kind::p_value_above ? "p_value" : "score"},
          {"stop_threshold", stop.threshold},
          {"greedy_policy", c.greedy_policy == RetentionPolicy::unconditional ? "unconditional" : "score_decreasing"}};
}

}  // namespace report

// Wall-clock per stage plus host facts; the only nondeterministic part of a report.
class RunMetadata {
 public:
  explicit RunMetadata(const PipelineConfig& c) : workers_(c.workers), out_(c.out) {}

  template <typename Fn>
  auto time(const std::string& stage, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = fn();
    stages_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  nlohmann::ordered_json json() const {
    char host[256] = {0};
    if (gethostname(host, sizeof host - 1) != 0) host[0] = '\0';
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return {{"generated_at", stamp}, {"hostname", host}, {"workers", workers_}, {"out", out_}, {"stage_seconds", stages_}};
  }

 private:
  std::size_t workers_;
  std::string out_;
  nlohmann::ordered_json stages_ = nlohmann::ordered_json::object();
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline std::filesystem::path prepare_out(const std::string& out) {
  std::filesystem::path dir(out.empty() ? "." : out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

inline nlohmann::ordered_json header(const char* command, const PipelineConfig& c, const Dataset& data) {
  return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
          {"command", command},
          {"config", report::config_json(c)},
          {"dataset", report::dataset_json(data)}};
}

inline Dataset load_input(const PipelineConfig& c) {
  if (c.input.empty()) throw InputError("--input is required");
  return load_csv(c.input, c.outcome, CsvOptions{c.boolean_aliases});
}

// Rebuilds a ScanResult from a prior scan report; counts are recomputed from data.
inline ScanResult load_scan_report(const PipelineConfig& c, const Dataset& data) {
  if (c.scan_report.empty()) throw InputError("--scan-report is required");
  std::ifstream in(c.scan_report);
  if (!in) throw InputError("cannot open scan report '" + c.scan_report + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("scan report: " + std::string(e.what()));
  }
  if (!j.contains("scan") || !j["scan"].contains("descriptor")) throw InputError("scan report has no scan.descriptor");
  ScanResult r;
  r.descriptor = report::descriptor_from_json(j["scan"]["descriptor"], data.schema());
  auto ev = evaluate_subset(data, r.descriptor);
  r.panel = ev.panel;
  r.effects = ev.effects;
  r.restart_index = j["scan"].value("restart_index", std::size_t{0});
  return r;
}

}  // namespace detail

struct Discovery {
  ScanResult result;
  NullDistribution null;
  PValue p;
};

inline Discovery discover(const Dataset& data, const PipelineConfig& c, RunMetadata& meta) {
  Discovery d;
  d.result = meta.time("scan", [&] { return scan(data, c.scan_config()); });
  d.null = meta.time("bootstrap", [&] { return null_distribution(data, c.bootstrap_config()); });
  d.p = d.null.p_value(d.result.panel.score);
  if (d.result.effects) {
    d.result.effects->p_value = d.p.p;
    d.result.effects->p_at_floor = d.p.at_floor();
  }
  return d;
}

// scan: discovery only. Writes scan.json.
inline nlohmann::ordered_json cmd_scan(const PipelineConfig& c) {
  c.validate();
  RunMetadata meta(c);
  const auto data = meta.time("load", [&] { return detail::load_input(c); });
  const auto d = discover(data, c, meta);
  auto j = detail::header("scan", c, data);
  j["scan"] = report::scan_json(d.result, data.schema(), d.p, d.null);
  j["metadata"] = meta.json();
  detail::write_json(detail::prepare_out(c.out) / "scan.json", j);
  return j;
}

// rank: relevance table for a prior scan. Writes relevance.json and relevance.csv.
inline nlohmann::ordered_json cmd_rank(const PipelineConfig& c) {
  c.validate();
  RunMetadata meta(c);
  const auto data = meta.time("load", [&] { return detail::load_input(c); });
  const auto result = detail::load_scan_report(c, data);
  if (result.descriptor.empty()) throw InputError("scan report descriptor is empty; nothing to rank");
  const auto ranking = meta.time("rank", [&] { return rank_feature_relevance(data, result, c.relevance); });
  auto j = detail::header("rank", c, data);
  j["scan_descriptor"] = report::descriptor_json(result.descriptor, data.schema());
  j["relevance"] = report::relevance_json(ranking);
  j["metadata"] = meta.json();
  const auto dir = detail::prepare_out(c.out);
  detail::write_json(dir / "relevance.json", j);
  detail::write_text(dir / "relevance.csv", report::relevance_csv(ranking));
  return j;
}

// substitute: single-substitution sweep for a prior scan. Writes
// substitutions.json, substitutions.csv and substitution_plot.csv.
inline nlohmann::ordered_json cmd_substitute(const PipelineConfig& c) {
  c.validate();
  RunMetadata meta(c);
  const auto data = meta.time("load", [&] { return detail::load_input(c); });
  const auto result = detail::load_scan_report(c, data);
  std::vector<RelevanceEntry> ranking;
  if (!result.descriptor.empty()) ranking = rank_feature_relevance(data, result, c.relevance);
  const auto null = meta.time("bootstrap", [&] { return null_distribution(data, c.bootstrap_config()); });
  const auto sweep = meta.time(
      "sweep", [&] { return single_substitution_sweep(data, result, ranking, c.alpha, null, c.workers); });
  auto j = detail::header("substitute", c, data);
  j["scan_descriptor"] = report::descriptor_json(result.descriptor, data.schema());
  j["substitutions"] = report::outcomes_json(sweep, data.schema());
  j["metadata"] = meta.json();
  const auto dir = detail::prepare_out(c.out);
  detail::write_json(dir / "substitutions.json", j);
  detail::write_text(dir / "substitutions.csv", report::substitution_table_csv(sweep, data.schema()));
  detail::write_text(dir / "substitution_plot.csv", report::substitution_plot_csv(sweep, data.schema()));
  return j;
}

// pipeline: scan, rank, sweep and greedy cross-substitution. Writes
// report.json plus the three CSV tables.
inline nlohmann::ordered_json cmd_pipeline(const PipelineConfig& c) {
  c.validate();
  RunMetadata meta(c);
  const auto data = meta.time("load", [&] { return detail::load_input(c); });
  const auto d = discover(data, c, meta);
  const auto& schema = data.schema();

  std::vector<RelevanceEntry> ranking;
  std::vector<SubstitutionOutcome> sweep;
  std::optional<GreedyResult> greedy;
  if (!d.result.descriptor.empty()) {
    ranking = meta.time("rank", [&] { return rank_feature_relevance(data, d.result, c.relevance); });
    sweep = meta.time("sweep",
                      [&] { return single_substitution_sweep(data, d.result, ranking, c.alpha, d.null, c.workers); });
    greedy = meta.time("greedy", [&] {
      return cross_substitute_greedy(data, d.result, ranking, c.stopping(), c.alpha, d.null, c.greedy_policy);
    });
  }

  auto j = detail::header("pipeline", c, data);
  j["scan"] = report::scan_json(d.result, schema, d.p, d.null);
  j["relevance"] = report::relevance_json(ranking);
  j["substitutions"] = report::outcomes_json(sweep, schema);
  j["greedy"] = greedy ? report::greedy_json(*greedy, schema) : nlohmann::ordered_json(nullptr);
  j["metadata"] = meta.json();

  const auto dir = detail::prepare_out(c.out);
  detail::write_json(dir / "report.json", j);
  detail::write_text(dir / "relevance.csv", report::relevance_csv(ranking));
  detail::write_text(dir / "substitutions.csv", report::substitution_table_csv(sweep, schema));
  detail::write_text(dir / "substitution_plot.csv", report::substitution_plot_csv(sweep, schema));
  return j;
}

struct SynthConfig {
  SyntheticSpec spec;
  std::string outcome = "y";
  std::string out = ".";
};

// "2,3,4" -> {2, 3, 4}
inline std::vector<std::size_t> parse_cardinalities(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(detail::parse_unsigned("cardinalities", item));
  if (out.empty()) throw ConfigError("cardinalities: at least one feature required");
  return out;
}

// "f0=c0;f1=c1|c2" against the synthetic schema (features f<i>, categories c<j>).
inline SubsetDescriptor parse_planted(const std::string& text, const Schema& schema) {
  SubsetDescriptor d;
  std::stringstream ss(text);
  std::string clause;
  while (std::getline(ss, clause, ';')) {
    if (clause.empty()) continue;
    const auto eq = clause.find('=');
    if (eq == std::string::npos) throw ConfigError("planted: expected feature=value[|value...], got '" + clause + "'");
    const auto name = clause.substr(0, eq);
    const auto f = schema.find_feature(name);
    if (!f) throw ConfigError("planted: unknown feature '" + name + "'");
    SubsetDescriptor::ValueSet set;
    std::stringstream vs(clause.substr(eq + 1));
    std::string label;
    while (std::getline(vs, label, '|')) {
      const auto v = schema.find_category(*f, label);
      if (!v) throw ConfigError("planted: unknown value '" + label + "' for '" + name + "'");
      set.push_back(*v);
    }
    if (set.empty()) throw ConfigError("planted: no values for '" + name + "'");
    d.constrain(*f, std::move(set));
  }
  return d;
}

// synth: writes cohort.csv and planted.json.
inline nlohmann::ordered_json cmd_synth(const SynthConfig& c) {
  const auto cohort = generate_synthetic(c.spec);
  const auto& schema = cohort.data.schema();
  const auto counts = count_subset(cohort.data, cohort.planted);
  nlohmann::ordered_json j = {
      {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
      {"command", "synth"},
      {"spec",
       {{"n_records", c.spec.n_records},
        {"cardinalities", c.spec.cardinalities},
        {"base_rate", c.spec.base_rate},
        {"odds_multiplier", c.spec.odds_multiplier},
        {"seed", c.spec.seed},
        {"outcome", c.outcome}}},
      {"planted", report::descriptor_json(cohort.planted, schema)},
      {"planted_members", cohort.planted_members.size()},
      {"planted_positive", counts.n_positive},
      {"n_positive", cohort.data.n_positive()},
      {"global_mean", cohort.data.global_mean()}};
  const auto dir = detail::prepare_out(c.out);
  save_csv(cohort.data, (dir / "cohort.csv").string(), c.outcome);
  detail::write_json(dir / "planted.json", j);
  return j;
}

}  // namespace subscan
