#pragma once

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "subscan/error.hpp"
#include "subscan/pipeline.hpp"

namespace subscan::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kDegenerate = 3 };

namespace detail {

struct Flag {
  const char* key;
  const char* help;
};

// Long flags shared by scan / rank / substitute / pipeline; keys double as config-file keys.
inline const std::vector<Flag>& pipeline_flags() {
  static const std::vector<Flag> flags = {
      {"input", "CSV cohort file"},
      {"outcome", "name of the binary outcome column (default y)"},
      {"bool-aliases", "accept true/false as outcome values"},
      {"out", "output directory (default .)"},
      {"scan-report", "scan.json from a prior scan (rank, substitute)"},
      {"seed", "master random seed"},
      {"workers", "worker threads"},
      {"restarts", "random restarts per scan"},
      {"max-passes", "coordinate sweeps per restart"},
      {"feature-order", "fixed | shuffled"},
      {"replicates", "parametric bootstrap replicates"},
      {"alpha", "significance level"},
      {"reference", "subset_mean | unity"},
      {"ranking", "deviation_ratio | global_deviation"},
      {"selection", "all | top_k | threshold"},
      {"top-k", "entries kept by top_k selection"},
      {"delta0", "threshold for threshold selection"},
      {"stop-rule", "p_value | score"},
      {"stop-threshold", "threshold for the stopping rule (default alpha for p_value)"},
      {"greedy-policy", "score_decreasing | unconditional"},
  };
  return flags;
}

struct PipelineCommand {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::optional<std::string>> values;
};

inline void add_pipeline_command(CLI::App& root, PipelineCommand& cmd, const char* name, const char* description) {
  cmd.app = root.add_subcommand(name, description);
  cmd.app->add_option("--config", cmd.config_path, "JSON file of settings; flags override it");
  for (const auto& f : pipeline_flags()) {
    cmd.app->add_option(std::string("--") + f.key, cmd.values[f.key], f.help);
  }
}

inline PipelineConfig resolve(const PipelineCommand& cmd) {
  PipelineConfig c;
  if (!cmd.config_path.empty()) {
    for (const auto& [k, v] : read_config_file(cmd.config_path)) apply_setting(c, k, v);
  }
  for (const auto& [k, v] : cmd.values) {
    if (v) apply_setting(c, k, *v);
  }
  return c;
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"Anomalous subgroup scan with post-discovery relevance ranking and cross-substitution", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  detail::PipelineCommand scan_cmd, rank_cmd, substitute_cmd, pipeline_cmd;
  detail::add_pipeline_command(app, scan_cmd, "scan", "find the highest-scoring subset and its empirical p-value");
  detail::add_pipeline_command(app, rank_cmd, "rank", "rank the anomalous feature values of a prior scan");
  detail::add_pipeline_command(app, substitute_cmd, "substitute", "score every single substitution of a prior scan");
  detail::add_pipeline_command(app, pipeline_cmd, "pipeline", "scan, rank, substitute and greedy cross-substitution");

  auto* synth = app.add_subcommand("synth", "generate a cohort with a planted anomalous subgroup");
  std::size_t records = 2000;
  std::string cardinalities = "2,3,4,5,2";
  double base_rate = 0.05;
  double odds_multiplier = 3.0;
  std::string planted = "f0=c0;f1=c1|c2";
  std::uint64_t synth_seed = 0;
  std::string synth_outcome = "y";
  std::string synth_out = ".";
  synth->add_option("--records", records, "number of records");
  synth->add_option("--cardinalities", cardinalities, "comma-separated category counts per feature");
  synth->add_option("--base-rate", base_rate, "outcome rate outside the planted subgroup");
  synth->add_option("--odds-multiplier", odds_multiplier, "odds multiplier inside the planted subgroup (> 1)");
  synth->add_option("--planted", planted, "planted descriptor, e.g. f0=c0;f1=c1|c2");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--outcome", synth_outcome, "outcome column name");
  synth->add_option("--out", synth_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*synth) {
      SynthConfig sc;
      sc.spec.n_records = records;
      sc.spec.cardinalities = parse_cardinalities(cardinalities);
      sc.spec.base_rate = base_rate;
      sc.spec.odds_multiplier = odds_multiplier;
      sc.spec.seed = synth_seed;
      sc.spec.validate();
      sc.spec.planted = parse_planted(planted, sc.spec.schema());
      sc.outcome = synth_outcome;
      sc.out = synth_out;
      cmd_synth(sc);
    } else if (*scan_cmd.app) {
      cmd_scan(detail::resolve(scan_cmd));
    } else if (*rank_cmd.app) {
      cmd_rank(detail::resolve(rank_cmd));
    } else if (*substitute_cmd.app) {
      cmd_substitute(detail::resolve(substitute_cmd));
    } else if (*pipeline_cmd.app) {
      cmd_pipeline(detail::resolve(pipeline_cmd));
    }
  } catch (const DegenerateDataError& e) {
    std::cerr << kToolName << ": degenerate data: " << e.what() << '\n';
    return kDegenerate;
  } catch (const InputError& e) {
    std::cerr << kToolName << ": input error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << kToolName << ": configuration error: " << e.what() << '\n';
    return kUsage;
  } catch (const ContractError& e) {
    std::cerr << kToolName << ": invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << kToolName << ": " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

// Convenience for tests: args excludes the program name.
inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{kToolName};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace subscan::cli
