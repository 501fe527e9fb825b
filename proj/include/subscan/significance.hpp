#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "subscan/dataset.hpp"
#include "subscan/error.hpp"
#include "subscan/parallel.hpp"
#include "subscan/rng.hpp"
#include "subscan/scan.hpp"

namespace subscan {

struct BootstrapConfig {
  std::size_t n_replicates = 50;
  std::uint64_t seed = 0;
  ScanConfig scan;
  std::size_t workers = 1;

  void validate() const {
    if (n_replicates < 1) throw ConfigError("n_replicates must be at least 1");
    scan.validate();
  }
};

inline constexpr std::size_t kMaxRedraws = 100;

struct PValue {
  double p = 1.0;
  std::size_t exceedances = 0;
  std::size_t replicates = 0;
  // No replicate reached the observed score: p is 1 / (R + 1), its smallest value.
  bool at_floor() const noexcept { return exceedances == 0; }
};

// Maximum scan scores over datasets whose outcomes were redrawn under the null.
struct NullDistribution {
  std::vector<double> scores;

  PValue p_value(double observed) const {
    PValue out;
    out.replicates = scores.size();
    out.exceedances = static_cast<std::size_t>(
        std::count_if(scores.begin(), scores.end(), [&](double s) { return s >= observed; }));
    out.p = static_cast<double>(1 + out.exceedances) / static_cast<double>(1 + out.replicates);
    return out;
  }
};

// Outcomes drawn i.i.d. Bernoulli(rate); redrawn while all equal.
inline std::vector<std::uint8_t> draw_null_outcomes(std::size_t n, double rate, Rng& rng) {
  std::vector<std::uint8_t> y(n);
  for (std::size_t attempt = 0; attempt < kMaxRedraws; ++attempt) {
    std::size_t positives = 0;
    for (auto& v : y) {
      v = rng.bernoulli(rate) ? 1 : 0;
      positives += v;
    }
    if (positives != 0 && positives != n) return y;
  }
  throw DegenerateDataError("null replicate drew all-equal outcomes " + std::to_string(kMaxRedraws) + " times");
}

// Parametric bootstrap: keep features, redraw every outcome as Bernoulli(mu_g),
// rescan, record the replicate's maximum score. Replicate r uses its own
// stream (seed, r) for outcomes and scan restarts.
inline NullDistribution null_distribution(const Dataset& data, const BootstrapConfig& config) {
  config.validate();
  require_nondegenerate(data);
  NullDistribution null;
  null.scores.resize(config.n_replicates);
  parallel_for(config.n_replicates, config.workers, [&](std::size_t r) {
    Rng rng(config.seed, r);
    const Dataset replicate = data.with_outcomes(draw_null_outcomes(data.n_records(), data.global_mean(), rng));
    ScanConfig sc = config.scan;
    sc.seed = derive_seed(config.seed, r + 0x5ca11ab1eULL);
    sc.workers = 1;
    sc.step_observer = nullptr;
    null.scores[r] = scan(replicate, sc).panel.score;
  });
  return null;
}

struct EmpiricalPValue {
  PValue p;
  NullDistribution null;
};

inline EmpiricalPValue empirical_p_value(const Dataset& data, double observed_score, const BootstrapConfig& config) {
  if (observed_score < 0.0) throw ContractError("observed score must be nonnegative");
  EmpiricalPValue out;
  out.null = null_distribution(data, config);
  out.p = out.null.p_value(observed_score);
  return out;
}

}  // namespace subscan
