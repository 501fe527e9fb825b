#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>

#include "subscan/error.hpp"

namespace subscan {

// Expectation-based Bernoulli log-likelihood ratio for a subset of N_S records
// with C positives against a constant baseline rate mu:
//
//   score(S) = max_{q >= 1}  C log q - N_S log(1 - mu + q mu)
//
// The maximizer is q* = C (1 - mu) / (mu (N_S - C)), clamped at 1. When every
// record is positive q* diverges and the score tends to -N_S log mu.
struct ScorePanel {
  double score = 0.0;
  double q_mle = 1.0;  // +inf when n_positive == n_subset
  std::size_t n_subset = 0;
  std::size_t n_positive = 0;
  double global_mean = 0.0;
  double subset_mean = 0.0;

  bool q_unbounded() const noexcept { return std::isinf(q_mle); }
};

namespace detail {

inline void check_score_inputs(std::size_t c, std::size_t n, double mu) {
  if (!(mu > 0.0 && mu < 1.0)) throw ContractError("global mean must lie in (0, 1), got " + std::to_string(mu));
  if (n == 0) throw ContractError("subset must contain at least one record");
  if (c > n) throw ContractError("positive count exceeds subset size");
}

// Objective at a given q. Shared by the closed form and by tests that check it.
inline double score_at(double q, std::size_t c, std::size_t n, double mu) {
  return std::log(q) * static_cast<double>(c) - static_cast<double>(n) * std::log(1.0 - mu + q * mu);
}

}  // namespace detail

inline double optimal_q(std::size_t n_positive, std::size_t n_subset, double global_mean) {
  detail::check_score_inputs(n_positive, n_subset, global_mean);
  if (n_positive == n_subset) return std::numeric_limits<double>::infinity();
  const double c = static_cast<double>(n_positive);
  // Rate at or below the baseline: no lift. Also keeps the full dataset at exactly q = 1.
  if (c / static_cast<double>(n_subset) <= global_mean) return 1.0;
  const double q = c * (1.0 - global_mean) / (global_mean * (static_cast<double>(n_subset) - c));
  return q > 1.0 ? q : 1.0;
}

// Score only; 0 for an empty subset. Used in the scan inner loop.
inline double score_counts(std::size_t n_positive, std::size_t n_subset, double global_mean) {
  if (n_subset == 0) return 0.0;
  const double q = optimal_q(n_positive, n_subset, global_mean);
  if (std::isinf(q)) return -static_cast<double>(n_subset) * std::log(global_mean);
  if (q == 1.0) return 0.0;
  const double s = detail::score_at(q, n_positive, n_subset, global_mean);
  return s > 0.0 ? s : 0.0;
}

inline ScorePanel bernoulli_score(std::size_t n_positive, std::size_t n_subset, double global_mean) {
  ScorePanel p;
  p.q_mle = optimal_q(n_positive, n_subset, global_mean);
  p.score = score_counts(n_positive, n_subset, global_mean);
  p.n_subset = n_subset;
  p.n_positive = n_positive;
  p.global_mean = global_mean;
  p.subset_mean = static_cast<double>(n_positive) / static_cast<double>(n_subset);
  return p;
}

// Odds ratio of a subset against its complement with a 95% Woolf interval.
struct EffectMeasures {
  double odds_ratio = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  double subset_rate = 0.0;
  double complement_rate = 0.0;
  bool continuity_corrected = false;
  std::optional<double> p_value;
  bool p_at_floor = false;
};

inline constexpr double kZ95 = 1.96;

// a, b: positives and negatives inside the subset; c, d: in the complement.
// Any zero cell triggers the Haldane-Anscombe +0.5 correction on all four.
inline EffectMeasures odds_ratio(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  if (a + b == 0) throw ContractError("odds ratio: subset is empty");
  if (c + d == 0) throw ContractError("odds ratio: complement is empty");
  EffectMeasures e;
  e.subset_rate = static_cast<double>(a) / static_cast<double>(a + b);
  e.complement_rate = static_cast<double>(c) / static_cast<double>(c + d);
  double fa = static_cast<double>(a), fb = static_cast<double>(b);
  double fc = static_cast<double>(c), fd = static_cast<double>(d);
  if (a == 0 || b == 0 || c == 0 || d == 0) {
    fa += 0.5;
    fb += 0.5;
    fc += 0.5;
    fd += 0.5;
    e.continuity_corrected = true;
  }
  e.odds_ratio = (fa / fb) / (fc / fd);
  const double se = std::sqrt(1.0 / fa + 1.0 / fb + 1.0 / fc + 1.0 / fd);
  const double log_or = std::log(e.odds_ratio);
  e.ci_low = std::exp(log_or - kZ95 * se);
  e.ci_high = std::exp(log_or + kZ95 * se);
  return e;
}

}  // namespace subscan
