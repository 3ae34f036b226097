#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ltspin/offspring.hpp"
#include "ltspin/rng.hpp"
#include "ltspin/stats.hpp"

namespace ltspin {

/// Normalizing scale a_t = t (ln t)^{1/2 + eps}, defined for t >= 2.
inline double growth_scale(std::uint64_t t, double epsilon) {
  if (t < 2) throw std::invalid_argument("growth_scale: t >= 2");
  const double td = static_cast<double>(t);
  return td * std::pow(std::log(td), 0.5 + epsilon);
}

/// Growth diagnostics of one layer-size sequence: the normalized sizes
/// r_t = k_t / a_t (their maximum is the empirical growth constant) and the
/// partial sums s_T = sum_{t=2}^T k_t / (t^2 ln^2 t), whose convergence the
/// summability arguments rely on. Entries are indexed from t = 2.
struct GrowthReport {
  double epsilon = 0;
  std::vector<double> normalized;    // r_t for t = 2..N
  std::vector<double> partial_sums;  // s_T for T = 2..N
  double max_normalized = 0;
  std::uint64_t argmax_t = 0;

  double normalized_at(std::uint64_t t) const { return normalized.at(t - 2); }
  double partial_sum_at(std::uint64_t t) const { return partial_sums.at(t - 2); }
};

inline GrowthReport growth_report(std::span<const std::uint64_t> layer_sizes,
                                  double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("growth_report: epsilon > 0");
  if (layer_sizes.size() < 11)
    throw std::invalid_argument("growth_report: need layers up to height >= 10");
  GrowthReport report;
  report.epsilon = epsilon;
  const std::uint64_t n = layer_sizes.size() - 1;
  report.normalized.reserve(n - 1);
  report.partial_sums.reserve(n - 1);
  double s = 0;
  for (std::uint64_t t = 2; t <= n; ++t) {
    const double td = static_cast<double>(t);
    const double lt = std::log(td);
    const double k = static_cast<double>(layer_sizes[t]);
    const double r = k / growth_scale(t, epsilon);
    s += k / (td * td * lt * lt);
    report.normalized.push_back(r);
    report.partial_sums.push_back(s);
    if (r > report.max_normalized) {
      report.max_normalized = r;
      report.argmax_t = t;
    }
  }
  return report;
}

/// Statistics of the centered rescaled increment sums
/// B_n = sum_{t=2}^n (k_t - k_{t-1} - sigma^2) / a_t over independent
/// replicas, against the exact second-moment series
/// sum_{t=2}^n (Var(nu~) + (t-1) sigma^4) / a_t^2: the increments are
/// conditionally centered, so the empirical mean sits near zero and the
/// empirical second moment matches the series up to sampling error.
struct MartingaleStats {
  std::uint64_t n = 0;
  std::uint64_t replicas = 0;
  double epsilon = 0;
  double mean = 0;            // empirical mean of B_n
  double se_mean = 0;         // standard error of that mean
  double second_moment = 0;   // empirical mean of B_n^2
  double se_second_moment = 0;
  double series = 0;          // exact E B_n^2 evaluated termwise
};

inline MartingaleStats martingale_check(const OffspringLaw& law, double epsilon,
                                        std::uint64_t n, std::uint64_t replicas,
                                        std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("martingale_check: n >= 2");
  if (replicas < 2) throw std::invalid_argument("martingale_check: replicas >= 2");
  const SizeBiasedLaw biased = size_bias(law);
  const double sigma_sq = law.variance();
  const double var_biased = biased.variance();

  MartingaleStats stats;
  stats.n = n;
  stats.replicas = replicas;
  stats.epsilon = epsilon;
  for (std::uint64_t t = 2; t <= n; ++t) {
    const double a = growth_scale(t, epsilon);
    stats.series += (var_biased + static_cast<double>(t - 1) * sigma_sq * sigma_sq) /
                    (a * a);
  }

  std::vector<double> b(replicas), b_sq(replicas);
  for (std::uint64_t rep = 0; rep < replicas; ++rep) {
    const std::vector<std::uint64_t> k =
        sample_layer_process(law, n, derive_seed(seed, rep));
    double sum = 0;
    for (std::uint64_t t = 2; t <= n; ++t) {
      const double increment =
          static_cast<double>(k[t]) - static_cast<double>(k[t - 1]) - sigma_sq;
      sum += increment / growth_scale(t, epsilon);
    }
    b[rep] = sum;
    b_sq[rep] = sum * sum;
  }
  stats.mean = mean(b);
  stats.se_mean = standard_error(b);
  stats.second_moment = mean(b_sq);
  stats.se_second_moment = standard_error(b_sq);
  return stats;
}

}  // namespace ltspin
