#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ltspin/rng.hpp"

namespace ltspin {

namespace detail {

/// Shared probability-table machinery for offspring laws and their
/// size-biased companions: cumulative table, inverse-CDF sampling, and an
/// exact sampler for sums of many iid draws.
class ProbTable {
 public:
  ProbTable() = default;

  explicit ProbTable(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("ProbTable: empty support");
    double total = 0;
    for (double p : probs_) {
      if (!(p >= 0)) throw std::invalid_argument("ProbTable: negative probability");
      total += p;
    }
    if (total <= 0) throw std::invalid_argument("ProbTable: zero total mass");
    for (double& p : probs_) p /= total;
    cdf_.resize(probs_.size());
    double acc = 0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
      acc += probs_[k];
      cdf_[k] = acc;
    }
    cdf_.back() = 1.0;
  }

  const std::vector<double>& probs() const { return probs_; }
  std::size_t max_value() const { return probs_.size() - 1; }

  double prob(std::size_t k) const { return k < probs_.size() ? probs_[k] : 0.0; }

  double moment(int order) const {
    double s = 0;
    for (std::size_t k = 0; k < probs_.size(); ++k)
      s += std::pow(static_cast<double>(k), order) * probs_[k];
    return s;
  }

  /// Inverse-CDF draw: the first k whose cumulative mass exceeds u.
  std::uint64_t sample(Xoshiro256pp& rng) const {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint64_t>(it == cdf_.end() ? cdf_.size() - 1
                                                       : static_cast<std::size_t>(it - cdf_.begin()));
  }

  /// Sum of `count` independent draws. Small counts loop directly; large
  /// counts use the multinomial decomposition via conditional binomials,
  /// which has the exact same law at O(support) cost per call.
  std::uint64_t sample_sum(Xoshiro256pp& rng, std::uint64_t count) const {
    if (count == 0) return 0;
    constexpr std::uint64_t kDirectThreshold = 32;
    if (count <= kDirectThreshold) {
      std::uint64_t s = 0;
      for (std::uint64_t i = 0; i < count; ++i) s += sample(rng);
      return s;
    }
    std::uint64_t remaining = count;
    double remaining_mass = 1.0;
    std::uint64_t s = 0;
    for (std::size_t k = 0; k + 1 < probs_.size() && remaining > 0; ++k) {
      double p = probs_[k] / remaining_mass;
      p = std::clamp(p, 0.0, 1.0);
      std::binomial_distribution<std::uint64_t> bin(remaining, p);
      const std::uint64_t n_k = bin(rng);
      s += static_cast<std::uint64_t>(k) * n_k;
      remaining -= n_k;
      remaining_mass -= probs_[k];
      if (remaining_mass <= 0) remaining_mass = std::numeric_limits<double>::min();
    }
    s += (probs_.size() - 1) * remaining;
    return s;
  }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

}  // namespace detail

/// Critical-by-default offspring distribution nu on {0, 1, 2, ...}.
/// Infinite-support laws (geometric, Poisson) are stored as tables truncated
/// where the tail mass drops below 1e-15 and renormalized, which keeps every
/// reported moment within 1e-12 of the closed form.
class OffspringLaw {
 public:
  /// p_k = 2^{-(k+1)}: critical with sigma^2 = 2.
  static OffspringLaw geometric() {
    std::vector<double> probs;
    double p = 0.5;
    // Tail mass after k terms equals the last term, so stop below 1e-15.
    while (p >= 1e-15) {
      probs.push_back(p);
      p *= 0.5;
    }
    return OffspringLaw("geometric", std::move(probs));
  }

  /// p_k = e^{-1} / k!: critical with sigma^2 = 1.
  static OffspringLaw poisson_one() {
    std::vector<double> probs;
    double p = std::exp(-1.0);
    std::size_t k = 0;
    // Tail after term k is below 2 * p_{k+1} once k >= 1.
    while (probs.size() < 2 || 2.0 * p >= 1e-15) {
      probs.push_back(p);
      ++k;
      p /= static_cast<double>(k);
    }
    return OffspringLaw("poisson_one", std::move(probs));
  }

  /// p_1 = 1: the degenerate critical law (sigma^2 = 0).
  static OffspringLaw deterministic_one() {
    return OffspringLaw("deterministic_one", {0.0, 1.0});
  }

  /// Arbitrary finite-support law; weights are normalized to total mass 1.
  /// Criticality is not enforced here (samplers that need it check).
  static OffspringLaw from_probs(std::vector<double> probs,
                                 std::string name = "custom") {
    return OffspringLaw(std::move(name), std::move(probs));
  }

  /// Resolves the CLI-facing law names.
  static OffspringLaw by_name(const std::string& name) {
    if (name == "geometric") return geometric();
    if (name == "poisson_one" || name == "poisson") return poisson_one();
    if (name == "deterministic_one" || name == "deterministic")
      return deterministic_one();
    throw std::invalid_argument("unknown offspring law: " + name);
  }

  const std::string& name() const { return name_; }
  const std::vector<double>& probs() const { return table_.probs(); }
  double prob(std::size_t k) const { return table_.prob(k); }
  std::size_t max_value() const { return table_.max_value(); }

  double mean() const { return table_.moment(1); }
  double variance() const {
    const double m = mean();
    return table_.moment(2) - m * m;
  }
  double third_moment() const { return table_.moment(3); }
  bool is_critical(double tol = 1e-9) const { return std::fabs(mean() - 1.0) <= tol; }

  std::uint64_t sample(Xoshiro256pp& rng) const { return table_.sample(rng); }
  std::uint64_t sample_sum(Xoshiro256pp& rng, std::uint64_t count) const {
    return table_.sample_sum(rng, count);
  }

 private:
  OffspringLaw(std::string name, std::vector<double> probs)
      : name_(std::move(name)), table_(std::move(probs)) {}

  std::string name_;
  detail::ProbTable table_;
};

/// The size-biased companion law with weights k * p_k (mean sigma^2 + 1).
class SizeBiasedLaw {
 public:
  explicit SizeBiasedLaw(std::vector<double> probs) : table_(std::move(probs)) {}

  const std::vector<double>& probs() const { return table_.probs(); }
  double prob(std::size_t k) const { return table_.prob(k); }
  std::size_t max_value() const { return table_.max_value(); }

  double mean() const { return table_.moment(1); }
  double variance() const {
    const double m = mean();
    return table_.moment(2) - m * m;
  }

  std::uint64_t sample(Xoshiro256pp& rng) const { return table_.sample(rng); }

 private:
  detail::ProbTable table_;
};

/// Size-bias a critical law: weights k * p_k. Rejects non-critical input,
/// since the construction only yields a probability law at mean 1.
inline SizeBiasedLaw size_bias(const OffspringLaw& law, double tol = 1e-9) {
  if (!law.is_critical(tol))
    throw std::invalid_argument("size_bias: offspring law is not critical");
  const auto& p = law.probs();
  std::vector<double> biased(p.size(), 0.0);
  for (std::size_t k = 1; k < p.size(); ++k)
    biased[k] = static_cast<double>(k) * p[k];
  return SizeBiasedLaw(std::move(biased));
}

/// One step of the layer-size chain: given k_{t-1} = current individuals of
/// which one is distinguished, the distinguished one reproduces by the
/// size-biased law and the other current-1 by the plain law.
inline std::uint64_t sample_layer_step(const OffspringLaw& law,
                                       const SizeBiasedLaw& biased,
                                       std::uint64_t current,
                                       Xoshiro256pp& rng) {
  if (current < 1)
    throw std::invalid_argument("sample_layer_step: current must be >= 1");
  return biased.sample(rng) + law.sample_sum(rng, current - 1);
}

inline std::uint64_t sample_layer_step(const OffspringLaw& law,
                                       std::uint64_t current,
                                       std::uint64_t seed) {
  Xoshiro256pp rng(seed);
  return sample_layer_step(law, size_bias(law), current, rng);
}

/// The full layer-size process k_0 = 1, k_1, ..., k_height, equal in law to
/// the per-layer vertex counts of a spine-conditioned tree of this height.
/// Each step draws from its own derived stream so the sequence is a pure
/// function of (law, height, seed).
inline std::vector<std::uint64_t> sample_layer_process(const OffspringLaw& law,
                                                       std::uint64_t height,
                                                       std::uint64_t seed) {
  const SizeBiasedLaw biased = size_bias(law);
  std::vector<std::uint64_t> k(height + 1);
  k[0] = 1;
  for (std::uint64_t t = 1; t <= height; ++t) {
    Xoshiro256pp rng(derive_seed(seed, t));
    k[t] = sample_layer_step(law, biased, k[t - 1], rng);
  }
  return k;
}

}  // namespace ltspin
