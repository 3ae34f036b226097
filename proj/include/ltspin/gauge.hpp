#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ltspin/torus.hpp"
#include "ltspin/triangulation.hpp"

namespace ltspin {

/// Q(m) = sum_{t=2}^m 1/(t ln t); the slowly divergent normalizer of the
/// interpolating twist profile. Natural logarithm; strictly increasing in m.
inline double q_sum(std::uint64_t m) {
  if (m < 2) throw std::invalid_argument("q_sum: m >= 2");
  double q = 0;
  for (std::uint64_t t = 2; t <= m; ++t)
    q += 1.0 / (static_cast<double>(t) * std::log(static_cast<double>(t)));
  return q;
}

/// Per-layer twist multipliers: full twist out to layer r+1, zero from layer
/// n on, and in between the normalized window sum
/// c_j = (1/Q(n-r)) * sum_{t=j+1-r}^{n-j} 1/(t ln t), empty sums being zero.
struct GaugeProfile {
  std::uint32_t r = 0;
  std::uint32_t n = 0;
  GroupElement theta;
  std::vector<double> c;  // c[j] for j = 0..n; layers beyond n take 0

  double multiplier(std::uint64_t layer) const {
    return layer < c.size() ? c[layer] : 0.0;
  }
};

inline GaugeProfile gauge_profile(std::uint32_t r, std::uint32_t n,
                                  GroupElement theta) {
  if (!(n > r + 1 && r >= 1))
    throw std::invalid_argument("gauge_profile: need n > r + 1 >= 2");
  GaugeProfile profile;
  profile.r = r;
  profile.n = n;
  profile.theta = std::move(theta);
  profile.c.assign(static_cast<std::size_t>(n) + 1, 0.0);
  const double q = q_sum(n - r);
  // cum[m] = sum_{t=2}^{m} 1/(t ln t); the window for c_j runs over
  // t in [j+1-r, n-j], so it is cum[n-j] - cum[j-r]. Prefix sums keep the
  // whole profile linear in n.
  std::vector<double> cum(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::uint64_t t = 2; t <= n; ++t)
    cum[t] = cum[t - 1] +
             1.0 / (static_cast<double>(t) * std::log(static_cast<double>(t)));
  for (std::uint32_t j = 0; j <= n; ++j) {
    if (j <= r + 1) {
      profile.c[j] = 1.0;
    } else if (j < n) {
      // j >= r + 2 makes the window start j + 1 - r >= 3, so cum indices
      // stay in range and no 1/ln(1) term can appear.
      const std::uint32_t lo = j - r;  // window starts at lo + 1
      const std::uint32_t hi = n - j;
      if (hi > lo) profile.c[j] = (cum[hi] - cum[lo]) / q;
    }
  }
  return profile;
}

/// Twist energy cost from the layer sizes alone: with the profile constant on
/// each circle, only vertical edges contribute, E_{t,t+1} = k_t + k_{t+1} of
/// them between circles t and t+1, so
/// phi = |theta|^2 sum_t (k_t + k_{t+1}) (c_t - c_{t+1})^2.
inline double phi_from_layers(std::span<const std::uint64_t> layer_sizes,
                              const GaugeProfile& profile) {
  if (layer_sizes.size() < static_cast<std::size_t>(profile.n) + 1)
    throw std::invalid_argument("phi_from_layers: profile extends beyond layers");
  const double theta_sq = profile.theta.norm_squared();
  double total = 0;
  for (std::size_t t = 0; t + 1 < layer_sizes.size(); ++t) {
    const double dc = profile.multiplier(t) - profile.multiplier(t + 1);
    if (dc == 0) continue;
    total += static_cast<double>(layer_sizes[t] + layer_sizes[t + 1]) * dc * dc;
  }
  return theta_sq * total;
}

/// Twist energy cost summed edge by edge over the triangulation: every edge
/// (v, v') contributes |theta|^2 (c_{layer(v)} - c_{layer(v')})^2 with its
/// multiplicity. Horizontal edges and self-loops contribute exactly zero.
/// Agrees with phi_from_layers to rounding on valid triangulations.
inline double phi(const Triangulation& T, const GaugeProfile& profile) {
  if (profile.n > T.height())
    throw std::invalid_argument("phi: profile extends beyond triangulation");
  const double theta_sq = profile.theta.norm_squared();
  double total = 0;
  for (std::uint32_t t = 0; t < T.height(); ++t) {
    const double dc = profile.multiplier(t) - profile.multiplier(t + 1);
    const double dc_sq = dc * dc;
    if (dc_sq == 0) continue;
    for (const EdgeRec& e : T.strip(t)) total += e.mult * dc_sq;
  }
  return theta_sq * total;
}

/// The printed decay bound:
/// |theta|^2 / ln ln(n-r) * sum_{t=2}^{n-r} E_{t,t+1} / (t^2 ln^2 t),
/// with E read from the layer sizes. The true cost phi is expected to decay
/// at this rate up to an absolute constant; callers report the ratio rather
/// than asserting it.
inline double phi_upper_bound(std::span<const std::uint64_t> layer_sizes,
                              std::uint32_t r, std::uint32_t n, double theta_sq) {
  if (n < r + 3) throw std::invalid_argument("phi_upper_bound: need n - r >= 3");
  if (layer_sizes.size() < static_cast<std::size_t>(n - r) + 2)
    throw std::invalid_argument("phi_upper_bound: layer sizes too short");
  double series = 0;
  for (std::uint64_t t = 2; t <= n - r; ++t) {
    const double lt = std::log(static_cast<double>(t));
    series += static_cast<double>(layer_sizes[t] + layer_sizes[t + 1]) /
              (static_cast<double>(t) * static_cast<double>(t) * lt * lt);
  }
  return theta_sq / std::log(std::log(static_cast<double>(n - r))) * series;
}

inline double phi_upper_bound(const Triangulation& T, std::uint32_t r,
                              std::uint32_t n, const GroupElement& theta) {
  return phi_upper_bound(T.layer_sizes(), r, n, theta.norm_squared());
}

}  // namespace ltspin
