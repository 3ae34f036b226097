#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ltspin {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Unbiased sample variance (n-1 denominator).
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_variance: need n >= 2");
  const double m = mean(xs);
  double s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double standard_error(std::span<const double> xs) {
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty sample");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid) - 1, xs.end());
  return 0.5 * (xs[mid - 1] + hi);
}

inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  if (q < 0 || q > 1) throw std::invalid_argument("quantile: q outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1 - frac) + xs[hi] * frac;
}

/// Regularized lower incomplete gamma P(a, x). Series for x < a+1,
/// continued fraction otherwise.
inline double regularized_gamma_p(double a, double x) {
  if (a <= 0 || x < 0 || !std::isfinite(a) || !std::isfinite(x))
    throw std::invalid_argument("regularized_gamma_p: need a > 0, x >= 0");
  if (x == 0) return 0;
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(log_prefactor);
  }
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(log_prefactor) * h;
}

inline double chi_square_cdf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_square_cdf: dof >= 1");
  if (x <= 0) return 0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

struct ChiSquareResult {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
  int bins_used = 0;
};

/// Pearson goodness-of-fit against the given cell probabilities. Cells are
/// taken in order; trailing cells whose expected count falls below
/// `min_expected` are pooled into the last kept cell (any residual
/// probability mass is pooled there as well). dof = bins - 1.
inline ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                                      std::span<const double> probs,
                                      double min_expected = 5.0) {
  if (observed.size() != probs.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  std::int64_t total = 0;
  for (auto o : observed) total += o;
  if (total <= 0) throw std::invalid_argument("chi_square_gof: empty sample");

  // Find the pooling point: keep the leading cells with enough mass.
  std::size_t keep = observed.size();
  while (keep > 1) {
    const double expect = probs[keep - 1] * static_cast<double>(total);
    if (expect >= min_expected) break;
    --keep;
  }
  std::vector<double> expected(keep, 0.0);
  std::vector<double> obs(keep, 0.0);
  double mass = 0;
  for (std::size_t i = 0; i + 1 < keep; ++i) {
    expected[i] = probs[i] * static_cast<double>(total);
    obs[i] = static_cast<double>(observed[i]);
    mass += probs[i];
  }
  expected[keep - 1] = (1.0 - mass) * static_cast<double>(total);
  for (std::size_t i = keep - 1; i < observed.size(); ++i)
    obs[keep - 1] += static_cast<double>(observed[i]);

  ChiSquareResult r;
  r.bins_used = static_cast<int>(keep);
  r.dof = static_cast<int>(keep) - 1;
  for (std::size_t i = 0; i < keep; ++i) {
    if (expected[i] <= 0)
      throw std::invalid_argument("chi_square_gof: non-positive expected count");
    const double diff = obs[i] - expected[i];
    r.statistic += diff * diff / expected[i];
  }
  r.p_value = 1.0 - chi_square_cdf(r.statistic, r.dof);
  return r;
}

/// Total variation distance between two empirical distributions given as
/// aligned count vectors: 0.5 * sum |p_i - q_i| after normalization.
inline double total_variation(std::span<const std::int64_t> a,
                              std::span<const std::int64_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("total_variation: size mismatch");
  std::int64_t na = 0, nb = 0;
  for (auto x : a) na += x;
  for (auto x : b) nb += x;
  if (na <= 0 || nb <= 0) throw std::invalid_argument("total_variation: empty sample");
  double tv = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    tv += std::fabs(static_cast<double>(a[i]) / static_cast<double>(na) -
                    static_cast<double>(b[i]) / static_cast<double>(nb));
  }
  return 0.5 * tv;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double tv = 0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::fabs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace ltspin
