#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace ltspin {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle into [0, 2*pi).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0;  // guards the rounding edge at exactly 2*pi
  return r;
}

/// Shortest angular difference, in [0, pi].
inline double angle_gap(double a, double b) {
  const double d = std::fabs(wrap_angle(a) - wrap_angle(b));
  return d > std::numbers::pi ? kTwoPi - d : d;
}

/// Point on the d-dimensional torus: d angles in [0, 2*pi).
struct TorusPoint {
  std::vector<double> angles;

  TorusPoint() = default;
  explicit TorusPoint(std::vector<double> a) : angles(std::move(a)) {
    for (double& x : angles) x = wrap_angle(x);
  }

  static TorusPoint zero(std::uint32_t dim) {
    return TorusPoint(std::vector<double>(dim, 0.0));
  }

  std::uint32_t dimension() const { return static_cast<std::uint32_t>(angles.size()); }

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

/// Element of the acting torus group of dimension d' <= d; acts on a spin by
/// translating its first d' coordinates.
struct GroupElement {
  std::vector<double> angles;

  GroupElement() = default;
  explicit GroupElement(std::vector<double> a) : angles(std::move(a)) {
    for (double& x : angles) x = wrap_angle(x);
  }

  static GroupElement identity(std::uint32_t dim) {
    return GroupElement(std::vector<double>(dim, 0.0));
  }

  std::uint32_t dimension() const { return static_cast<std::uint32_t>(angles.size()); }

  /// Squared Euclidean norm of the stored angle representatives; the |theta|^2
  /// weight of the twist energy formulas.
  double norm_squared() const {
    double s = 0;
    for (double x : angles) s += x * x;
    return s;
  }

  /// Composition (translations add mod 2*pi).
  friend GroupElement operator+(const GroupElement& g, const GroupElement& h) {
    if (g.dimension() != h.dimension())
      throw std::invalid_argument("GroupElement: dimension mismatch");
    std::vector<double> sum(g.angles);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += h.angles[i];
    return GroupElement(std::move(sum));
  }
};

/// Translation action on the first d' coordinates; remaining coordinates are
/// untouched.
inline TorusPoint act(const GroupElement& g, const TorusPoint& x) {
  if (g.dimension() > x.dimension())
    throw std::invalid_argument("act: group dimension exceeds spin dimension");
  TorusPoint y = x;
  for (std::size_t i = 0; i < g.angles.size(); ++i)
    y.angles[i] = wrap_angle(y.angles[i] + g.angles[i]);
  return y;
}

/// Flat metric: Euclidean length of the coordinatewise shortest angular
/// differences. Invariant under simultaneous translation of both points.
inline double torus_distance(const TorusPoint& x, const TorusPoint& y) {
  if (x.dimension() != y.dimension())
    throw std::invalid_argument("torus_distance: dimension mismatch");
  double s = 0;
  for (std::size_t i = 0; i < x.angles.size(); ++i) {
    const double d = angle_gap(x.angles[i], y.angles[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace ltspin
