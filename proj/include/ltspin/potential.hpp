#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltspin/textio.hpp"
#include "ltspin/torus.hpp"

namespace ltspin {

/// Translation-invariant pair interaction on d-dimensional torus spins.
/// Implementations must satisfy U(g*x, g*y) = U(x, y) and have continuous
/// second derivatives; both are probed by randomized tests, not assumed.
class PairPotential {
 public:
  virtual ~PairPotential() = default;

  virtual std::uint32_t dimension() const = 0;

  /// U(x, y) on raw angle spans of length dimension().
  virtual double value(std::span<const double> x, std::span<const double> y) const = 0;

  /// Gradient of U in the first argument.
  virtual void grad_x(std::span<const double> x, std::span<const double> y,
                      std::span<double> out) const = 0;

  /// Gradient of U in the second argument.
  virtual void grad_y(std::span<const double> x, std::span<const double> y,
                      std::span<double> out) const = 0;

  /// Family name plus parameters, e.g. "xy beta=1".
  virtual std::string descriptor() const = 0;

  double value(const TorusPoint& x, const TorusPoint& y) const {
    if (x.dimension() != dimension() || y.dimension() != dimension())
      throw std::invalid_argument("PairPotential: dimension mismatch");
    return value(std::span<const double>(x.angles), std::span<const double>(y.angles));
  }
};

/// U(x, y) = -sum_i beta_i cos(x_i - y_i): the planar-rotor coupling, one
/// inverse-temperature weight per torus coordinate.
class XyPotential final : public PairPotential {
 public:
  explicit XyPotential(std::vector<double> beta) : beta_(std::move(beta)) {
    if (beta_.empty()) throw std::invalid_argument("XyPotential: empty beta");
  }
  XyPotential(std::uint32_t dim, double beta)
      : XyPotential(std::vector<double>(dim, beta)) {}

  std::uint32_t dimension() const override {
    return static_cast<std::uint32_t>(beta_.size());
  }

  const std::vector<double>& beta() const { return beta_; }

  double value(std::span<const double> x, std::span<const double> y) const override {
    double u = 0;
    for (std::size_t i = 0; i < beta_.size(); ++i) u -= beta_[i] * std::cos(x[i] - y[i]);
    return u;
  }

  void grad_x(std::span<const double> x, std::span<const double> y,
              std::span<double> out) const override {
    for (std::size_t i = 0; i < beta_.size(); ++i)
      out[i] = beta_[i] * std::sin(x[i] - y[i]);
  }

  void grad_y(std::span<const double> x, std::span<const double> y,
              std::span<double> out) const override {
    for (std::size_t i = 0; i < beta_.size(); ++i)
      out[i] = -beta_[i] * std::sin(x[i] - y[i]);
  }

  std::string descriptor() const override {
    std::string s = "xy beta=";
    for (std::size_t i = 0; i < beta_.size(); ++i)
      s += (i ? "," : "") + format_double(beta_[i]);
    return s;
  }

 private:
  std::vector<double> beta_;
};

/// U identically zero: the free case used as a null model.
class ZeroPotential final : public PairPotential {
 public:
  explicit ZeroPotential(std::uint32_t dim) : dim_(dim) {
    if (dim_ == 0) throw std::invalid_argument("ZeroPotential: dimension >= 1");
  }

  std::uint32_t dimension() const override { return dim_; }

  double value(std::span<const double>, std::span<const double>) const override {
    return 0.0;
  }

  void grad_x(std::span<const double>, std::span<const double>,
              std::span<double> out) const override {
    for (double& g : out) g = 0.0;
  }

  void grad_y(std::span<const double>, std::span<const double>,
              std::span<double> out) const override {
    for (double& g : out) g = 0.0;
  }

  std::string descriptor() const override {
    return "zero dim=" + std::to_string(dim_);
  }

 private:
  std::uint32_t dim_;
};

/// Resolves the CLI-facing potential descriptors ("xy" | "zero").
inline std::unique_ptr<PairPotential> make_potential(const std::string& family,
                                                     std::uint32_t dim, double beta) {
  if (family == "xy") return std::make_unique<XyPotential>(dim, beta);
  if (family == "zero") return std::make_unique<ZeroPotential>(dim);
  throw std::invalid_argument("unknown potential family: " + family);
}

}  // namespace ltspin
