#include "ltspin/spin.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "ltspin/offspring.hpp"
#include "ltspin/potential.hpp"
#include "ltspin/rng.hpp"
#include "ltspin/stats.hpp"
#include "ltspin/torus.hpp"
#include "ltspin/tree.hpp"
#include "ltspin/triangulation.hpp"

namespace {

using namespace ltspin;

constexpr double kPi = std::numbers::pi;

LayeredTree path_tree(std::uint32_t height) {
  std::vector<std::uint64_t> counts(height + 1, 1);
  counts.back() = 0;
  return LayeredTree::from_bfs_child_counts(counts);
}

TorusPoint random_point(std::uint32_t dim, Xoshiro256pp& rng) {
  std::vector<double> a(dim);
  for (double& x : a) x = kTwoPi * uniform01(rng);
  return TorusPoint(std::move(a));
}

TEST(Torus, WrapAndGap) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(kTwoPi), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi / 2), 1.5 * kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(5 * kTwoPi + 0.25), wrap_angle(0.25));
  EXPECT_NEAR(angle_gap(0.1, kTwoPi - 0.1), 0.2, 1e-15);
  EXPECT_NEAR(angle_gap(0.0, kPi), kPi, 1e-15);
  EXPECT_DOUBLE_EQ(angle_gap(1.3, 1.3), 0.0);
}

TEST(Torus, ActionTranslatesLeadingCoordinates) {
  const GroupElement g(std::vector<double>{kPi / 2});
  const TorusPoint x(std::vector<double>{0.0, 1.0});
  const TorusPoint y = act(g, x);
  EXPECT_DOUBLE_EQ(y.angles[0], kPi / 2);
  EXPECT_DOUBLE_EQ(y.angles[1], 1.0);
  EXPECT_THROW(act(GroupElement(std::vector<double>{0.1, 0.2, 0.3}), x), std::invalid_argument);
}

TEST(Torus, ActionIsGroupHomomorphism) {
  Xoshiro256pp rng(808);
  for (int i = 0; i < 1000; ++i) {
    const TorusPoint x = random_point(3, rng);
    std::vector<double> ga(2), ha(2);
    for (double& a : ga) a = uniform_symmetric(rng, 10.0);
    for (double& a : ha) a = uniform_symmetric(rng, 10.0);
    const GroupElement g(ga), h(ha);
    const TorusPoint lhs = act(g + h, x);
    const TorusPoint rhs = act(g, act(h, x));
    for (std::uint32_t j = 0; j < 3; ++j)
      EXPECT_NEAR(angle_gap(lhs.angles[j], rhs.angles[j]), 0.0, 1e-12);
  }
}

TEST(Torus, DistanceProperties) {
  const TorusPoint a(std::vector<double>{0.0, 0.0});
  EXPECT_DOUBLE_EQ(torus_distance(a, a), 0.0);
  EXPECT_NEAR(torus_distance(TorusPoint(std::vector<double>{0.0}), TorusPoint(std::vector<double>{kPi})), kPi, 1e-15);
  EXPECT_NEAR(torus_distance(TorusPoint(std::vector<double>{0.1}), TorusPoint(std::vector<double>{kTwoPi - 0.1})), 0.2,
              1e-15);
  Xoshiro256pp rng(33);
  for (int i = 0; i < 200; ++i) {
    const TorusPoint x = random_point(2, rng);
    const TorusPoint y = random_point(2, rng);
    const GroupElement g(std::vector<double>{uniform_symmetric(rng, 9.0), uniform_symmetric(rng, 9.0)});
    EXPECT_NEAR(torus_distance(act(g, x), act(g, y)), torus_distance(x, y), 1e-12);
  }
  EXPECT_THROW(torus_distance(TorusPoint(std::vector<double>{0.0}), a), std::invalid_argument);
}

TEST(Potential, XyValuesAndDescriptor) {
  const XyPotential U(1, 1.0);
  const std::vector<double> zero = {0.0}, pi = {kPi};
  EXPECT_DOUBLE_EQ(U.value(zero, zero), -1.0);
  EXPECT_DOUBLE_EQ(U.value(zero, pi), 1.0);
  EXPECT_EQ(U.descriptor(), "xy beta=1");
  const XyPotential U2(std::vector<double>{0.5, 2.0});
  EXPECT_EQ(U2.dimension(), 2u);
  EXPECT_EQ(U2.descriptor(), "xy beta=0.5,2");
  EXPECT_THROW(XyPotential(std::vector<double>{}), std::invalid_argument);
  EXPECT_EQ(ZeroPotential(3).descriptor(), "zero dim=3");
  EXPECT_THROW(ZeroPotential(0), std::invalid_argument);
  EXPECT_EQ(make_potential("xy", 2, 0.5)->descriptor(), "xy beta=0.5,0.5");
  EXPECT_EQ(make_potential("zero", 1, 1.0)->descriptor(), "zero dim=1");
  EXPECT_THROW(make_potential("ising", 1, 1.0), std::invalid_argument);
  const PairPotential& base = U;
  EXPECT_DOUBLE_EQ(base.value(TorusPoint(std::vector<double>{0.0}), TorusPoint(std::vector<double>{kPi})), 1.0);
  EXPECT_THROW(base.value(TorusPoint(std::vector<double>{0.0, 0.0}), TorusPoint(std::vector<double>{0.0, 0.0})),
               std::invalid_argument);
}

TEST(Potential, GradientsMatchCentralDifferences) {
  const XyPotential U(std::vector<double>{0.7, 1.3, 0.4});
  Xoshiro256pp rng(91);
  std::vector<double> gx(3), gy(3);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(3), y(3);
    for (double& a : x) a = kTwoPi * uniform01(rng);
    for (double& a : y) a = kTwoPi * uniform01(rng);
    U.grad_x(x, y, gx);
    U.grad_y(x, y, gy);
    for (std::size_t i = 0; i < 3; ++i) {
      std::vector<double> xp = x, xm = x, yp = y, ym = y;
      xp[i] += h;
      xm[i] -= h;
      yp[i] += h;
      ym[i] -= h;
      EXPECT_NEAR(gx[i], (U.value(xp, y) - U.value(xm, y)) / (2 * h), 1e-8);
      EXPECT_NEAR(gy[i], (U.value(x, yp) - U.value(x, ym)) / (2 * h), 1e-8);
      // U depends on x - y only, so the two gradients are opposite.
      EXPECT_NEAR(gx[i], -gy[i], 1e-15);
    }
  }
}

TEST(SpinConfig, StorageAndGlobalAction) {
  SpinConfiguration config(3, 2);
  EXPECT_EQ(config.vertex_count(), 3u);
  config.set_angle(1, 0, kTwoPi + 0.3);
  EXPECT_DOUBLE_EQ(config.angle(1, 0), 0.3);
  config.set_spin(2, TorusPoint(std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(config.spin(2), TorusPoint(std::vector<double>{1.0, 2.0}));
  EXPECT_THROW(config.set_spin(0, TorusPoint(std::vector<double>{1.0})), std::invalid_argument);

  // d' = 1 action leaves the second coordinate of every spin alone.
  config.apply(GroupElement(std::vector<double>{0.5}));
  EXPECT_DOUBLE_EQ(config.angle(2, 0), 1.5);
  EXPECT_DOUBLE_EQ(config.angle(2, 1), 2.0);
  EXPECT_DOUBLE_EQ(config.angle(0, 0), 0.5);
  EXPECT_THROW(config.apply(GroupElement(std::vector<double>{0.1, 0.2, 0.3})), std::invalid_argument);

  const SpinConfiguration a = SpinConfiguration::random(5, 2, 7);
  const SpinConfiguration b = SpinConfiguration::random(5, 2, 7);
  for (std::uint64_t v = 0; v < 5; ++v)
    for (std::uint32_t i = 0; i < 2; ++i)
      EXPECT_DOUBLE_EQ(a.angle(v, i), b.angle(v, i));
}

TEST(Energy, HandWorkedTwoVertexCases) {
  // Path of height 1: one self-loop per circle plus the doubled vertical edge.
  const Triangulation T = tree_to_lt(path_tree(1));
  const XyPotential U(1, 1.0);
  SpinConfiguration config(2, 1);
  const std::vector<VertexRef> lower = {{0, 0}};
  const std::vector<VertexRef> upper = {{1, 0}};
  const std::vector<VertexRef> both = {{0, 0}, {1, 0}};
  // All angles zero: loop gives -1, the doubled vertical edge gives -2.
  EXPECT_DOUBLE_EQ(energy(T, lower, config, U), -3.0);
  EXPECT_DOUBLE_EQ(energy(T, upper, config, U), -3.0);
  EXPECT_DOUBLE_EQ(energy(T, both, config, U), -4.0);
  // Anti-aligned endpoints flip the vertical contribution to +2.
  config.set_angle(1, 0, kPi);
  EXPECT_DOUBLE_EQ(energy(T, lower, config, U), 1.0);
  EXPECT_DOUBLE_EQ(energy(T, both, config, U), 0.0);

  EXPECT_THROW(energy(T, std::vector<VertexRef>{{5, 0}}, config, U),
               std::invalid_argument);
  const SpinConfiguration wrong(2, 2);
  EXPECT_THROW(energy(T, lower, wrong, U), std::invalid_argument);
}

TEST(Energy, FanCircleCase) {
  // Root with four children: vertex (1,0) touches two circle edges and one
  // vertical edge of multiplicity 1.
  const Triangulation T =
      tree_to_lt(LayeredTree::from_bfs_child_counts(std::vector<std::size_t>{4, 0, 0, 0, 0}));
  const XyPotential U(1, 1.0);
  const SpinConfiguration config(5, 1);
  EXPECT_DOUBLE_EQ(energy(T, std::vector<VertexRef>{{1, 0}}, config, U), -3.0);
  // Vertex (1,3) additionally carries the doubled leftmost edge.
  EXPECT_DOUBLE_EQ(energy(T, std::vector<VertexRef>{{1, 3}}, config, U), -4.0);
}

TEST(Energy, InvariantUnderGroupAction) {
  const OffspringLaw law = OffspringLaw::geometric();
  const XyPotential U(2, 0.8);
  Xoshiro256pp rng(3003);
  for (int trial = 0; trial < 200; ++trial) {
    const Triangulation T =
        tree_to_lt(sample_kesten_tree(law, 6, derive_seed(60, static_cast<std::uint64_t>(trial))));
    SpinConfiguration config = SpinConfiguration::random(
        T.vertex_count(), 2, derive_seed(61, static_cast<std::uint64_t>(trial)));
    const std::uint32_t r = static_cast<std::uint32_t>(uniform_below(rng, T.height() + 1));
    const auto region = slab(T, r);
    const double before = energy(T, region, config, U);
    const std::uint32_t gdim = 1 + static_cast<std::uint32_t>(uniform_below(rng, 2));
    std::vector<double> ga(gdim);
    for (double& a : ga) a = uniform_symmetric(rng, 7.0);
    config.apply(GroupElement(ga));
    EXPECT_NEAR(energy(T, region, config, U), before, 1e-9);
  }
}

TEST(Conditional, FreeCaseNormalizer) {
  const Triangulation T = tree_to_lt(path_tree(2));
  const ZeroPotential U1(1);
  const SpinConfiguration boundary(3, 1);
  const ConditionalDensity one(T, {{1, 0}}, boundary, U1);
  EXPECT_EQ(one.total_dims(), 1u);
  EXPECT_NEAR(one.normalizer(64), kTwoPi, 1e-9);
  const ConditionalDensity two(T, {{0, 0}, {1, 0}}, boundary, U1);
  EXPECT_NEAR(two.normalizer(64), kTwoPi * kTwoPi, 1e-9);
  const ZeroPotential U2(2);
  const SpinConfiguration boundary2(3, 2);
  const ConditionalDensity planar(T, {{1, 0}}, boundary2, U2);
  EXPECT_NEAR(planar.normalizer(64), kTwoPi * kTwoPi, 1e-9);
}

TEST(Conditional, MiddleOfPathIsTiltedRotor) {
  // Path of height 2, region = the middle vertex. Incident terms: its own
  // self-loop (constant -beta) and the two doubled vertical edges, so
  // H(x) = -[2 cos(x - a0) + 2 cos(x - a2) + 1] with beta = 1.
  const Triangulation T = tree_to_lt(path_tree(2));
  const XyPotential U(1, 1.0);
  SpinConfiguration boundary(3, 1);
  const double a0 = 0.7, a2 = 2.1;
  boundary.set_angle(0, 0, a0);
  boundary.set_angle(2, 0, a2);
  const ConditionalDensity cond(T, {{1, 0}}, boundary, U);
  for (double x = 0.0; x < kTwoPi; x += 0.37) {
    const double expect = -(2 * std::cos(x - a0) + 2 * std::cos(x - a2) + 1);
    EXPECT_NEAR(cond.hamiltonian(std::vector<double>{x}), expect, 1e-12);
    EXPECT_NEAR(cond.unnormalized(std::vector<double>{x}), std::exp(-expect), 1e-12);
  }
  // Rectangle-rule normalizer has stabilized by a few hundred points.
  const double z512 = cond.normalizer(512);
  EXPECT_NEAR(cond.normalizer(1024), z512, 1e-8 * z512);
}

TEST(Conditional, ShiftCovariance) {
  // Shifting the boundary and the free values by the same group element
  // leaves the conditional Hamiltonian unchanged.
  const Triangulation T =
      tree_to_lt(sample_kesten_tree(OffspringLaw::geometric(), 4, 19));
  const XyPotential U(1, 1.2);
  SpinConfiguration boundary =
      SpinConfiguration::random(T.vertex_count(), 1, 2027);
  const std::vector<VertexRef> region = {{1, 0}};
  const ConditionalDensity plain(T, region, boundary, U);
  const GroupElement g(std::vector<double>{1.9});
  SpinConfiguration shifted = boundary;
  shifted.apply(g);
  const ConditionalDensity moved(T, region, shifted, U);
  for (double x = 0.1; x < kTwoPi; x += 0.53)
    EXPECT_NEAR(moved.hamiltonian(std::vector<double>{wrap_angle(x + g.angles[0])}),
                plain.hamiltonian(std::vector<double>{x}), 1e-9);
}

TEST(Conditional, RejectsBadRegions) {
  const Triangulation T = tree_to_lt(path_tree(2));
  const XyPotential U(1, 1.0);
  const SpinConfiguration boundary(3, 1);
  EXPECT_THROW(ConditionalDensity(T, {}, boundary, U), std::invalid_argument);
  EXPECT_THROW(ConditionalDensity(T, {{1, 0}, {1, 0}}, boundary, U),
               std::invalid_argument);
  const ConditionalDensity cond(T, {{0, 0}, {1, 0}, {2, 0}}, boundary, U);
  EXPECT_THROW(cond.normalizer(64), std::invalid_argument);
  const ConditionalDensity one(T, {{1, 0}}, boundary, U);
  EXPECT_THROW(one.normalizer(1), std::invalid_argument);
  EXPECT_THROW(one.hamiltonian(std::vector<double>{0.1, 0.2}), std::invalid_argument);
}

TEST(Metropolis, FreePotentialAcceptsEverythingAndReplaysStream) {
  const Triangulation T =
      tree_to_lt(sample_kesten_tree(OffspringLaw::geometric(), 5, 41));
  const ZeroPotential U(2);
  const double delta = 0.8;
  const MetropolisSampler sampler(T, U, delta, T.height());
  EXPECT_EQ(sampler.update_count(), T.vertex_count());
  SpinConfiguration config =
      SpinConfiguration::random(T.vertex_count(), 2, 5150);
  const SpinConfiguration start = config;
  Xoshiro256pp rng(616);
  Xoshiro256pp replay = rng;  // value copy: same stream
  const SweepStats stats = sampler.sweep(config, rng);
  EXPECT_EQ(stats.proposals, T.vertex_count());
  EXPECT_EQ(stats.accepted, T.vertex_count());
  // Each site consumes two proposal draws and one acceptance draw, in flat
  // vertex order; with U = 0 the proposal always lands.
  for (std::uint64_t v = 0; v < T.vertex_count(); ++v) {
    for (std::uint32_t i = 0; i < 2; ++i) {
      const double expect = wrap_angle(start.angle(v, i) + uniform_symmetric(replay, delta));
      EXPECT_DOUBLE_EQ(config.angle(v, i), expect);
    }
    uniform01(replay);  // the acceptance draw
  }
}

TEST(Metropolis, UpdateSlabLeavesBoundaryFixed) {
  const Triangulation T =
      tree_to_lt(sample_kesten_tree(OffspringLaw::geometric(), 6, 43));
  const XyPotential U(1, 1.0);
  const MetropolisSampler sampler(T, U, 1.0, 2);
  SpinConfiguration config =
      SpinConfiguration::random(T.vertex_count(), 1, 99);
  const SpinConfiguration start = config;
  Xoshiro256pp rng(5);
  for (int s = 0; s < 3; ++s) sampler.sweep(config, rng);
  std::uint64_t frozen_from = 0;
  for (std::uint32_t t = 0; t <= 2; ++t) frozen_from += T.layer_size(t);
  for (std::uint64_t v = frozen_from; v < T.vertex_count(); ++v)
    EXPECT_DOUBLE_EQ(config.angle(v, 0), start.angle(v, 0));

  EXPECT_THROW(MetropolisSampler(T, U, 0.0, 2), std::invalid_argument);
  EXPECT_THROW(MetropolisSampler(T, U, 1.0, T.height() + 1), std::invalid_argument);
  SpinConfiguration wrong(T.vertex_count(), 2);
  EXPECT_THROW(sampler.sweep(wrong, rng), std::invalid_argument);
}

/// Same couplings as XyPotential but routed through the generic energy-change
/// path (the dynamic type is what selects the fast path).
class XyThroughGenericPath final : public PairPotential {
 public:
  XyThroughGenericPath(std::uint32_t dim, double beta) : xy_(dim, beta) {}
  std::uint32_t dimension() const override { return xy_.dimension(); }
  double value(std::span<const double> x, std::span<const double> y) const override {
    return xy_.value(x, y);
  }
  void grad_x(std::span<const double> x, std::span<const double> y,
              std::span<double> out) const override {
    xy_.grad_x(x, y, out);
  }
  void grad_y(std::span<const double> x, std::span<const double> y,
              std::span<double> out) const override {
    xy_.grad_y(x, y, out);
  }
  std::string descriptor() const override { return xy_.descriptor(); }

 private:
  XyPotential xy_;
};

TEST(Metropolis, FastPathMatchesGenericPath) {
  // Both paths consume the identical RNG stream and compute the same energy
  // change up to rounding, so whole trajectories coincide.
  const Triangulation T =
      tree_to_lt(sample_kesten_tree(OffspringLaw::geometric(), 6, 47));
  const XyPotential fast_u(1, 1.0);
  const XyThroughGenericPath slow_u(1, 1.0);
  const MetropolisSampler fast(T, fast_u, 1.2, T.height());
  const MetropolisSampler slow(T, slow_u, 1.2, T.height());
  SpinConfiguration a = SpinConfiguration::random(T.vertex_count(), 1, 1234);
  SpinConfiguration b = a;
  Xoshiro256pp rng_a(777);
  Xoshiro256pp rng_b(777);
  std::uint64_t accepted_a = 0, accepted_b = 0;
  for (int s = 0; s < 25; ++s) {
    accepted_a += fast.sweep(a, rng_a).accepted;
    accepted_b += slow.sweep(b, rng_b).accepted;
  }
  EXPECT_EQ(accepted_a, accepted_b);
  for (std::uint64_t v = 0; v < T.vertex_count(); ++v)
    EXPECT_NEAR(angle_gap(a.angle(v, 0), b.angle(v, 0)), 0.0, 1e-9);
}

TEST(Metropolis, SingleSiteMarginalMatchesQuadrature) {
  // Only the root updates; everything above is a fixed boundary. The exact
  // conditional marginal comes from the one-dimensional quadrature.
  const Triangulation T = tree_to_lt(path_tree(1));
  const XyPotential U(1, 1.0);
  SpinConfiguration config(2, 1);
  config.set_angle(1, 0, 1.1);
  const ConditionalDensity cond(T, {{0, 0}}, config, U);
  const double z = cond.normalizer(4096);

  const MetropolisSampler sampler(T, U, 1.5, 0);
  Xoshiro256pp rng(2222);
  const int bins = 16;
  const int burn = 2000, sweeps = 60000;
  for (int s = 0; s < burn; ++s) sampler.sweep(config, rng);
  std::vector<std::int64_t> counts(bins, 0);
  for (int s = 0; s < sweeps; ++s) {
    sampler.sweep(config, rng);
    ++counts[std::min<int>(bins - 1, static_cast<int>(config.angle(0, 0) / kTwoPi * bins))];
  }
  std::vector<double> probs(bins, 0.0);
  const int sub = 64;  // quadrature points per bin
  const double step = kTwoPi / (bins * sub);
  for (int bin = 0; bin < bins; ++bin) {
    double mass = 0;
    for (int j = 0; j < sub; ++j) {
      const double x = (bin * sub + j + 0.5) * step;
      mass += cond.unnormalized(std::vector<double>{x}) * step;
    }
    probs[bin] = mass / z;
  }
  std::vector<double> observed(counts.begin(), counts.end());
  for (double& c : observed) c /= sweeps;
  EXPECT_LT(total_variation(observed, probs), 0.05);
}

TEST(SectionRotation, FreePotentialReplaysOneAngularShiftPerCut) {
  // Path of height 5 with free couplings: every proposal lands, and each
  // vertex below a cut picks up exactly that cut's shift. Cut widths scale
  // with the crossing weight, which on a path is the doubled vertical edge.
  const Triangulation T = tree_to_lt(path_tree(5));
  const ZeroPotential U(1);
  const double delta = 0.9;
  const SectionRotationSampler rotator(T, U, delta, T.height());
  EXPECT_EQ(rotator.cut_count(), 2u);  // cuts at layers 2 and 4
  SpinConfiguration config = SpinConfiguration::random(T.vertex_count(), 1, 88);
  const SpinConfiguration start = config;
  Xoshiro256pp rng(909);
  Xoshiro256pp replay = rng;
  const SweepStats stats = rotator.sweep(config, rng);
  EXPECT_EQ(stats.proposals, 2u);
  EXPECT_EQ(stats.accepted, 2u);
  const double width = delta / std::sqrt(1.0 + 2.0);
  const double gamma2 = uniform_symmetric(replay, width);
  uniform01(replay);  // acceptance draw
  const double gamma4 = uniform_symmetric(replay, width);
  for (std::uint64_t v = 0; v < T.vertex_count(); ++v) {
    double shift = 0.0;
    if (v < 2) shift += gamma2;
    if (v < 4) shift += gamma4;
    EXPECT_NEAR(angle_gap(config.angle(v, 0), wrap_angle(start.angle(v, 0) + shift)),
                0.0, 1e-12);
  }
}

TEST(SectionRotation, LeavesFixedLayersAloneAndValidates) {
  const Triangulation T =
      tree_to_lt(sample_kesten_tree(OffspringLaw::geometric(), 6, 53));
  const XyPotential U(1, 1.0);
  const SectionRotationSampler rotator(T, U, 1.0, 4);
  SpinConfiguration config = SpinConfiguration::random(T.vertex_count(), 1, 17);
  const SpinConfiguration start = config;
  Xoshiro256pp rng(29);
  for (int s = 0; s < 5; ++s) rotator.sweep(config, rng);
  // Cuts stop at layer 4, so layers 4 and above never move.
  std::uint64_t frozen_from = 0;
  for (std::uint32_t t = 0; t < 4; ++t) frozen_from += T.layer_size(t);
  for (std::uint64_t v = frozen_from; v < T.vertex_count(); ++v)
    EXPECT_DOUBLE_EQ(config.angle(v, 0), start.angle(v, 0));

  EXPECT_EQ(SectionRotationSampler(T, U, 1.0, 1).cut_count(), 0u);
  EXPECT_EQ(SectionRotationSampler(T, U, 1.0, 2).cut_count(), 1u);
  EXPECT_THROW(SectionRotationSampler(T, U, 0.0, 2), std::invalid_argument);
  EXPECT_THROW(SectionRotationSampler(T, U, 1.0, T.height() + 1),
               std::invalid_argument);
  SpinConfiguration wrong(T.vertex_count(), 2);
  EXPECT_THROW(rotator.sweep(wrong, rng), std::invalid_argument);
}

TEST(SectionRotation, CompositeChainKeepsTheSiteChainDistribution) {
  // The rotation moves are extra proposals on top of the site sweep; both
  // chains target the same conditional law, so long-run histograms of the
  // root angle against the fixed outer boundary must agree.
  const Triangulation T = tree_to_lt(path_tree(4));
  const XyPotential U(1, 1.0);
  const std::uint32_t limit = 3;
  const MetropolisSampler sampler(T, U, 1.0, limit);
  const SectionRotationSampler rotator(T, U, 1.0, limit);
  const int bins = 16, burn = 5000, sweeps = 400000;
  const auto histogram = [&](bool with_rotations, std::uint64_t seed) {
    SpinConfiguration config = SpinConfiguration::random(T.vertex_count(), 1, 4242);
    config.set_angle(4, 0, 0.8);  // the fixed layer-4 boundary spin
    Xoshiro256pp rng(seed);
    std::vector<double> hist(bins, 0.0);
    for (int s = 0; s < burn + sweeps; ++s) {
      sampler.sweep(config, rng);
      if (with_rotations) rotator.sweep(config, rng);
      if (s >= burn)
        ++hist[std::min<int>(bins - 1,
                             static_cast<int>(config.angle(0, 0) / kTwoPi * bins))];
    }
    for (double& h : hist) h /= sweeps;
    return hist;
  };
  const std::vector<double> site_only = histogram(false, 111);
  const std::vector<double> composite = histogram(true, 222);
  EXPECT_LT(total_variation(site_only, composite), 0.05);
}

TEST(Magnetization, ModulusCases) {
  const Triangulation T =
      tree_to_lt(LayeredTree::from_bfs_child_counts(std::vector<std::size_t>{2, 0, 0}));
  SpinConfiguration config(3, 2);
  const auto everything = slab(T, 1);
  // All spins identical: unit modulus regardless of the common angle.
  for (std::uint64_t v = 0; v < 3; ++v) config.set_spin(v, TorusPoint(std::vector<double>{0.9, 4.0}));
  const Magnetization aligned = magnetization(T, config, everything);
  EXPECT_NEAR(aligned.modulus, 1.0, 1e-12);
  EXPECT_NEAR(aligned.components[0], std::cos(0.9), 1e-12);
  EXPECT_NEAR(aligned.components[1], std::sin(0.9), 1e-12);

  // Angles at the cube roots of unity cancel exactly.
  SpinConfiguration spread(3, 1);
  for (std::uint64_t v = 0; v < 3; ++v)
    spread.set_angle(v, 0, v * kTwoPi / 3.0);
  EXPECT_NEAR(magnetization(T, spread, everything).modulus, 0.0, 1e-12);

  // Invariance under the full-dimensional global action.
  SpinConfiguration random_cfg = SpinConfiguration::random(3, 2, 10101);
  const double before = magnetization(T, random_cfg, everything).modulus;
  random_cfg.apply(GroupElement(std::vector<double>{2.2, 0.4}));
  EXPECT_NEAR(magnetization(T, random_cfg, everything).modulus, before, 1e-12);

  EXPECT_THROW(magnetization(T, config, {}), std::invalid_argument);
}

TEST(SpinTrace, LogsEnergyAndRegionMagnetizationPerRecordedSweep) {
  const Triangulation T = tree_to_lt(path_tree(3));
  const XyPotential U(2, 0.7);
  std::vector<SpinTrace::Region> regions;
  regions.push_back({"inner", slab(T, 1)});
  regions.push_back({"rim", {VertexRef{3, 0}}});
  SpinTrace trace(T, U, regions);

  const std::vector<std::string> expected_columns = {
      "sweep",     "energy",    "inner_cos0", "inner_sin0", "inner_cos1", "inner_sin1",
      "inner_modulus", "rim_cos0", "rim_sin0", "rim_cos1",  "rim_sin1",   "rim_modulus"};
  EXPECT_EQ(trace.table().name, "spin_trace");
  EXPECT_EQ(trace.table().columns, expected_columns);

  SpinConfiguration config = SpinConfiguration::random(T.vertex_count(), 2, 4242);
  trace.record(0, config);
  config.set_angle(2, 1, 1.5);
  trace.record(10, config);

  const Table& table = trace.table();
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0][0], "0");
  EXPECT_EQ(table.rows[1][0], "10");

  // Cells round-trip to the exact observables of the recorded configuration.
  const auto whole = slab(T, T.height());
  EXPECT_EQ(parse_double(table.rows[1][1]), energy(T, whole, config, U));
  const Magnetization rim = magnetization(T, config, regions[1].vertices);
  EXPECT_EQ(parse_double(table.rows[1][7]), rim.components[0]);
  EXPECT_EQ(parse_double(table.rows[1][8]), rim.components[1]);
  EXPECT_EQ(parse_double(table.rows[1][11]), rim.modulus);

  // The saved text parses back losslessly and carries the schema metadata.
  const Table reread = Table::from_string(table.to_string());
  EXPECT_EQ(reread.columns, table.columns);
  EXPECT_EQ(reread.rows, table.rows);
  ASSERT_NE(reread.find_meta("dimension"), nullptr);
  EXPECT_EQ(*reread.find_meta("dimension"), "2");

  const std::vector<SpinTrace::Region> none;
  std::vector<SpinTrace::Region> spaced_name;
  spaced_name.push_back({"bad name", regions[0].vertices});
  std::vector<SpinTrace::Region> empty_region;
  empty_region.push_back({"empty", {}});
  EXPECT_THROW(SpinTrace(T, U, none), std::invalid_argument);
  EXPECT_THROW(SpinTrace(T, U, spaced_name), std::invalid_argument);
  EXPECT_THROW(SpinTrace(T, U, empty_region), std::invalid_argument);
}

}  // namespace
