#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ltspin/potential.hpp"
#include "ltspin/spin.hpp"
#include "ltspin/triangulation.hpp"

namespace ltspin {

/// The built-in distance majorant: min(1, (1/(r ln r))^3) for r >= 2, capped
/// at 1 for r in {0, 1} where the formula is singular. Non-increasing from
/// r = 2 on, and so is j_default(r) * r^2 = 1/(r ln^3 r).
inline double j_default(std::uint64_t r) {
  if (r < 2) return 1.0;
  const double v = 1.0 / (static_cast<double>(r) * std::log(static_cast<double>(r)));
  return std::min(1.0, v * v * v);
}

/// Non-negative bound J(r) on the interaction strength at graph distance r.
class Majorant {
 public:
  Majorant(std::function<double(std::uint64_t)> fn, std::string descriptor)
      : fn_(std::move(fn)), descriptor_(std::move(descriptor)) {}

  double operator()(std::uint64_t r) const { return fn_(r); }
  const std::string& descriptor() const { return descriptor_; }

  static Majorant defaults() { return Majorant(j_default, "j_default"); }
  static Majorant zero() {
    return Majorant([](std::uint64_t) { return 0.0; }, "zero");
  }
  /// Supported on r <= 1 only; used to reduce checks to degree sums.
  static Majorant nearest_neighbor() {
    return Majorant([](std::uint64_t r) { return r <= 1 ? 1.0 : 0.0; },
                    "nearest_neighbor");
  }

 private:
  std::function<double(std::uint64_t)> fn_;
  std::string descriptor_;
};

/// Summability checks over a probe slab: S1 = sup over probes of
/// sum_{v'} J(d) d^2 and, per threshold L, S2(L) = sup over probes of
/// sum_{v'} J(d) 1(d^2 >= L), distances within the truncated triangulation.
struct LongrangeConditionReport {
  std::uint32_t depth = 0;         // truncation height of the triangulation
  std::uint32_t probe_radius = 0;  // probes = all vertices in the slab T_radius
  std::uint64_t probe_count = 0;
  double s1 = 0;
  std::vector<double> l_grid;
  std::vector<double> s2;  // aligned with l_grid
};

inline LongrangeConditionReport check_conditions(const Triangulation& T,
                                                 const Majorant& majorant,
                                                 std::uint32_t probe_radius,
                                                 std::span<const double> l_grid) {
  if (probe_radius > T.height())
    throw std::invalid_argument("check_conditions: probe slab outside truncation");
  LongrangeConditionReport report;
  report.depth = T.height();
  report.probe_radius = probe_radius;
  report.l_grid.assign(l_grid.begin(), l_grid.end());
  report.s2.assign(l_grid.size(), 0.0);

  std::uint64_t probes = 0;
  for (std::uint32_t t = 0; t <= probe_radius; ++t) probes += T.layer_size(t);
  report.probe_count = probes;

  const AdjacencyCsr csr = build_adjacency(T);
  const std::uint64_t n = csr.offsets.size() - 1;
  std::vector<double> j_times_d2;  // J(d) * d^2, extended on demand
  std::vector<double> j_tab;
  const auto ensure_tables = [&](std::size_t d_max) {
    while (j_tab.size() <= d_max) {
      const auto d = static_cast<std::uint64_t>(j_tab.size());
      j_tab.push_back(majorant(d));
      j_times_d2.push_back(j_tab.back() * static_cast<double>(d) *
                           static_cast<double>(d));
    }
  };

  std::vector<std::int32_t> dist;
  std::vector<std::uint64_t> counts;
  for (std::uint64_t v = 0; v < probes; ++v) {
    bfs_distances(csr, v, dist);
    std::int32_t d_max = 0;
    for (std::uint64_t w = 0; w < n; ++w)
      if (dist[w] > d_max) d_max = dist[w];
    ensure_tables(static_cast<std::size_t>(d_max));
    counts.assign(static_cast<std::size_t>(d_max) + 1, 0);
    for (std::uint64_t w = 0; w < n; ++w) ++counts[static_cast<std::size_t>(dist[w])];

    double s1 = 0;
    for (std::size_t d = 0; d <= static_cast<std::size_t>(d_max); ++d)
      s1 += static_cast<double>(counts[d]) * j_times_d2[d];
    if (s1 > report.s1) report.s1 = s1;

    for (std::size_t li = 0; li < report.l_grid.size(); ++li) {
      const double l = report.l_grid[li];
      double s2 = 0;
      for (std::size_t d = 0; d <= static_cast<std::size_t>(d_max); ++d)
        if (static_cast<double>(d) * static_cast<double>(d) >= l)
          s2 += static_cast<double>(counts[d]) * j_tab[d];
      if (s2 > report.s2[li]) report.s2[li] = s2;
    }
  }
  return report;
}

/// Analytic bound on how much S1 can change between truncation depths
/// depth_low < depth_high: every vertex on layer l > depth_low sits at graph
/// distance at least l - probe_radius from each probe, and for majorants with
/// J(d) d^2 non-increasing past that range the per-vertex contribution is at
/// most J(l - probe_radius) (l - probe_radius)^2.
inline double s1_tail_bound(std::span<const std::uint64_t> layer_sizes,
                            std::uint32_t depth_low, std::uint32_t depth_high,
                            std::uint32_t probe_radius, const Majorant& majorant) {
  if (depth_low <= probe_radius)
    throw std::invalid_argument("s1_tail_bound: depth_low must exceed probe radius");
  if (layer_sizes.size() < static_cast<std::size_t>(depth_high) + 1)
    throw std::invalid_argument("s1_tail_bound: layer sizes too short");
  double bound = 0;
  for (std::uint64_t l = depth_low + 1; l <= depth_high; ++l) {
    const std::uint64_t d = l - probe_radius;
    bound += static_cast<double>(layer_sizes[l]) * majorant(d) *
             static_cast<double>(d) * static_cast<double>(d);
  }
  return bound;
}

/// Interaction family indexed by vertex pairs; `distance` is the graph
/// distance between v and w inside the truncation (0 when v == w).
class PairFamily {
 public:
  virtual ~PairFamily() = default;
  virtual std::uint32_t dimension() const = 0;
  virtual double value(VertexRef v, VertexRef w, std::uint64_t distance,
                       std::span<const double> x, std::span<const double> y) const = 0;
};

/// Wraps a nearest-neighbor pair potential as a family: adjacent pairs get
/// the potential weighted by total edge multiplicity, the diagonal pair gets
/// the self-loop term, everything farther is zero. With cutoff >= 1 the
/// long-range energy then reproduces the nearest-neighbor Hamiltonian.
class NearestNeighborFamily final : public PairFamily {
 public:
  NearestNeighborFamily(const Triangulation& T, const PairPotential& potential)
      : potential_(&potential), idx_(T), loop_(idx_.size(), 0) {
    detail::for_each_edge(T, [&](std::uint64_t a, std::uint64_t b, std::uint32_t mult,
                                 bool is_loop) {
      if (is_loop) {
        loop_[a] += mult;
        return;
      }
      mult_[pair_key(a, b)] += mult;
    });
  }

  std::uint32_t dimension() const override { return potential_->dimension(); }

  double value(VertexRef v, VertexRef w, std::uint64_t distance,
               std::span<const double> x, std::span<const double> y) const override {
    if (distance == 0) {
      const std::uint32_t loops = loop_[idx_.flat(v)];
      return loops ? loops * potential_->value(x, y) : 0.0;
    }
    if (distance > 1) return 0.0;
    const auto it = mult_.find(pair_key(idx_.flat(v), idx_.flat(w)));
    return it == mult_.end() ? 0.0 : it->second * potential_->value(x, y);
  }

 private:
  static std::uint64_t pair_key(std::uint64_t a, std::uint64_t b) {
    return a < b ? (a << 32) | b : (b << 32) | a;
  }

  const PairPotential* potential_;
  FlatIndex idx_;
  std::vector<std::uint32_t> loop_;
  std::unordered_map<std::uint64_t, std::uint32_t> mult_;
};

namespace detail {

/// Breadth-first distances out to max_depth; assumes dist[*] == -1 on entry
/// and records every vertex it labels in `touched` so the caller can reset.
inline void bfs_bounded(const AdjacencyCsr& csr, std::uint64_t source,
                        std::int32_t max_depth, std::vector<std::int32_t>& dist,
                        std::vector<std::uint32_t>& touched) {
  touched.clear();
  touched.push_back(static_cast<std::uint32_t>(source));
  dist[source] = 0;
  std::size_t frontier_begin = 0;
  std::int32_t d = 0;
  while (d < max_depth && frontier_begin < touched.size()) {
    const std::size_t frontier_end = touched.size();
    ++d;
    for (std::size_t f = frontier_begin; f < frontier_end; ++f) {
      for (const std::uint32_t w : csr.neighbors(touched[f])) {
        if (dist[w] < 0) {
          dist[w] = d;
          touched.push_back(w);
        }
      }
    }
    frontier_begin = frontier_end;
  }
}

}  // namespace detail

/// Energy of the region against everything within graph distance `cutoff`:
/// each unordered pair (including the diagonal) with at least one end in the
/// region contributes once; in-region pairs are visited from their smaller
/// flat id.
inline double longrange_energy(const Triangulation& T,
                               std::span<const VertexRef> region,
                               const SpinConfiguration& config,
                               const PairFamily& family, std::uint32_t cutoff) {
  if (config.dimension() != family.dimension())
    throw std::invalid_argument("longrange_energy: dimension mismatch");
  if (config.vertex_count() != T.vertex_count())
    throw std::invalid_argument("longrange_energy: config does not cover T");
  const FlatIndex idx(T);
  const AdjacencyCsr csr = build_adjacency(T);
  std::vector<std::uint8_t> in_region(idx.size(), 0);
  for (const VertexRef& v : region) in_region[idx.flat(v)] = 1;

  std::vector<std::int32_t> dist(idx.size(), -1);
  std::vector<std::uint32_t> touched;
  double total = 0;
  for (const VertexRef& v : region) {
    const std::uint64_t a = idx.flat(v);
    detail::bfs_bounded(csr, a, static_cast<std::int32_t>(cutoff), dist, touched);
    for (const std::uint32_t w : touched) {
      if (in_region[w] && w < a) continue;  // counted from the other end
      total += family.value(v, idx.unflat(w), static_cast<std::uint64_t>(dist[w]),
                            config.site(a), config.site(w));
    }
    for (const std::uint32_t w : touched) dist[w] = -1;
  }
  return total;
}

}  // namespace ltspin
