#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ltspin/potential.hpp"
#include "ltspin/rng.hpp"
#include "ltspin/table.hpp"
#include "ltspin/torus.hpp"
#include "ltspin/triangulation.hpp"

namespace ltspin {

/// Torus spins over the vertices of a finite triangulation, stored flat in
/// layer-major vertex order (the FlatIndex numbering), d angles per vertex.
class SpinConfiguration {
 public:
  SpinConfiguration(std::uint64_t vertex_count, std::uint32_t dim)
      : dim_(dim), angles_(vertex_count * dim, 0.0) {
    if (dim == 0) throw std::invalid_argument("SpinConfiguration: dim >= 1");
  }

  static SpinConfiguration zero(std::uint64_t vertex_count, std::uint32_t dim) {
    return SpinConfiguration(vertex_count, dim);
  }

  /// Independent uniform spins from a single stream seeded by `seed`.
  static SpinConfiguration random(std::uint64_t vertex_count, std::uint32_t dim,
                                  std::uint64_t seed) {
    SpinConfiguration config(vertex_count, dim);
    Xoshiro256pp rng(seed);
    for (double& a : config.angles_) a = kTwoPi * uniform01(rng);
    return config;
  }

  std::uint32_t dimension() const { return dim_; }
  std::uint64_t vertex_count() const { return angles_.size() / dim_; }

  double angle(std::uint64_t v, std::uint32_t i) const { return angles_[v * dim_ + i]; }
  void set_angle(std::uint64_t v, std::uint32_t i, double a) {
    angles_[v * dim_ + i] = wrap_angle(a);
  }

  std::span<const double> site(std::uint64_t v) const {
    return {angles_.data() + v * dim_, dim_};
  }
  std::span<double> site(std::uint64_t v) {
    return {angles_.data() + v * dim_, dim_};
  }

  TorusPoint spin(std::uint64_t v) const {
    const auto s = site(v);
    return TorusPoint(std::vector<double>(s.begin(), s.end()));
  }
  void set_spin(std::uint64_t v, const TorusPoint& x) {
    if (x.dimension() != dim_)
      throw std::invalid_argument("set_spin: dimension mismatch");
    for (std::uint32_t i = 0; i < dim_; ++i) angles_[v * dim_ + i] = x.angles[i];
  }

  /// Global group action: translate the leading coordinates of every spin.
  void apply(const GroupElement& g) {
    if (g.dimension() > dim_)
      throw std::invalid_argument("apply: group dimension exceeds spin dimension");
    for (std::uint64_t v = 0; v < vertex_count(); ++v)
      for (std::uint32_t i = 0; i < g.dimension(); ++i)
        angles_[v * dim_ + i] = wrap_angle(angles_[v * dim_ + i] + g.angles[i]);
  }

  std::span<const double> raw() const { return angles_; }

 private:
  std::uint32_t dim_;
  std::vector<double> angles_;
};

namespace detail {

/// Visits every edge of the triangulation once: the k_t cyclic horizontal
/// edges per circle (a single self-loop when k_t = 1) and the vertical edges
/// with their multiplicities. Flat vertex ids, fn(a, b, mult, is_loop).
template <typename Fn>
void for_each_edge(const Triangulation& T, Fn&& fn) {
  const auto& k = T.layer_sizes();
  std::uint64_t base = 0;
  for (std::uint32_t t = 0; t < k.size(); ++t) {
    if (k[t] == 1) {
      fn(base, base, std::uint32_t{1}, true);
    } else {
      for (std::uint64_t i = 0; i < k[t]; ++i)
        fn(base + i, base + (i + 1) % k[t], std::uint32_t{1}, false);
    }
    base += k[t];
  }
  base = 0;
  for (std::uint32_t t = 0; t < T.height(); ++t) {
    const std::uint64_t upper_base = base + k[t];
    for (const EdgeRec& e : T.strip(t))
      fn(base + e.lower, upper_base + e.upper, e.mult, false);
    base += k[t];
  }
}

}  // namespace detail

/// H(x_A | x rest): every edge incident to A contributes once, with vertical
/// multiplicity; edges inside the complement contribute nothing; self-loops
/// on A contribute U(x_v, x_v) once.
inline double energy(const Triangulation& T, std::span<const VertexRef> region,
                     const SpinConfiguration& config, const PairPotential& U) {
  if (config.dimension() != U.dimension())
    throw std::invalid_argument("energy: potential/config dimension mismatch");
  if (config.vertex_count() != T.vertex_count())
    throw std::invalid_argument("energy: config does not cover the triangulation");
  const FlatIndex idx(T);
  std::vector<std::uint8_t> in_region(idx.size(), 0);
  for (const VertexRef& v : region) {
    if (v.layer >= T.layer_sizes().size() || v.index >= T.layer_size(v.layer))
      throw std::invalid_argument("energy: region vertex out of bounds");
    in_region[idx.flat(v)] = 1;
  }
  double h = 0;
  detail::for_each_edge(T, [&](std::uint64_t a, std::uint64_t b, std::uint32_t mult,
                               bool) {
    if (!in_region[a] && !in_region[b]) return;
    h += mult * U.value(config.site(a), config.site(b));
  });
  return h;
}

/// The unnormalized conditional Gibbs density on M^A given fixed spins on the
/// complement, with a rectangle-rule normalizer for slabs of total dimension
/// |A| * d <= 2 (smooth periodic integrands make the rectangle rule converge
/// spectrally).
class ConditionalDensity {
 public:
  ConditionalDensity(const Triangulation& T, std::vector<VertexRef> region,
                     const SpinConfiguration& boundary, const PairPotential& U)
      : potential_(&U), dim_(U.dimension()), region_(std::move(region)) {
    if (region_.empty())
      throw std::invalid_argument("ConditionalDensity: empty region");
    if (boundary.dimension() != dim_)
      throw std::invalid_argument("ConditionalDensity: dimension mismatch");
    const FlatIndex idx(T);
    std::vector<std::int64_t> slot(idx.size(), -1);
    for (std::size_t a = 0; a < region_.size(); ++a) {
      const std::uint64_t f = idx.flat(region_[a]);
      if (slot[f] != -1)
        throw std::invalid_argument("ConditionalDensity: repeated region vertex");
      slot[f] = static_cast<std::int64_t>(a);
    }
    detail::for_each_edge(T, [&](std::uint64_t a, std::uint64_t b, std::uint32_t mult,
                                 bool is_loop) {
      const std::int64_t sa = slot[a];
      const std::int64_t sb = slot[b];
      if (sa < 0 && sb < 0) return;
      Term term;
      term.mult = mult;
      if (is_loop) {
        term.kind = Term::kLoop;
        term.a = static_cast<std::uint32_t>(sa);
      } else if (sa >= 0 && sb >= 0) {
        term.kind = Term::kInterior;
        term.a = static_cast<std::uint32_t>(sa);
        term.b = static_cast<std::uint32_t>(sb);
      } else {
        term.kind = Term::kBoundary;
        term.a = static_cast<std::uint32_t>(sa >= 0 ? sa : sb);
        const std::uint64_t outside = sa >= 0 ? b : a;
        term.b = static_cast<std::uint32_t>(fixed_.size() / dim_);
        const auto s = boundary.site(outside);
        fixed_.insert(fixed_.end(), s.begin(), s.end());
      }
      terms_.push_back(term);
    });
  }

  std::uint32_t total_dims() const {
    return static_cast<std::uint32_t>(region_.size()) * dim_;
  }

  /// H(values | boundary); `values` holds |A| * d angles, region-major.
  double hamiltonian(std::span<const double> values) const {
    if (values.size() != total_dims())
      throw std::invalid_argument("hamiltonian: wrong number of angles");
    double h = 0;
    for (const Term& t : terms_) {
      const std::span<const double> xa = values.subspan(t.a * dim_, dim_);
      switch (t.kind) {
        case Term::kLoop:
          h += t.mult * potential_->value(xa, xa);
          break;
        case Term::kInterior:
          h += t.mult * potential_->value(xa, values.subspan(t.b * dim_, dim_));
          break;
        case Term::kBoundary:
          h += t.mult * potential_->value(
                            xa, std::span<const double>(fixed_).subspan(t.b * dim_, dim_));
          break;
      }
    }
    return h;
  }

  /// exp(-H(values | boundary)).
  double unnormalized(std::span<const double> values) const {
    return std::exp(-hamiltonian(values));
  }

  /// Integral of the unnormalized density over M^A against Lebesgue measure,
  /// by the rectangle rule with `grid` points per dimension.
  double normalizer(std::uint32_t grid) const {
    const std::uint32_t dims = total_dims();
    if (dims > 2)
      throw std::invalid_argument("normalizer: quadrature supports at most 2 dims");
    if (grid < 2) throw std::invalid_argument("normalizer: grid too coarse");
    const double step = kTwoPi / grid;
    std::vector<double> values(dims, 0.0);
    double total = 0;
    if (dims == 1) {
      for (std::uint32_t i = 0; i < grid; ++i) {
        values[0] = (i + 0.5) * step;
        total += unnormalized(values);
      }
      return total * step;
    }
    for (std::uint32_t i = 0; i < grid; ++i) {
      values[0] = (i + 0.5) * step;
      for (std::uint32_t j = 0; j < grid; ++j) {
        values[1] = (j + 0.5) * step;
        total += unnormalized(values);
      }
    }
    return total * step * step;
  }

 private:
  struct Term {
    enum Kind : std::uint8_t { kLoop, kInterior, kBoundary };
    Kind kind = kLoop;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t mult = 1;
  };

  const PairPotential* potential_;
  std::uint32_t dim_;
  std::vector<VertexRef> region_;
  std::vector<Term> terms_;
  std::vector<double> fixed_;  // boundary angles referenced by kBoundary terms
};

struct SweepStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;

  double acceptance_rate() const {
    return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals)
                     : 0.0;
  }
};

/// Systematic single-site Metropolis over the slab of layers <= update_limit;
/// spins on higher layers are held fixed and act as the boundary condition
/// (update_limit = height means a free boundary). Each site consumes d
/// proposal draws and one acceptance draw per sweep, whichever code path
/// evaluates the energy change.
class MetropolisSampler {
 public:
  MetropolisSampler(const Triangulation& T, const PairPotential& U, double delta,
                    std::uint32_t update_limit)
      : potential_(&U),
        xy_(dynamic_cast<const XyPotential*>(&U)),
        dim_(U.dimension()),
        delta_(delta) {
    if (!(delta > 0)) throw std::invalid_argument("MetropolisSampler: delta > 0");
    if (update_limit > T.height())
      throw std::invalid_argument("MetropolisSampler: update slab exceeds height");
    const FlatIndex idx(T);
    update_count_ = 0;
    for (std::uint32_t t = 0; t <= update_limit; ++t) update_count_ += T.layer_size(t);
    // Multiplicity-weighted neighbor lists over all vertices, loops kept
    // separate: a loop shifts the energy only through U(x, x).
    const std::uint64_t n = idx.size();
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> adj(n);
    has_loop_.assign(n, 0);
    detail::for_each_edge(T, [&](std::uint64_t a, std::uint64_t b, std::uint32_t mult,
                                 bool is_loop) {
      if (is_loop) {
        has_loop_[a] = 1;
        return;
      }
      adj[a].push_back({static_cast<std::uint32_t>(b), mult});
      adj[b].push_back({static_cast<std::uint32_t>(a), mult});
    });
    offsets_.reserve(n + 1);
    offsets_.push_back(0);
    for (std::uint64_t v = 0; v < n; ++v) {
      for (const auto& [w, mult] : adj[v]) {
        nbrs_.push_back(w);
        mults_.push_back(mult);
      }
      offsets_.push_back(nbrs_.size());
    }
  }

  std::uint64_t update_count() const { return update_count_; }

  SweepStats sweep(SpinConfiguration& config, Xoshiro256pp& rng) const {
    if (config.dimension() != dim_)
      throw std::invalid_argument("sweep: config dimension mismatch");
    if (config.vertex_count() + 1 != offsets_.size())
      throw std::invalid_argument("sweep: config does not cover the triangulation");
    return xy_ ? sweep_xy(config, rng) : sweep_generic(config, rng);
  }

 private:
  SweepStats sweep_generic(SpinConfiguration& config, Xoshiro256pp& rng) const {
    SweepStats stats;
    std::vector<double> proposal(dim_);
    for (std::uint64_t v = 0; v < update_count_; ++v) {
      const auto x = config.site(v);
      for (std::uint32_t i = 0; i < dim_; ++i)
        proposal[i] = wrap_angle(x[i] + uniform_symmetric(rng, delta_));
      double dh = 0;
      for (std::uint64_t e = offsets_[v]; e < offsets_[v + 1]; ++e) {
        const auto w = config.site(nbrs_[e]);
        dh += mults_[e] * (potential_->value(proposal, w) - potential_->value(x, w));
      }
      if (has_loop_[v])
        dh += potential_->value(proposal, proposal) - potential_->value(x, x);
      const double u = uniform01(rng);
      ++stats.proposals;
      if (dh <= 0 || u < std::exp(-dh)) {
        ++stats.accepted;
        for (std::uint32_t i = 0; i < dim_; ++i) config.set_angle(v, i, proposal[i]);
      }
    }
    return stats;
  }

  /// Planar-rotor fast path: with U = -sum_i beta_i cos(x_i - y_i), the energy
  /// change against fixed neighbors needs only the neighbor cos/sin sums:
  /// dH = -sum_i beta_i [ (cos x'_i - cos x_i) C_i + (sin x'_i - sin x_i) S_i ].
  /// Caches of cos/sin per site are rebuilt per sweep and patched on accept.
  SweepStats sweep_xy(SpinConfiguration& config, Xoshiro256pp& rng) const {
    SweepStats stats;
    const std::uint64_t n = config.vertex_count();
    cos_cache_.resize(n * dim_);
    sin_cache_.resize(n * dim_);
    for (std::uint64_t v = 0; v < n; ++v) {
      const auto x = config.site(v);
      for (std::uint32_t i = 0; i < dim_; ++i) {
        cos_cache_[v * dim_ + i] = std::cos(x[i]);
        sin_cache_[v * dim_ + i] = std::sin(x[i]);
      }
    }
    const std::vector<double>& beta = xy_->beta();
    std::vector<double> proposal(dim_), cos_p(dim_), sin_p(dim_);
    for (std::uint64_t v = 0; v < update_count_; ++v) {
      const auto x = config.site(v);
      for (std::uint32_t i = 0; i < dim_; ++i) {
        proposal[i] = wrap_angle(x[i] + uniform_symmetric(rng, delta_));
        cos_p[i] = std::cos(proposal[i]);
        sin_p[i] = std::sin(proposal[i]);
      }
      double dh = 0;
      for (std::uint32_t i = 0; i < dim_; ++i) {
        double c = 0, s = 0;
        for (std::uint64_t e = offsets_[v]; e < offsets_[v + 1]; ++e) {
          const std::uint64_t w = nbrs_[e];
          c += mults_[e] * cos_cache_[w * dim_ + i];
          s += mults_[e] * sin_cache_[w * dim_ + i];
        }
        dh -= beta[i] * ((cos_p[i] - cos_cache_[v * dim_ + i]) * c +
                         (sin_p[i] - sin_cache_[v * dim_ + i]) * s);
      }
      const double u = uniform01(rng);
      ++stats.proposals;
      if (dh <= 0 || u < std::exp(-dh)) {
        ++stats.accepted;
        for (std::uint32_t i = 0; i < dim_; ++i) {
          config.set_angle(v, i, proposal[i]);
          cos_cache_[v * dim_ + i] = cos_p[i];
          sin_cache_[v * dim_ + i] = sin_p[i];
        }
      }
    }
    return stats;
  }

  const PairPotential* potential_;
  const XyPotential* xy_;
  std::uint32_t dim_;
  double delta_;
  std::uint64_t update_count_ = 0;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> nbrs_;
  std::vector<std::uint32_t> mults_;
  std::vector<std::uint8_t> has_loop_;
  mutable std::vector<double> cos_cache_;
  mutable std::vector<double> sin_cache_;
};

/// Collective companion to the site sweep: for each dyadic layer cut
/// 2, 4, 8, ... up to update_limit and each torus coordinate, proposes one
/// uniform-symmetric angle added to that coordinate of every spin strictly
/// below the cut. Shift invariance of the pair potential cancels every term
/// between two rotated spins, so the energy change lives entirely on the
/// edges crossing the cut and one accepted move turns the whole inner
/// section at once. Site proposals alone leave that section phase diffusing
/// vertex by vertex, which on deep cylinders takes far more sweeps than any
/// reasonable budget. Proposal widths shrink with the cut's edge weight so
/// wide cuts keep a useful acceptance rate.
class SectionRotationSampler {
 public:
  SectionRotationSampler(const Triangulation& T, const PairPotential& U,
                         double delta, std::uint32_t update_limit)
      : potential_(&U), dim_(U.dimension()) {
    if (!(delta > 0))
      throw std::invalid_argument("SectionRotationSampler: delta > 0");
    if (update_limit > T.height())
      throw std::invalid_argument(
          "SectionRotationSampler: update slab exceeds height");
    const FlatIndex idx(T);
    for (std::uint32_t t = 2; t <= update_limit; t *= 2) {
      Cut cut;
      cut.first_outside = idx.flat(VertexRef{t, 0});
      std::uint64_t weight = 0;
      detail::for_each_edge(T, [&](std::uint64_t a, std::uint64_t b,
                                   std::uint32_t mult, bool is_loop) {
        if (is_loop) return;  // loops never cross a cut
        const bool a_in = a < cut.first_outside;
        if (a_in == (b < cut.first_outside)) return;
        cut.edges.push_back({a_in ? a : b, a_in ? b : a, mult});
        weight += mult;
      });
      cut.width = delta / std::sqrt(1.0 + static_cast<double>(weight));
      cuts_.push_back(std::move(cut));
    }
  }

  std::size_t cut_count() const { return cuts_.size(); }

  SweepStats sweep(SpinConfiguration& config, Xoshiro256pp& rng) const {
    if (config.dimension() != dim_)
      throw std::invalid_argument("rotation sweep: config dimension mismatch");
    SweepStats stats;
    std::vector<double> shifted(dim_);
    for (const Cut& cut : cuts_) {
      for (std::uint32_t i = 0; i < dim_; ++i) {
        const double gamma = uniform_symmetric(rng, cut.width);
        double dh = 0;
        for (const CutEdge& e : cut.edges) {
          const auto x = config.site(e.inside);
          const auto y = config.site(e.outside);
          std::copy(x.begin(), x.end(), shifted.begin());
          shifted[i] = wrap_angle(shifted[i] + gamma);
          dh += e.mult * (potential_->value(shifted, y) - potential_->value(x, y));
        }
        const double u = uniform01(rng);
        ++stats.proposals;
        if (dh <= 0 || u < std::exp(-dh)) {
          ++stats.accepted;
          for (std::uint64_t v = 0; v < cut.first_outside; ++v)
            config.set_angle(v, i, wrap_angle(config.angle(v, i) + gamma));
        }
      }
    }
    return stats;
  }

 private:
  struct CutEdge {
    std::uint64_t inside = 0;
    std::uint64_t outside = 0;
    std::uint32_t mult = 1;
  };
  struct Cut {
    std::uint64_t first_outside = 0;
    double width = 0;
    std::vector<CutEdge> edges;
  };

  const PairPotential* potential_;
  std::uint32_t dim_;
  std::vector<Cut> cuts_;
};

/// Order parameter: per torus coordinate, the mean of (cos, sin) over the
/// region; modulus is the root-mean-square length of those per-coordinate
/// mean vectors, in [0, 1] and invariant under any global group action.
struct Magnetization {
  std::vector<double> components;  // [cos_0, sin_0, cos_1, sin_1, ...]
  double modulus = 0;
};

inline Magnetization magnetization(const Triangulation& T,
                                   const SpinConfiguration& config,
                                   std::span<const VertexRef> region) {
  if (region.empty()) throw std::invalid_argument("magnetization: empty region");
  const FlatIndex idx(T);
  const std::uint32_t d = config.dimension();
  Magnetization m;
  m.components.assign(2 * d, 0.0);
  for (const VertexRef& v : region) {
    const std::uint64_t f = idx.flat(v);
    for (std::uint32_t i = 0; i < d; ++i) {
      const double a = config.angle(f, i);
      m.components[2 * i] += std::cos(a);
      m.components[2 * i + 1] += std::sin(a);
    }
  }
  const double inv = 1.0 / static_cast<double>(region.size());
  double sumsq = 0;
  for (std::uint32_t i = 0; i < d; ++i) {
    m.components[2 * i] *= inv;
    m.components[2 * i + 1] *= inv;
    sumsq += m.components[2 * i] * m.components[2 * i] +
             m.components[2 * i + 1] * m.components[2 * i + 1];
  }
  m.modulus = std::sqrt(sumsq / d);
  return m;
}

/// Observable log of a sampling run: one table row per recorded sweep with
/// the sweep index, the configuration's total energy, and each watched
/// region's magnetization (cos/sin components per torus coordinate, then the
/// modulus). The column schema is fixed at construction and written on the
/// saved table's `# columns` line, so trace files are self-describing:
///   sweep energy <region>_cos0 <region>_sin0 ... <region>_modulus ...
class SpinTrace {
 public:
  struct Region {
    std::string name;  // single token, becomes the column prefix
    std::vector<VertexRef> vertices;
  };

  SpinTrace(const Triangulation& T, const PairPotential& U, std::vector<Region> regions)
      : tri_(&T), potential_(&U), regions_(std::move(regions)) {
    if (regions_.empty()) throw std::invalid_argument("SpinTrace: no regions");
    const std::uint32_t d = U.dimension();
    std::vector<std::string> columns = {"sweep", "energy"};
    for (const Region& region : regions_) {
      detail::require_token(region.name, "region name");
      if (region.vertices.empty())
        throw std::invalid_argument("SpinTrace: empty region '" + region.name + "'");
      for (std::uint32_t i = 0; i < d; ++i) {
        columns.push_back(region.name + "_cos" + std::to_string(i));
        columns.push_back(region.name + "_sin" + std::to_string(i));
      }
      columns.push_back(region.name + "_modulus");
    }
    all_.reserve(T.vertex_count());
    for (std::uint32_t t = 0; t < T.layer_sizes().size(); ++t)
      for (std::uint32_t i = 0; i < T.layer_size(t); ++i) all_.push_back(VertexRef{t, i});
    table_ = Table("spin_trace", std::move(columns));
    table_.set_meta("potential", U.descriptor());
    table_.set_meta("dimension", std::to_string(d));
  }

  void record(std::uint64_t sweep, const SpinConfiguration& config) {
    std::vector<std::string> row;
    row.reserve(table_.columns.size());
    row.push_back(std::to_string(sweep));
    row.push_back(format_double(energy(*tri_, all_, config, *potential_)));
    for (const Region& region : regions_) {
      const Magnetization m = magnetization(*tri_, config, region.vertices);
      for (const double c : m.components) row.push_back(format_double(c));
      row.push_back(format_double(m.modulus));
    }
    table_.add_row(std::move(row));
  }

  const Table& table() const { return table_; }

 private:
  const Triangulation* tri_;
  const PairPotential* potential_;
  std::vector<Region> regions_;
  std::vector<VertexRef> all_;  // whole-graph region for the energy column
  Table table_;
};

}  // namespace ltspin
