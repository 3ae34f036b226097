#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ltspin/textio.hpp"
#include "ltspin/tree.hpp"

namespace ltspin {

/// Canonical name of a triangulation vertex: position `index` on circle
/// `layer` (0-based, cyclic order).
struct VertexRef {
  std::uint32_t layer = 0;
  std::uint32_t index = 0;

  friend bool operator==(const VertexRef&, const VertexRef&) = default;
};

/// One vertical edge record: (t, lower) -- (t+1, upper) with multiplicity.
struct EdgeRec {
  std::uint32_t lower = 0;
  std::uint32_t upper = 0;
  std::uint32_t mult = 1;

  friend bool operator==(const EdgeRec&, const EdgeRec&) = default;
};

struct TriangulationMeta {
  std::string law_name = "custom";
  std::uint64_t seed = 0;
};

struct ValidationReport {
  bool ok = true;
  std::string first_violation;                 // empty when ok
  std::vector<std::uint64_t> strip_triangles;  // per-strip face counts
};

namespace detail {
/// Per lower vertex of a strip: the contiguous cyclic arc of its up-neighbors
/// in the layer above. `leftmost` is the cyclic position of the extra upward
/// edge; positions leftmost+1 .. leftmost+count-1 (mod k) are the children.
struct Arc {
  std::uint32_t leftmost = 0;
  std::uint32_t count = 0;  // total upward degree including the leftmost edge
};
}  // namespace detail

/// Layered multigraph on the cylinder: k_t vertices on circle t, the k_t
/// cyclic horizontal edges per circle (a single self-loop when k_t = 1), and
/// per-strip vertical edges stored with multiplicity in canonical
/// (lower, upper) order. The distinguished root face is the down-triangle on
/// the layer-0 loop with apex (1, 0).
class Triangulation {
 public:
  Triangulation(std::vector<std::uint64_t> layer_sizes,
                std::vector<std::vector<EdgeRec>> strips)
      : layer_sizes_(std::move(layer_sizes)), strips_(std::move(strips)) {
    if (layer_sizes_.empty())
      throw std::invalid_argument("Triangulation: no layers");
    if (strips_.size() + 1 != layer_sizes_.size())
      throw std::invalid_argument("Triangulation: strip count must be layers-1");
    for (auto& strip : strips_) canonicalize_strip(strip);
  }

  std::uint32_t height() const {
    return static_cast<std::uint32_t>(layer_sizes_.size() - 1);
  }
  const std::vector<std::uint64_t>& layer_sizes() const { return layer_sizes_; }
  std::uint64_t layer_size(std::uint32_t t) const { return layer_sizes_[t]; }

  /// Vertical edges of strip t (between circles t and t+1), canonical order.
  const std::vector<EdgeRec>& strip(std::uint32_t t) const { return strips_[t]; }

  /// E_{t,t+1}: vertical edges counted with multiplicity.
  std::uint64_t vertical_edge_count(std::uint32_t t) const {
    std::uint64_t e = 0;
    for (const EdgeRec& rec : strips_[t]) e += rec.mult;
    return e;
  }

  std::uint64_t vertex_count() const {
    std::uint64_t n = 0;
    for (std::uint64_t k : layer_sizes_) n += k;
    return n;
  }

  /// Root face (x, y, z): x and y coincide on the layer-0 loop.
  std::array<VertexRef, 3> root_face() const {
    return {VertexRef{0, 0}, VertexRef{0, 0}, VertexRef{1, 0}};
  }

  TriangulationMeta& meta() { return meta_; }
  const TriangulationMeta& meta() const { return meta_; }

 private:
  static void canonicalize_strip(std::vector<EdgeRec>& strip) {
    std::sort(strip.begin(), strip.end(), [](const EdgeRec& a, const EdgeRec& b) {
      return a.lower != b.lower ? a.lower < b.lower : a.upper < b.upper;
    });
    std::vector<EdgeRec> merged;
    for (const EdgeRec& rec : strip) {
      if (rec.mult == 0) continue;
      if (!merged.empty() && merged.back().lower == rec.lower &&
          merged.back().upper == rec.upper) {
        merged.back().mult += rec.mult;
      } else {
        merged.push_back(rec);
      }
    }
    strip = std::move(merged);
  }

  std::vector<std::uint64_t> layer_sizes_;
  std::vector<std::vector<EdgeRec>> strips_;
  TriangulationMeta meta_;
};

namespace detail {

/// Reconstructs the per-vertex arcs of one strip from its raw edge multiset,
/// or explains why the strip is not a valid triangulation strip. On success
/// the arcs chain around the circle: rightmost(i) == leftmost(i+1), and the
/// child segments partition circle t+1.
inline bool analyze_strip(std::uint64_t t, std::uint64_t k_low, std::uint64_t k_up,
                          const std::vector<EdgeRec>& strip, std::vector<Arc>& arcs,
                          std::string& error) {
  const auto fail = [&](const std::string& what) {
    error = "strip " + std::to_string(t) + ": arc contiguity violated (" + what + ")";
    return false;
  };
  // Group the canonical (sorted) edge list by lower vertex.
  std::vector<std::pair<std::size_t, std::size_t>> groups(k_low, {0, 0});
  for (std::size_t e = 0; e < strip.size();) {
    const std::uint32_t lower = strip[e].lower;
    if (lower >= k_low) return fail("lower index out of range");
    std::size_t e2 = e;
    while (e2 < strip.size() && strip[e2].lower == lower) {
      if (strip[e2].upper >= k_up) return fail("upper index out of range");
      ++e2;
    }
    groups[lower] = {e, e2};
    e = e2;
  }

  arcs.assign(k_low, Arc{});
  constexpr std::uint32_t kUnknown = 0xffffffffu;
  std::vector<std::uint32_t> leftmost(k_low, kUnknown);
  std::uint64_t coverage = 0;  // sum of child-segment lengths
  for (std::uint64_t i = 0; i < k_low; ++i) {
    const auto [e0, e1] = groups[i];
    std::uint64_t m = 0;
    for (std::size_t e = e0; e < e1; ++e) m += strip[e].mult;
    if (m == 0) return fail("vertex " + std::to_string(i) + " has no upward edges");
    if (m > k_up + 1)
      return fail("vertex " + std::to_string(i) + " has more upward edges than fit one wrap");
    arcs[i].count = static_cast<std::uint32_t>(m);
    coverage += m - 1;
    if (m == k_up + 1) {
      // Full wrap: every position once plus the leftmost position twice.
      if (e1 - e0 != k_up) return fail("wrapped arc must cover every position");
      std::uint32_t doubled = kUnknown;
      for (std::size_t e = e0; e < e1; ++e) {
        if (strip[e].mult == 2 && doubled == kUnknown) doubled = strip[e].upper;
        else if (strip[e].mult != 1) return fail("wrapped arc multiplicities must be 1+1 doubling");
      }
      if (doubled == kUnknown) return fail("wrapped arc lacks its doubled position");
      leftmost[i] = doubled;
    } else if (m == k_up) {
      // Covers the circle exactly once: any rotation fits; pinned by the chain.
      if (e1 - e0 != k_up) return fail("full-circle arc must cover every position once");
      for (std::size_t e = e0; e < e1; ++e)
        if (strip[e].mult != 1) return fail("full-circle arc has a repeated position");
    } else {
      // Proper arc: distinct consecutive positions with exactly one cyclic gap.
      if (e1 - e0 != m) return fail("repeated up-neighbor without a full wrap");
      std::uint32_t gaps = 0;
      std::uint32_t after_gap = kUnknown;
      for (std::size_t e = e0; e < e1; ++e) {
        if (strip[e].mult != 1) return fail("repeated up-neighbor without a full wrap");
        const std::uint32_t cur = strip[e].upper;
        const std::uint32_t prev =
            e == e0 ? strip[e1 - 1].upper : strip[e - 1].upper;  // cyclic predecessor
        const std::uint64_t step = (cur + k_up - prev) % k_up;
        if (step != 1) {
          ++gaps;
          after_gap = cur;
        }
      }
      if (gaps != 1)
        return fail("up-neighbors of vertex " + std::to_string(i) + " are not one arc");
      leftmost[i] = after_gap;
    }
  }
  if (coverage != k_up)
    return fail("child segments cover circle " + std::to_string(t + 1) + " " +
                std::to_string(coverage) + " times, expected " + std::to_string(k_up));

  // Chain the arcs: leftmost(i+1) = leftmost(i) + count(i) - 1 (mod k_up).
  std::uint64_t anchor = 0;
  while (anchor < k_low && leftmost[anchor] == kUnknown) ++anchor;
  if (anchor == k_low) {
    anchor = 0;
    leftmost[0] = 0;  // every rotation is consistent; pick the canonical one
  }
  for (std::uint64_t step = 0; step < k_low; ++step) {
    const std::uint64_t i = (anchor + step) % k_low;
    const std::uint64_t next = (i + 1) % k_low;
    const std::uint32_t expect = static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(leftmost[i]) + arcs[i].count - 1) % k_up);
    if (leftmost[next] == kUnknown) {
      leftmost[next] = expect;
    } else if (leftmost[next] != expect && !(step + 1 == k_low)) {
      return fail("consecutive arcs do not share an endpoint at vertex " +
                  std::to_string(next));
    } else if (step + 1 == k_low && leftmost[anchor] != expect) {
      return fail("arc chain does not close around the circle");
    }
  }
  for (std::uint64_t i = 0; i < k_low; ++i) arcs[i].leftmost = leftmost[i];
  return true;
}

}  // namespace detail

/// Checks the structural invariants: k_0 = 1 and positive layers, contiguous
/// shared arcs per strip, edge counts E_{t,t+1} = k_t + k_{t+1}, and per-strip
/// face counts. The report carries the first violation instead of throwing.
inline ValidationReport validate(const Triangulation& T) {
  ValidationReport report;
  const auto& k = T.layer_sizes();
  if (k[0] != 1) {
    report.ok = false;
    report.first_violation = "layer 0 must have exactly one vertex";
    return report;
  }
  for (std::size_t t = 0; t < k.size(); ++t) {
    if (k[t] < 1) {
      report.ok = false;
      report.first_violation = "layer " + std::to_string(t) + " is empty";
      return report;
    }
  }
  for (std::uint32_t t = 0; t < T.height(); ++t) {
    std::vector<detail::Arc> arcs;
    std::string error;
    if (!detail::analyze_strip(t, k[t], k[t + 1], T.strip(t), arcs, error)) {
      report.ok = false;
      report.first_violation = error;
      return report;
    }
    // Faces of strip t: one apex-up triangle per child segment slot and one
    // apex-down triangle per shared arc endpoint.
    std::uint64_t up_triangles = 0;
    for (const detail::Arc& a : arcs) up_triangles += a.count - 1;
    report.strip_triangles.push_back(up_triangles + k[t]);
    if (T.vertical_edge_count(t) != k[t] + k[t + 1]) {
      report.ok = false;
      report.first_violation = "strip " + std::to_string(t) +
                               ": vertical edge count != k_t + k_{t+1}";
      return report;
    }
  }
  return report;
}

/// Tree-to-triangulation direction of the parametrization: children of the
/// layer-t vertices occupy consecutive positions on circle t+1 in planar
/// order, and each vertex gains one extra "leftmost" upward edge to the
/// cyclic predecessor of its first child position.
inline Triangulation tree_to_lt(const LayeredTree& tree) {
  std::vector<std::uint64_t> k = tree.layer_sizes();
  std::vector<std::vector<EdgeRec>> strips(k.size() - 1);
  for (std::uint32_t t = 0; t + 1 < k.size(); ++t) {
    const std::uint64_t k_up = k[t + 1];
    auto& strip = strips[t];
    strip.reserve(static_cast<std::size_t>(k[t] + k_up));
    std::uint64_t start = 0;  // next free child position on circle t+1
    for (std::uint32_t i = 0; i < k[t]; ++i) {
      const TreeVertex& v = tree.vertex(tree.layer(t)[i]);
      const auto leftmost = static_cast<std::uint32_t>((start + k_up - 1) % k_up);
      strip.push_back(EdgeRec{i, leftmost, 1});
      for (std::size_t j = 0; j < v.children.size(); ++j)
        strip.push_back(EdgeRec{i, static_cast<std::uint32_t>(start + j), 1});
      start += v.children.size();
    }
  }
  Triangulation T(std::move(k), std::move(strips));
  T.meta().law_name = tree.meta().law_name;
  T.meta().seed = tree.meta().seed;
  return T;
}

/// Triangulation-to-tree direction: drop every vertex's leftmost upward edge
/// and all horizontal edges; what remains is the spanning tree in which
/// vertex (t, i) keeps its arc's child segment. Rejects invalid input.
inline LayeredTree lt_to_tree(const Triangulation& T) {
  const auto& k = T.layer_sizes();
  if (k[0] != 1) throw std::invalid_argument("lt_to_tree: layer 0 must be one vertex");
  std::vector<std::uint64_t> counts;
  counts.reserve(T.vertex_count());
  for (std::uint32_t t = 0; t < T.height(); ++t) {
    std::vector<detail::Arc> arcs;
    std::string error;
    if (!detail::analyze_strip(t, k[t], k[t + 1], T.strip(t), arcs, error))
      throw std::invalid_argument("lt_to_tree: " + error);
    for (const detail::Arc& a : arcs) counts.push_back(a.count - 1);
  }
  for (std::uint64_t i = 0; i < k.back(); ++i) counts.push_back(0);
  LayeredTree tree = LayeredTree::from_bfs_child_counts(counts);
  tree.meta().law_name = T.meta().law_name;
  tree.meta().seed = T.meta().seed;
  return tree;
}

/// All vertices with layer <= r (the slab T_r).
inline std::vector<VertexRef> slab(const Triangulation& T, std::uint32_t r) {
  if (r > T.height()) throw std::invalid_argument("slab: r exceeds height");
  std::vector<VertexRef> out;
  for (std::uint32_t t = 0; t <= r; ++t)
    for (std::uint64_t i = 0; i < T.layer_size(t); ++i)
      out.push_back(VertexRef{t, static_cast<std::uint32_t>(i)});
  return out;
}

/// Flat numbering of triangulation vertices: layer-major, then cyclic index.
class FlatIndex {
 public:
  explicit FlatIndex(const Triangulation& T) {
    offsets_.reserve(T.layer_sizes().size() + 1);
    offsets_.push_back(0);
    for (std::uint64_t k : T.layer_sizes()) offsets_.push_back(offsets_.back() + k);
  }

  std::uint64_t size() const { return offsets_.back(); }
  std::uint64_t flat(VertexRef v) const { return offsets_[v.layer] + v.index; }
  VertexRef unflat(std::uint64_t f) const {
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), f);
    const auto layer = static_cast<std::uint32_t>(it - offsets_.begin() - 1);
    return VertexRef{layer, static_cast<std::uint32_t>(f - offsets_[layer])};
  }

 private:
  std::vector<std::uint64_t> offsets_;
};

/// Compressed adjacency over flat vertex ids for distance queries: parallel
/// edges deduplicated and self-loops dropped (neither affects path lengths).
struct AdjacencyCsr {
  std::vector<std::uint64_t> offsets;
  std::vector<std::uint32_t> nbrs;

  std::span<const std::uint32_t> neighbors(std::uint64_t v) const {
    return {nbrs.data() + offsets[v], nbrs.data() + offsets[v + 1]};
  }
};

inline AdjacencyCsr build_adjacency(const Triangulation& T) {
  const FlatIndex idx(T);
  const std::uint64_t n = idx.size();
  std::vector<std::vector<std::uint32_t>> adj(n);
  const auto& k = T.layer_sizes();
  std::uint64_t base = 0;
  for (std::uint32_t t = 0; t < k.size(); ++t) {
    if (k[t] >= 2) {
      for (std::uint64_t i = 0; i < k[t]; ++i) {
        const std::uint64_t j = (i + 1) % k[t];
        adj[base + i].push_back(static_cast<std::uint32_t>(base + j));
        adj[base + j].push_back(static_cast<std::uint32_t>(base + i));
      }
    }
    base += k[t];
  }
  base = 0;
  for (std::uint32_t t = 0; t < T.height(); ++t) {
    const std::uint64_t upper_base = base + k[t];
    for (const EdgeRec& e : T.strip(t)) {
      adj[base + e.lower].push_back(static_cast<std::uint32_t>(upper_base + e.upper));
      adj[upper_base + e.upper].push_back(static_cast<std::uint32_t>(base + e.lower));
    }
    base += k[t];
  }
  AdjacencyCsr csr;
  csr.offsets.reserve(n + 1);
  csr.offsets.push_back(0);
  for (std::uint64_t v = 0; v < n; ++v) {
    auto& list = adj[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    csr.nbrs.insert(csr.nbrs.end(), list.begin(), list.end());
    csr.offsets.push_back(csr.nbrs.size());
  }
  return csr;
}

/// Breadth-first distances from `source` over the whole graph; -1 marks
/// unreachable vertices (cannot occur on valid triangulations).
inline void bfs_distances(const AdjacencyCsr& csr, std::uint64_t source,
                          std::vector<std::int32_t>& dist) {
  const std::uint64_t n = csr.offsets.size() - 1;
  dist.assign(n, -1);
  std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(source)};
  std::vector<std::uint32_t> next;
  dist[source] = 0;
  std::int32_t d = 0;
  while (!frontier.empty()) {
    ++d;
    next.clear();
    for (const std::uint32_t v : frontier) {
      for (const std::uint32_t w : csr.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = d;
          next.push_back(w);
        }
      }
    }
    frontier.swap(next);
  }
}

/// Shortest path length in the multigraph (multiplicity-blind, loops ignored).
inline std::uint64_t graph_distance(const Triangulation& T, VertexRef v, VertexRef w) {
  const auto& k = T.layer_sizes();
  if (v.layer >= k.size() || v.index >= k[v.layer] || w.layer >= k.size() ||
      w.index >= k[w.layer])
    throw std::invalid_argument("graph_distance: vertex out of bounds");
  if (v == w) return 0;
  const FlatIndex idx(T);
  const AdjacencyCsr csr = build_adjacency(T);
  std::vector<std::int32_t> dist;
  bfs_distances(csr, idx.flat(v), dist);
  const std::int32_t d = dist[idx.flat(w)];
  if (d < 0) throw std::runtime_error("graph_distance: disconnected triangulation");
  return static_cast<std::uint64_t>(d);
}

/// Persistence: header `# triangulation height=<N> seed=<u64> law=<name>
/// layers=<k0,...,kN>` then one line `t i j mult` per distinct vertical edge
/// in canonical order. Horizontal edges are implicit in the layer sizes.
inline void save_triangulation(const Triangulation& T, std::ostream& os) {
  os << "# triangulation height=" << T.height() << " seed=" << T.meta().seed
     << " law=" << T.meta().law_name << " layers=";
  const auto& k = T.layer_sizes();
  for (std::size_t t = 0; t < k.size(); ++t) os << (t ? "," : "") << k[t];
  os << "\n";
  for (std::uint32_t t = 0; t < T.height(); ++t)
    for (const EdgeRec& e : T.strip(t))
      os << t << ' ' << e.lower << ' ' << e.upper << ' ' << e.mult << "\n";
}

/// When `report_out` is non-null the structural check result is written
/// there instead of being thrown, so callers can separate "file is
/// malformed" from "file encodes an inconsistent triangulation".
inline Triangulation load_triangulation(std::istream& is,
                                        ValidationReport* report_out = nullptr) {
  std::string header;
  if (!std::getline(is, header) || !header.starts_with("# triangulation "))
    throw std::runtime_error("load_triangulation: missing header");
  std::vector<std::uint64_t> layers;
  TriangulationMeta meta;
  std::uint32_t expect_height = 0;
  bool have_layers = false;
  for (const auto tok : split_ws(std::string_view(header).substr(16))) {
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("load_triangulation: malformed header token");
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "height") expect_height = static_cast<std::uint32_t>(parse_u64(val));
    else if (key == "seed") meta.seed = parse_u64(val);
    else if (key == "law") meta.law_name = std::string(val);
    else if (key == "layers") {
      for (const auto item : split(val, ',')) layers.push_back(parse_u64(item));
      have_layers = true;
    } else {
      throw std::runtime_error("load_triangulation: unknown header key");
    }
  }
  if (!have_layers || layers.empty())
    throw std::runtime_error("load_triangulation: missing layer sizes");
  if (layers.size() != static_cast<std::size_t>(expect_height) + 1)
    throw std::runtime_error("load_triangulation: header height mismatch");
  std::vector<std::vector<EdgeRec>> strips(layers.size() - 1);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto tok = split_ws(line);
    if (tok.size() != 4)
      throw std::runtime_error("load_triangulation: malformed edge line");
    const std::uint64_t t = parse_u64(tok[0]);
    if (t + 1 >= layers.size())
      throw std::runtime_error("load_triangulation: strip index out of range");
    strips[t].push_back(EdgeRec{static_cast<std::uint32_t>(parse_u64(tok[1])),
                                static_cast<std::uint32_t>(parse_u64(tok[2])),
                                static_cast<std::uint32_t>(parse_u64(tok[3]))});
  }
  Triangulation T(std::move(layers), std::move(strips));
  T.meta() = meta;
  const ValidationReport report = validate(T);
  if (report_out != nullptr)
    *report_out = report;
  else if (!report.ok)
    throw std::runtime_error("load_triangulation: " + report.first_violation);
  return T;
}

}  // namespace ltspin
