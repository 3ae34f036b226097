#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ltspin/offspring.hpp"
#include "ltspin/rng.hpp"
#include "ltspin/textio.hpp"

namespace ltspin {

struct TreeMeta {
  std::string law_name = "custom";
  std::string law_params = "-";
  std::uint64_t seed = 0;
};

struct TreeVertex {
  std::int64_t parent = -1;  // -1 for the root
  std::uint32_t height = 0;
  std::uint32_t child_rank = 0;  // position within the parent's child list
  bool on_spine = false;
  std::vector<std::uint64_t> children;  // ordered (planar embedding)
};

/// Ordered rooted tree with per-vertex heights. Vertex ids are assigned in
/// breadth-first creation order: sorted by height, and within a height by
/// planar position (concatenation of parents' child lists). That id order is
/// also the per-vertex RNG stream index used by the samplers, so samples are
/// reproducible independent of traversal order.
class LayeredTree {
 public:
  LayeredTree() { add_root(); }

  /// Rebuilds a tree from child counts listed in breadth-first order.
  static LayeredTree from_bfs_child_counts(std::span<const std::uint64_t> counts) {
    if (counts.empty())
      throw std::invalid_argument("from_bfs_child_counts: no vertices");
    LayeredTree tree;
    for (std::uint64_t id = 0; id < counts.size(); ++id) {
      if (id >= tree.size())
        throw std::invalid_argument(
            "from_bfs_child_counts: counts outrun the vertices they create");
      for (std::uint64_t j = 0; j < counts[id]; ++j) tree.add_child(id);
    }
    if (tree.size() != counts.size())
      throw std::invalid_argument(
          "from_bfs_child_counts: count list shorter than the tree it creates");
    return tree;
  }

  std::uint64_t size() const { return vertices_.size(); }
  std::uint32_t height() const { return static_cast<std::uint32_t>(layers_.size() - 1); }
  bool has_spine() const { return has_spine_; }

  const TreeVertex& vertex(std::uint64_t id) const { return vertices_[id]; }

  /// Vertex ids at height t in planar order.
  const std::vector<std::uint64_t>& layer(std::uint32_t t) const { return layers_[t]; }

  std::vector<std::uint64_t> layer_sizes() const {
    std::vector<std::uint64_t> k(layers_.size());
    for (std::size_t t = 0; t < layers_.size(); ++t) k[t] = layers_[t].size();
    return k;
  }

  TreeMeta& meta() { return meta_; }
  const TreeMeta& meta() const { return meta_; }

  // -- construction interface (samplers and loaders) --

  std::uint64_t add_child(std::uint64_t parent_id, bool on_spine = false) {
    if (parent_id >= vertices_.size())
      throw std::invalid_argument("add_child: no such parent");
    TreeVertex v;
    v.parent = static_cast<std::int64_t>(parent_id);
    v.height = vertices_[parent_id].height + 1;
    v.child_rank = static_cast<std::uint32_t>(vertices_[parent_id].children.size());
    v.on_spine = on_spine;
    const std::uint64_t id = vertices_.size();
    const std::uint32_t h = v.height;
    // Breadth-first id discipline: a child may only be appended while its
    // parent's layer is still the deepest or the one being extended.
    if (h + 1 < layers_.size())
      throw std::logic_error("add_child: breadth-first creation order violated");
    vertices_[parent_id].children.push_back(id);
    vertices_.push_back(std::move(v));
    if (h >= layers_.size()) layers_.emplace_back();
    layers_[h].push_back(id);
    if (on_spine) has_spine_ = true;
    return id;
  }

  void mark_spine(std::uint64_t id) {
    vertices_[id].on_spine = true;
    has_spine_ = true;
  }

 private:
  void add_root() {
    vertices_.push_back(TreeVertex{});
    layers_.push_back({0});
  }

  std::vector<TreeVertex> vertices_;
  std::vector<std::vector<std::uint64_t>> layers_;
  bool has_spine_ = false;
  TreeMeta meta_;
};

inline std::vector<std::uint64_t> layer_sizes(const LayeredTree& tree) {
  return tree.layer_sizes();
}

/// Structural equality: same shape, heights, and child order (ids align
/// because both trees carry breadth-first ids). Spine marks and metadata are
/// not compared.
inline bool same_shape(const LayeredTree& a, const LayeredTree& b) {
  if (a.size() != b.size()) return false;
  for (std::uint64_t id = 0; id < a.size(); ++id) {
    const TreeVertex& va = a.vertex(id);
    const TreeVertex& vb = b.vertex(id);
    if (va.parent != vb.parent || va.height != vb.height ||
        va.child_rank != vb.child_rank || va.children != vb.children)
      return false;
  }
  return true;
}

/// Critical Galton-Watson tree: every vertex below max_height draws its child
/// count independently; extinction early is a valid outcome. Vertex id is the
/// RNG stream index.
inline LayeredTree sample_gw_tree(const OffspringLaw& law, std::uint32_t max_height,
                                  std::uint64_t seed) {
  LayeredTree tree;
  tree.meta().law_name = law.name();
  tree.meta().seed = seed;
  for (std::uint64_t id = 0; id < tree.size(); ++id) {
    if (tree.vertex(id).height >= max_height) continue;
    Xoshiro256pp rng(derive_seed(seed, id));
    const std::uint64_t c = law.sample(rng);
    for (std::uint64_t j = 0; j < c; ++j) tree.add_child(id);
  }
  return tree;
}

/// Spine-conditioned tree of exact height N: spine vertices s_0..s_{N-1}
/// reproduce by the size-biased law, one uniformly chosen child continues the
/// spine, and every other child roots an independent critical tree truncated
/// at absolute height N.
inline LayeredTree sample_kesten_tree(const OffspringLaw& law, std::uint32_t height,
                                      std::uint64_t seed) {
  if (height < 1) throw std::invalid_argument("sample_kesten_tree: height >= 1");
  const SizeBiasedLaw biased = size_bias(law);
  LayeredTree tree;
  tree.meta().law_name = law.name();
  tree.meta().seed = seed;
  tree.mark_spine(0);
  for (std::uint64_t id = 0; id < tree.size(); ++id) {
    const std::uint32_t h = tree.vertex(id).height;
    if (h >= height) continue;
    Xoshiro256pp rng(derive_seed(seed, id));
    if (tree.vertex(id).on_spine) {
      const std::uint64_t c = biased.sample(rng);
      const std::uint64_t spine_idx = uniform_below(rng, c);
      for (std::uint64_t j = 0; j < c; ++j) tree.add_child(id, j == spine_idx);
    } else {
      const std::uint64_t c = law.sample(rng);
      for (std::uint64_t j = 0; j < c; ++j) tree.add_child(id);
    }
  }
  return tree;
}

/// Restriction to heights <= new_height. Breadth-first ids make the kept
/// vertex set an id prefix, so shapes and spine marks carry over directly.
inline LayeredTree truncate_tree(const LayeredTree& tree, std::uint32_t new_height) {
  if (new_height >= tree.height()) return tree;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> spine_ids;
  for (std::uint64_t id = 0; id < tree.size(); ++id) {
    const TreeVertex& v = tree.vertex(id);
    if (v.height > new_height) break;
    counts.push_back(v.height == new_height ? 0 : v.children.size());
    if (v.on_spine) spine_ids.push_back(id);
  }
  LayeredTree out = LayeredTree::from_bfs_child_counts(counts);
  for (std::uint64_t id : spine_ids) out.mark_spine(id);
  out.meta() = tree.meta();
  return out;
}

/// Line format: header `# tree law=<name> params=<token> seed=<u64>
/// height=<u32> vertices=<u64>` then one line per vertex in id order:
/// `id parent_id height child_rank spine_flag`. Byte-exact round trip.
inline void save_tree(const LayeredTree& tree, std::ostream& os) {
  os << "# tree law=" << tree.meta().law_name << " params=" << tree.meta().law_params
     << " seed=" << tree.meta().seed << " height=" << tree.height()
     << " vertices=" << tree.size() << "\n";
  for (std::uint64_t id = 0; id < tree.size(); ++id) {
    const TreeVertex& v = tree.vertex(id);
    os << id << ' ' << v.parent << ' ' << v.height << ' ' << v.child_rank << ' '
       << (v.on_spine ? 1 : 0) << "\n";
  }
}

inline LayeredTree load_tree(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || !header.starts_with("# tree "))
    throw std::runtime_error("load_tree: missing header");
  TreeMeta meta;
  std::uint64_t expect_vertices = 0;
  std::uint32_t expect_height = 0;
  for (const auto tok : split_ws(std::string_view(header).substr(7))) {
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("load_tree: malformed header token");
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "law") meta.law_name = std::string(val);
    else if (key == "params") meta.law_params = std::string(val);
    else if (key == "seed") meta.seed = parse_u64(val);
    else if (key == "height") expect_height = static_cast<std::uint32_t>(parse_u64(val));
    else if (key == "vertices") expect_vertices = parse_u64(val);
    else throw std::runtime_error("load_tree: unknown header key");
  }
  if (expect_vertices == 0) throw std::runtime_error("load_tree: empty tree");

  std::vector<std::uint64_t> counts(expect_vertices, 0);
  std::vector<std::uint8_t> spine(expect_vertices, 0);
  std::vector<std::int64_t> parents(expect_vertices, -2);
  std::vector<std::uint64_t> heights(expect_vertices, 0);
  std::vector<std::uint64_t> ranks(expect_vertices, 0);
  std::string line;
  for (std::uint64_t want = 0; want < expect_vertices; ++want) {
    if (!std::getline(is, line)) throw std::runtime_error("load_tree: truncated file");
    const auto tok = split_ws(line);
    if (tok.size() != 5) throw std::runtime_error("load_tree: malformed vertex line");
    const std::uint64_t id = parse_u64(tok[0]);
    if (id != want) throw std::runtime_error("load_tree: ids must be 0..n-1 in order");
    parents[id] = parse_i64(tok[1]);
    heights[id] = parse_u64(tok[2]);
    ranks[id] = parse_u64(tok[3]);
    spine[id] = tok[4] == "1" ? 1 : 0;
    if (id == 0) {
      if (parents[0] != -1) throw std::runtime_error("load_tree: root must have parent -1");
    } else {
      if (parents[id] < 0 || static_cast<std::uint64_t>(parents[id]) >= id)
        throw std::runtime_error("load_tree: parent must precede child");
      ++counts[static_cast<std::uint64_t>(parents[id])];
    }
  }
  LayeredTree tree = LayeredTree::from_bfs_child_counts(counts);
  if (tree.height() != expect_height)
    throw std::runtime_error("load_tree: header height mismatch");
  for (std::uint64_t id = 0; id < expect_vertices; ++id) {
    const TreeVertex& v = tree.vertex(id);
    if (v.parent != parents[id])
      throw std::runtime_error("load_tree: vertex order is not breadth-first");
    if (v.height != heights[id] || v.child_rank != ranks[id])
      throw std::runtime_error("load_tree: height/child_rank inconsistent with structure");
    if (spine[id]) tree.mark_spine(id);
  }
  tree.meta() = meta;
  return tree;
}

}  // namespace ltspin
