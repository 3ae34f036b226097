#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ltspin/offspring.hpp"
#include "ltspin/potential.hpp"
#include "ltspin/rng.hpp"
#include "ltspin/spin.hpp"
#include "ltspin/stats.hpp"
#include "ltspin/tree.hpp"
#include "ltspin/triangulation.hpp"

namespace ltspin {

struct SymmetryExperimentParams {
  std::uint32_t r = 5;
  std::vector<std::uint32_t> n_list = {16, 128};
  std::uint32_t replicas = 20;
  std::uint64_t sweeps = 10000;
  double delta = 1.0;
  std::uint64_t seed = 1;
  std::uint32_t workers = 1;
};

/// One (outer radius, replica) run: spins start uniformly at random in the
/// interior, the layer-n circle is pinned to the aligned all-zero spin, and
/// after a burn-in of one fifth of the sweeps the magnetization over the
/// inner slab is recorded once per sweep. The cell statistic is the modulus
/// of the recorded magnetization averaged over the window: any per-sweep
/// modulus is invariant under global rotations and so blind to how far the
/// slab's orientation drifts, while the averaged vector shrinks exactly when
/// the boundary's pull is too weak to hold that orientation steady — the
/// effect this experiment measures. The per-sweep modulus median is kept as
/// a local-coherence diagnostic.
struct SymmetryCell {
  std::uint32_t n = 0;
  std::uint32_t replica = 0;
  std::uint64_t tree_seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t sweep_seed = 0;
  double modulus = 0;
  double sweep_modulus_median = 0;
  double acceptance = 0;           // single-site proposals
  double rotation_acceptance = 0;  // section-rotation proposals
};

struct SymmetryExperimentResult {
  std::vector<std::uint32_t> n_list;
  std::uint32_t replicas = 0;
  std::vector<SymmetryCell> cells;  // ordered by (n index, replica)
  std::vector<double> median_per_n;
  /// Fraction of replicas whose cell modulus at this n is strictly below the
  /// same replica's modulus at the first n of the grid (the first entry is
  /// trivially compared with itself, reported as 0).
  std::vector<double> paired_below_first;

  const SymmetryCell& cell(std::size_t n_idx, std::uint32_t replica) const {
    return cells[n_idx * replicas + replica];
  }
};

/// The boundary-influence probe: for each outer radius n, replicas share
/// seed-paired trees (one spine-conditioned tree per replica, truncated at
/// each n), equilibrate against the aligned boundary with alternating site
/// and section-rotation sweeps (the collective moves keep deep cylinders
/// mixing within the sweep budget), and report the per-n median of the
/// window-averaged magnetization modulus over the inner slab. Symmetry
/// restoration shows up as the medians decreasing with n.
inline SymmetryExperimentResult symmetry_experiment(
    const OffspringLaw& law, const PairPotential& potential,
    const SymmetryExperimentParams& params) {
  if (params.n_list.empty())
    throw std::invalid_argument("symmetry_experiment: empty n grid");
  for (const std::uint32_t n : params.n_list)
    if (n <= params.r + 1)
      throw std::invalid_argument("symmetry_experiment: every n must exceed r + 1");
  if (params.replicas < 1 || params.sweeps < 2)
    throw std::invalid_argument("symmetry_experiment: need replicas and sweeps");

  const std::uint32_t n_max =
      *std::max_element(params.n_list.begin(), params.n_list.end());

  SymmetryExperimentResult result;
  result.n_list = params.n_list;
  result.replicas = params.replicas;
  result.cells.resize(params.n_list.size() * params.replicas);

  const auto run_cell = [&](std::size_t task) {
    const std::size_t n_idx = task / params.replicas;
    const auto replica = static_cast<std::uint32_t>(task % params.replicas);
    const std::uint32_t n = params.n_list[n_idx];

    SymmetryCell cell;
    cell.n = n;
    cell.replica = replica;
    cell.tree_seed = derive_seed(params.seed, replica, 0, 1);
    cell.init_seed = derive_seed(params.seed, replica, n, 2);
    cell.sweep_seed = derive_seed(params.seed, replica, n, 3);

    // The same per-replica tree serves every n: truncating the deep tree is
    // distributionally identical to sampling at the shallower height, and it
    // pairs the geometry across the n grid.
    const LayeredTree tree = sample_kesten_tree(law, n_max, cell.tree_seed);
    const Triangulation T = tree_to_lt(truncate_tree(tree, n));
    const FlatIndex idx(T);

    SpinConfiguration config = SpinConfiguration::random(
        idx.size(), potential.dimension(), cell.init_seed);
    const std::uint64_t boundary_begin = idx.flat(VertexRef{n, 0});
    for (std::uint64_t v = boundary_begin; v < idx.size(); ++v)
      for (std::uint32_t i = 0; i < potential.dimension(); ++i)
        config.set_angle(v, i, 0.0);

    const MetropolisSampler sampler(T, potential, params.delta, n - 1);
    const SectionRotationSampler rotator(T, potential, params.delta, n - 1);
    Xoshiro256pp rng(cell.sweep_seed);
    const std::vector<VertexRef> region = slab(T, params.r);

    const std::uint64_t burn_in = params.sweeps / 5;
    std::vector<double> moduli;
    moduli.reserve(params.sweeps - burn_in);
    std::vector<double> window_sum(2 * potential.dimension(), 0.0);
    SweepStats site_stats, rotation_stats;
    for (std::uint64_t s = 0; s < params.sweeps; ++s) {
      const SweepStats one = sampler.sweep(config, rng);
      site_stats.proposals += one.proposals;
      site_stats.accepted += one.accepted;
      const SweepStats rot = rotator.sweep(config, rng);
      rotation_stats.proposals += rot.proposals;
      rotation_stats.accepted += rot.accepted;
      if (s < burn_in) continue;
      const Magnetization m = magnetization(T, config, region);
      moduli.push_back(m.modulus);
      for (std::size_t i = 0; i < window_sum.size(); ++i)
        window_sum[i] += m.components[i];
    }
    const auto window = static_cast<double>(moduli.size());
    double sumsq = 0;
    for (std::uint32_t i = 0; i < potential.dimension(); ++i) {
      const double c = window_sum[2 * i] / window;
      const double s = window_sum[2 * i + 1] / window;
      sumsq += c * c + s * s;
    }
    cell.modulus = std::sqrt(sumsq / potential.dimension());
    cell.sweep_modulus_median = median(moduli);
    cell.acceptance = site_stats.acceptance_rate();
    cell.rotation_acceptance = rotation_stats.acceptance_rate();
    result.cells[task] = cell;
  };

  const std::size_t tasks = result.cells.size();
  const std::uint32_t workers =
      std::min<std::uint32_t>(std::max<std::uint32_t>(params.workers, 1),
                              static_cast<std::uint32_t>(tasks));
  if (workers <= 1) {
    for (std::size_t task = 0; task < tasks; ++task) run_cell(task);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint32_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t task = next.fetch_add(1); task < tasks;
             task = next.fetch_add(1))
          run_cell(task);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t n_idx = 0; n_idx < params.n_list.size(); ++n_idx) {
    std::vector<double> per_replica(params.replicas);
    for (std::uint32_t rep = 0; rep < params.replicas; ++rep)
      per_replica[rep] = result.cell(n_idx, rep).modulus;
    result.median_per_n.push_back(median(per_replica));
    std::uint32_t below = 0;
    for (std::uint32_t rep = 0; rep < params.replicas; ++rep)
      if (result.cell(n_idx, rep).modulus < result.cell(0, rep).modulus)
        ++below;
    result.paired_below_first.push_back(
        n_idx == 0 ? 0.0
                   : static_cast<double>(below) / static_cast<double>(params.replicas));
  }
  return result;
}

}  // namespace ltspin
