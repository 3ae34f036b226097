#include "ltspin/mw.hpp"

#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "ltspin/offspring.hpp"
#include "ltspin/potential.hpp"

namespace {

using namespace ltspin;

SymmetryExperimentParams small_params() {
  SymmetryExperimentParams params;
  params.r = 2;
  params.n_list = {8, 12};
  params.replicas = 4;
  params.sweeps = 100;
  params.delta = 1.0;
  params.seed = 31;
  params.workers = 1;
  return params;
}

TEST(SymmetryExperiment, CellLayoutAndSeedPairing) {
  const OffspringLaw law = OffspringLaw::geometric();
  const XyPotential U(1, 1.0);
  const SymmetryExperimentParams params = small_params();
  const SymmetryExperimentResult result = symmetry_experiment(law, U, params);

  ASSERT_EQ(result.cells.size(), 8u);
  ASSERT_EQ(result.median_per_n.size(), 2u);
  ASSERT_EQ(result.paired_below_first.size(), 2u);
  EXPECT_DOUBLE_EQ(result.paired_below_first[0], 0.0);
  for (std::size_t n_idx = 0; n_idx < 2; ++n_idx) {
    for (std::uint32_t rep = 0; rep < params.replicas; ++rep) {
      const SymmetryCell& cell = result.cell(n_idx, rep);
      EXPECT_EQ(cell.n, params.n_list[n_idx]);
      EXPECT_EQ(cell.replica, rep);
      EXPECT_GE(cell.modulus, 0.0);
      EXPECT_LE(cell.modulus, 1.0);
      EXPECT_GE(cell.sweep_modulus_median, 0.0);
      EXPECT_LE(cell.sweep_modulus_median, 1.0);
      EXPECT_GT(cell.acceptance, 0.0);
      EXPECT_LE(cell.acceptance, 1.0);
      EXPECT_GT(cell.rotation_acceptance, 0.0);
      EXPECT_LE(cell.rotation_acceptance, 1.0);
      // The tree seed pairs the geometry across the n grid; the dynamics
      // seeds are distinct per n.
      EXPECT_EQ(cell.tree_seed, result.cell(0, rep).tree_seed);
      if (n_idx > 0) {
        EXPECT_NE(cell.init_seed, result.cell(0, rep).init_seed);
        EXPECT_NE(cell.sweep_seed, result.cell(0, rep).sweep_seed);
      }
      if (rep > 0)
        EXPECT_NE(cell.tree_seed, result.cell(n_idx, 0).tree_seed);
    }
  }
}

TEST(SymmetryExperiment, DeterministicAcrossRuns) {
  const OffspringLaw law = OffspringLaw::geometric();
  const XyPotential U(1, 1.0);
  const SymmetryExperimentParams params = small_params();
  const SymmetryExperimentResult a = symmetry_experiment(law, U, params);
  const SymmetryExperimentResult b = symmetry_experiment(law, U, params);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].tree_seed, b.cells[i].tree_seed);
    EXPECT_EQ(a.cells[i].init_seed, b.cells[i].init_seed);
    EXPECT_EQ(a.cells[i].sweep_seed, b.cells[i].sweep_seed);
    EXPECT_DOUBLE_EQ(a.cells[i].modulus, b.cells[i].modulus);
    EXPECT_DOUBLE_EQ(a.cells[i].sweep_modulus_median, b.cells[i].sweep_modulus_median);
    EXPECT_DOUBLE_EQ(a.cells[i].acceptance, b.cells[i].acceptance);
    EXPECT_DOUBLE_EQ(a.cells[i].rotation_acceptance, b.cells[i].rotation_acceptance);
  }
  for (std::size_t i = 0; i < a.median_per_n.size(); ++i)
    EXPECT_DOUBLE_EQ(a.median_per_n[i], b.median_per_n[i]);
}

TEST(SymmetryExperiment, WorkerCountDoesNotChangeResults) {
  const OffspringLaw law = OffspringLaw::geometric();
  const XyPotential U(1, 1.0);
  SymmetryExperimentParams params = small_params();
  const SymmetryExperimentResult serial = symmetry_experiment(law, U, params);
  params.workers = 3;
  const SymmetryExperimentResult pooled = symmetry_experiment(law, U, params);
  ASSERT_EQ(serial.cells.size(), pooled.cells.size());
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    EXPECT_DOUBLE_EQ(serial.cells[i].modulus, pooled.cells[i].modulus);
    EXPECT_DOUBLE_EQ(serial.cells[i].sweep_modulus_median,
                     pooled.cells[i].sweep_modulus_median);
    EXPECT_DOUBLE_EQ(serial.cells[i].acceptance, pooled.cells[i].acceptance);
  }
}

TEST(SymmetryExperiment, FreePotentialAcceptsEverything) {
  const OffspringLaw law = OffspringLaw::geometric();
  const ZeroPotential U(2);
  SymmetryExperimentParams params = small_params();
  params.replicas = 2;
  const SymmetryExperimentResult result = symmetry_experiment(law, U, params);
  for (const SymmetryCell& cell : result.cells) {
    EXPECT_DOUBLE_EQ(cell.acceptance, 1.0);
    EXPECT_DOUBLE_EQ(cell.rotation_acceptance, 1.0);
    EXPECT_GT(cell.sweep_modulus_median, 0.0);
    EXPECT_LT(cell.sweep_modulus_median, 1.0);
    EXPECT_GT(cell.modulus, 0.0);
    EXPECT_LT(cell.modulus, 1.0);
  }
}

TEST(SymmetryExperiment, RejectsBadParameters) {
  const OffspringLaw law = OffspringLaw::geometric();
  const XyPotential U(1, 1.0);
  SymmetryExperimentParams params = small_params();
  params.n_list.clear();
  EXPECT_THROW(symmetry_experiment(law, U, params), std::invalid_argument);
  params = small_params();
  params.n_list = {3};  // needs n > r + 1 = 3
  EXPECT_THROW(symmetry_experiment(law, U, params), std::invalid_argument);
  params = small_params();
  params.replicas = 0;
  EXPECT_THROW(symmetry_experiment(law, U, params), std::invalid_argument);
  params = small_params();
  params.sweeps = 1;
  EXPECT_THROW(symmetry_experiment(law, U, params), std::invalid_argument);
}

}  // namespace
