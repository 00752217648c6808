#include <gtest/gtest.h>

#include "coarse/nonscattering.hpp"
#include "support.hpp"

using namespace coarse;
using namespace coarse::testing;

TEST(NonscatteringWitness, GridAtUnitScale) {
  const auto grid = recipe("grid2d", 50);
  const auto w = nonscattering_witness(grid, ScaleLadder::default_for(grid.truncation_radius()));
  ASSERT_TRUE(w);
  EXPECT_DOUBLE_EQ(w->scale, 1.0);
  EXPECT_EQ(w->verified_cutoffs.size(), 5u);
}

TEST(NonscatteringWitness, VaseNeedsTheArmSeparation) {
  const auto vase = recipe("vase", 100);
  const auto w3 = nonscattering_witness(vase, ScaleLadder::make({0, 10, 20, 40}, {1, 3, 5, 10}, 100));
  ASSERT_TRUE(w3);
  EXPECT_DOUBLE_EQ(w3->scale, 3.0);
  // The arms are exactly 2 apart, so 2 already suffices when on the ladder.
  const auto w2 = nonscattering_witness(vase, ScaleLadder::make({0, 10, 20, 40}, {1, 2, 3}, 100));
  ASSERT_TRUE(w2);
  EXPECT_DOUBLE_EQ(w2->scale, 2.0);
  EXPECT_FALSE(nonscattering_witness(vase, ScaleLadder::make({0, 10, 20, 40}, {1, 1.9}, 100)));
}

TEST(NonscatteringWitness, FlaredVaseHasNone) {
  const auto fv = recipe("flared_vase", 100, 100.0);
  std::vector<double> R;
  for (int i = 1; i <= 10; ++i) R.push_back(i);
  EXPECT_FALSE(nonscattering_witness(fv, ScaleLadder::make({0, 10, 20, 40}, R, 100)));
}

TEST(NonscatteringConsequences, HoldOnWitnessedRecipes) {
  for (const char* name : {"grid2d", "vase"}) {
    const auto inst = recipe(name, name == std::string("grid2d") ? 40 : 100);
    const auto sys = build_end_system(inst, ScaleLadder::make({0, 10, 20, 30}, {1, 2, 4, 8}, inst.truncation_radius()));
    const auto w = nonscattering_witness(sys);
    ASSERT_TRUE(w) << name;
    const auto c = check_consequences(sys, *w, sigma_report(inst, sys));
    EXPECT_TRUE(c.holds()) << name;
    EXPECT_EQ(c.stability.stable_count, 1u) << name;
    EXPECT_TRUE(c.omega_bijective) << name;
  }
}

TEST(NonscatteringConsequences, BoundedSpaceGivesEmptyOuterAnnulus) {
  // A bounded blob: the outermost annulus past its diameter is empty.
  CloudTable t;
  t.dim = 1;
  for (int k = 0; k <= 10; ++k) {
    t.ids.push_back(std::to_string(k));
    t.coords.push_back(k * 0.1);
  }
  const auto blob = FiniteCoarseInstance::from_cloud(t, MetricKind::euclidean, "0", 100.0);
  const auto sys = build_end_system(blob, ScaleLadder::make({0, 10, 20, 40}, {1, 2, 4}, 100));
  const auto w = nonscattering_witness(sys);
  ASSERT_TRUE(w);
  const auto c = check_consequences(sys, *w, sigma_report(blob, sys));
  EXPECT_FALSE(c.outer_nonempty);
  EXPECT_TRUE(c.holds());
  EXPECT_EQ(c.stability.stable_count, 0u);
}

// ---------------------------------------------------------------- properties

TEST(NonscatteringProperties, RandomInstancesObeyConsequences) {
  std::mt19937_64 rng(41);
  std::size_t witnessed = 0;
  for (int round = 0; round < 80; ++round) {
    SpaceRecipe rc;
    const char* names[] = {"line", "grid2d", "vase", "flared_vase", "book", "discrete_book", "squares"};
    rc.name = names[round % 7];
    rc.N = rc.name == "grid2d" ? 12 : 60;
    rc.pages = 1 + static_cast<long>(rng() % 4);
    rc.seed = rng();
    rc.jitter = 0.05 * static_cast<double>(rng() % 8);
    const auto inst = generate(rc);
    const double rho = inst.truncation_radius();
    const auto sys = build_end_system(inst, ScaleLadder::make({0, rho / 8, rho / 4, rho / 2}, {1, 2, 4, 8}, rho));
    const auto w = nonscattering_witness(sys);
    if (!w) continue;
    ++witnessed;
    const auto c = check_consequences(sys, *w, sigma_report(inst, sys));
    EXPECT_TRUE(c.stabilized_at_most_one) << rc.name << " seed " << rc.seed;
    EXPECT_TRUE(c.sigma_at_most_one) << rc.name;
    EXPECT_TRUE(c.witness_monotone) << rc.name;
    if (c.outer_nonempty) {
      EXPECT_TRUE(c.omega_bijective) << rc.name;
    }
  }
  EXPECT_GT(witnessed, 10u);
}
