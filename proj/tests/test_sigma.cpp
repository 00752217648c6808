#include <gtest/gtest.h>

#include "coarse/sigma.hpp"
#include "support.hpp"

using namespace coarse;
using namespace coarse::testing;

namespace {

void expect_valid_chain(const FiniteCoarseInstance& inst, const EscapeChain& c) {
  ASSERT_FALSE(c.points.empty());
  EXPECT_EQ(c.points.front(), inst.basepoint());
  for (std::size_t i = 0; i + 1 < c.points.size(); ++i)
    EXPECT_TRUE(within(inst.distance(c.points[i], c.points[i + 1]), c.scale)) << "step " << i;
  EXPECT_TRUE(in_annulus(inst.radius(c.points.back()), c.shell_radius));
}

}  // namespace

TEST(FindEscapeChain, LineWalksUnitSteps) {
  const auto line = recipe("line", 100);
  const auto c = find_escape_chain(line, 1.0);
  ASSERT_TRUE(c);
  expect_valid_chain(line, *c);
  // Ties go to the smaller id, which is the negative ray here.
  ASSERT_EQ(c->points.size(), 91u);
  for (std::size_t i = 0; i < 91; ++i) EXPECT_EQ(line.label(c->points[i]), std::to_string(-static_cast<int>(i)));
  EXPECT_DOUBLE_EQ(c->shell_radius, 90.0);
}

TEST(FindEscapeChain, SquaresHaveNoneAtHundred) {
  const auto sq = recipe("squares", 0, 1e4);
  EXPECT_FALSE(find_escape_chain(sq, 100.0));
  // 2n+1 <= 199 reaches 99^2 = 9801 >= 9000.
  const auto c = find_escape_chain(sq, 199.0);
  ASSERT_TRUE(c);
  expect_valid_chain(sq, *c);
}

TEST(FindEscapeChain, BookRunsAlongFirstPage) {
  const auto book = recipe("book", 100, {}, 5);
  const auto c = find_escape_chain(book, 1.0);
  ASSERT_TRUE(c);
  expect_valid_chain(book, *c);
  for (std::size_t i = 1; i < c->points.size(); ++i) EXPECT_EQ(book.label(c->points[i]).rfind("p1:", 0), 0u);
}

TEST(FindEscapeChain, GraphChainIsThinnedToScale) {
  // Unit edges but R = 4: consecutive chain points may skip vertices.
  const auto book = recipe("book", 100, {}, 3);
  const auto c = find_escape_chain(book, 4.0);
  ASSERT_TRUE(c);
  expect_valid_chain(book, *c);
  EXPECT_LE(c->points.size(), 26u);
}

TEST(FindEscapeChain, MarginAndScaleChecked) {
  const auto line = recipe("line", 10);
  EXPECT_THROW(find_escape_chain(line, 1.0, 0.0), InputError);
  EXPECT_THROW(find_escape_chain(line, 1.0, 1.0), InputError);
  EXPECT_THROW(find_escape_chain(line, 0.0), InputError);
}

TEST(SigmaReport, LineHasTwoClasses) {
  const auto line = recipe("line", 100);
  const auto sys = build_end_system(line, ScaleLadder::default_for(100));
  const auto rep = sigma_report(line, sys);
  EXPECT_EQ(rep.classes.size(), 2u);
  for (const auto& s : rep.per_scale) EXPECT_TRUE(s.exists);
  const auto om = omega_map(rep, sys);
  EXPECT_TRUE(om.bijective());
  EXPECT_EQ(om.thread_count, 2u);
}

TEST(SigmaReport, SquaresHaveNoClassesButEnds) {
  const auto sq = recipe("squares", 0, 1e4);
  const auto sys = build_end_system(sq, ScaleLadder::default_for(1e4));
  const auto rep = sigma_report(sq, sys);
  EXPECT_TRUE(rep.classes.empty());
  for (const auto& s : rep.per_scale) EXPECT_FALSE(s.exists);
  const auto st = stable_end_count(sys);
  EXPECT_FALSE(st.status == Stability::stabilized && st.stable_count == 0);
  const auto om = omega_map(rep, sys);
  EXPECT_TRUE(om.class_to_thread.empty());
  EXPECT_GT(om.thread_count, 0u);
  EXPECT_TRUE(om.injective);
  EXPECT_FALSE(om.surjective);
}

TEST(SigmaReport, BooksHaveOneClassPerPage) {
  for (const char* name : {"book", "discrete_book"}) {
    const auto b = recipe(name, 100, {}, 5);
    const auto sys = build_end_system(b, ScaleLadder::default_for(b.truncation_radius()));
    const auto rep = sigma_report(b, sys);
    EXPECT_EQ(rep.classes.size(), 5u) << name;
    EXPECT_TRUE(omega_map(rep, sys).bijective()) << name;
  }
}

TEST(SigmaReport, DiscreteBookPagesAppearAsScaleGrows) {
  // Page i has spacing i, so at R = 2 only pages 1 and 2 are walkable.
  const auto b = recipe("discrete_book", 100, {}, 5);
  const auto sys = build_end_system(b, ScaleLadder::make({0, 10, 20, 40}, {1, 2, 4, 8}, b.truncation_radius()));
  const auto rep = sigma_report(b, sys);
  std::vector<std::size_t> counts;
  for (const auto& s : rep.per_scale) counts.push_back(s.classes.size());
  EXPECT_EQ(counts, (std::vector<std::size_t>{1, 2, 4, 5}));
  for (std::size_t i = 0; i + 1 < rep.per_scale.size(); ++i) EXPECT_EQ(rep.merges[i].size(), counts[i]);
}

TEST(OmegaMap, NaturalityForBookInclusion) {
  auto D = shared_recipe("discrete_book", 100, {}, 5);
  auto B = shared_recipe("book", 100, {}, 5);
  const auto ladder = ScaleLadder::make({0, 10, 20, 40}, {5, 8, 16}, 100);
  const auto sd = build_end_system(*D, ladder), sb = build_end_system(*B, ladder);
  const auto f = label_inclusion(D, B);
  const auto ind = induced_end_map(f, sd, sb);
  ASSERT_TRUE(ind.defined);
  const auto nat = check_naturality(f, sd, sigma_report(*D, sd), sb, sigma_report(*B, sb), ind);
  EXPECT_GT(nat.checked, 0u);
  EXPECT_EQ(nat.violations, 0u);
  EXPECT_EQ(nat.outside_target_classes, 0u);
}

// ---------------------------------------------------------------- properties

TEST(SigmaProperties, ChainsValidAndMonotoneInScale) {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 40; ++round) {
    const auto fixed = round % 2 ? random_graph(rng, 30 + rng() % 60, rng() % 30, true)
                                 : random_cloud(rng, 40 + rng() % 150, 1 + round % 3, 12.0, MetricKind::euclidean, true);
    bool seen = false;
    for (double R : {0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0}) {
      const auto c = find_escape_chain(fixed, R);
      if (c) expect_valid_chain(fixed, *c);
      if (seen) {
        EXPECT_TRUE(c) << "round " << round << " lost its chain at R=" << R;
      }
      seen = seen || c.has_value();
    }
  }
}

TEST(SigmaProperties, ClassesPersistAcrossScales) {
  std::mt19937_64 rng(32);
  for (int round = 0; round < 30; ++round) {
    const auto fixed = random_cloud(rng, 60 + rng() % 150, 1 + round % 2, 15.0, MetricKind::euclidean, true);
    const double top = fixed.truncation_radius();
    const auto sys = build_end_system(fixed, ScaleLadder::make({0, top / 8, top / 4, top / 2}, {1, 2, 4, 8}, top));
    const auto rep = sigma_report(fixed, sys);
    const auto om = omega_map(rep, sys);
    EXPECT_TRUE(om.injective);
    for (std::size_t i = 0; i + 1 < rep.per_scale.size(); ++i) {
      const auto& next = rep.per_scale[i + 1].classes;
      for (auto [c, image] : rep.merges[i]) EXPECT_TRUE(std::binary_search(next.begin(), next.end(), image));
    }
  }
}
