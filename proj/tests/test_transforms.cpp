#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rgbp/exact.hpp"
#include "rgbp/gbp.hpp"
#include "rgbp/transforms.hpp"
#include "transform_cases.hpp"

using namespace rgbp;

namespace {

FactorGraph square_pairwise() {
  std::vector<double> t = {2, 1, 1, 2};
  return build_factor_graph({2, 2, 2, 2},
                            {{{0, 1}, t}, {{1, 3}, t}, {{2, 3}, t}, {{0, 2}, t}});
}

}  // namespace

TEST_CASE("link_birth") {
  auto fg = build_factor_graph({2, 2, 2}, {{{0, 1}, {2, 1, 1, 3}}, {{1, 2}, {1, 2, 3, 1}}});
  RegionGraph rg;
  int r1 = rg.add_region({{0, 1, 2}, {0, 1}});
  int r2 = rg.add_region({{0, 1}, {0}});
  int r3 = rg.add_region({{0}, {}});
  rg.add_edge(r1, r2);
  rg.add_edge(r2, r3);
  rg.recompute_counting();

  SUBCASE("counting numbers are untouched") {
    auto out = link_birth(rg, r1, r3);
    for (int id : rg.ids()) CHECK(out.counting(id) == rg.counting(id));
    CHECK(out.has_edge(r1, r3));
  }
  SUBCASE("already a child") {
    CHECK_THROWS_WITH_AS(link_birth(rg, r1, r2), "edge exists", std::invalid_argument);
  }
  SUBCASE("not a descendant") {
    CHECK_THROWS_WITH_AS(link_birth(rg, r2, r1), "not a strict descendant",
                         std::invalid_argument);
  }
}

TEST_CASE("split preconditions") {
  auto fg = square_pairwise();
  RegionGraph rg;
  int target = rg.add_region({{0, 1, 2, 3}, {0, 1, 2, 3}});
  int child = rg.add_region({{0, 1}, {0}});
  rg.add_edge(target, child);
  rg.recompute_counting();

  SUBCASE("bridging factors make the partition invalid") {
    SplitSpec spec;
    spec.target = target;
    spec.alpha1 = {{0, 1}, {0, 1}};   // factor 1 = (1,3) escapes alpha1's vars
    spec.alpha2 = {{2, 3}, {2, 3}};   // factor 3 = (0,2) escapes alpha2's vars
    spec.beta = {{}, {}};
    CHECK_THROWS_AS(split(rg, fg, spec), std::invalid_argument);
  }
  SUBCASE("beta that fails to separate is rejected") {
    // beta = {1}: removing variable 1 leaves the path 0-2-3 connecting the sides
    SplitSpec spec;
    spec.target = target;
    spec.alpha1 = {{0}, {0}};
    spec.alpha2 = {{2, 3}, {1, 2, 3}};
    spec.beta = {{1}, {}};
    CHECK_THROWS_AS(split(rg, fg, spec), std::invalid_argument);
  }
  SUBCASE("target must be outer") {
    SplitSpec spec;
    spec.target = child;
    spec.alpha1 = {{0}, {}};
    spec.alpha2 = {{1}, {}};
    spec.beta = {{}, {0}};
    CHECK_THROWS_WITH_AS(split(rg, fg, spec), "target is not an outer region",
                         std::invalid_argument);
  }
}

TEST_CASE("split rejects children that straddle the cut") {
  // path region 0-1-2 with a child holding both endpoints
  auto fg = build_factor_graph({2, 2, 2}, {{{0, 1}, {2, 1, 1, 3}}, {{1, 2}, {1, 2, 3, 1}}});
  RegionGraph rg;
  int target = rg.add_region({{0, 1, 2}, {0, 1}});
  int child = rg.add_region({{0, 2}, {}});
  rg.add_edge(target, child);
  rg.recompute_counting();
  SplitSpec spec;
  spec.target = target;
  spec.alpha1 = {{0}, {0}};
  spec.alpha2 = {{2}, {1}};
  spec.beta = {{1}, {}};
  CHECK_THROWS_WITH_AS(split(rg, fg, spec),
                       "a child region fits in neither side of the split",
                       std::invalid_argument);
}

TEST_CASE("merge preconditions") {
  auto fg = build_factor_graph({2, 2}, {{{0, 1}, {3, 1, 1, 2}}});
  RegionGraph rg;
  int r1 = rg.add_region({{0, 1}, {0}});
  int r2 = rg.add_region_unchecked({{0, 1}, {0}});
  int v0 = rg.add_region({{0}, {}});
  rg.add_edge(r1, r2);
  rg.add_edge(r2, v0);
  rg.recompute_counting();

  SUBCASE("works on a copy chain and adds counting numbers") {
    long long c_sum = rg.counting(r1) + rg.counting(r2);
    auto out = merge(rg, r1, r2);
    int m = out.find_region({{0, 1}, {0}});
    REQUIRE(m >= 0);
    CHECK(out.counting(m) == c_sum);
    CHECK(out.num_regions() == 2);
  }
  SUBCASE("non-identical regions") {
    CHECK_THROWS_WITH_AS(merge(rg, r1, v0), "regions not identical", std::invalid_argument);
  }
  SUBCASE("must be parent of") {
    RegionGraph rg2;
    int a = rg2.add_region({{0, 1}, {0}});
    int b = rg2.add_region_unchecked({{0, 1}, {0}});
    int v = rg2.add_region({{0}, {}});
    rg2.add_edge(a, v);
    rg2.add_edge(b, v);
    rg2.recompute_counting();
    CHECK_THROWS_AS(merge(rg2, a, b), std::invalid_argument);
  }
}

TEST_CASE("death") {
  auto fg = square_pairwise();
  auto rg = add_outer_region(bethe_region_graph(fg), fg, {{0, 1, 2, 3}, {0, 1, 2, 3}});
  int e0 = rg.find_region({{0, 1}, {0}});
  REQUIRE(rg.counting(e0) == 0);

  SUBCASE("removes and rewires, leaving other counting numbers alone") {
    auto out = death(rg, e0);
    CHECK(out.num_regions() == rg.num_regions() - 1);
    for (int id : out.ids()) CHECK(out.counting(id) == rg.counting(id));
    CHECK(check_validity(out, fg).ok());
    int sq = out.find_region({{0, 1, 2, 3}, {0, 1, 2, 3}});
    int v0 = out.find_region({{0}, {}});
    CHECK(out.has_edge(sq, v0));  // the square adopted the variable region
  }
  SUBCASE("refuses non-zero counting") {
    int sq = rg.find_region({{0, 1, 2, 3}, {0, 1, 2, 3}});
    CHECK_THROWS_WITH_AS(death(rg, sq), "counting number is not zero",
                         std::invalid_argument);
  }
  SUBCASE("killing all four edge regions keeps the graph valid") {
    auto out = rg;
    for (int a = 0; a < 4; ++a)
      out = death(out, out.find_region({fg.factor(a).scope, {a}}));
    CHECK(check_validity(out, fg).ok());
    CHECK(out.num_regions() == 5);
  }
}

TEST_CASE("strip pendant trees") {
  std::vector<double> t = {1, 2, 2, 1};
  auto fg = build_factor_graph({2, 2, 2, 2, 2, 2},
                               {{{0, 1}, t},
                                {{1, 2}, t},
                                {{0, 2}, t},
                                {{2, 3}, t},
                                {{3, 4}, t},
                                {{4, 5}, t}});
  SUBCASE("triangle plus pendant edge") {
    Region cand{{0, 1, 2, 3}, {0, 1, 2, 3}};
    Region core = strip_pendant_trees(cand, fg);
    CHECK(core.vars == std::vector<int>{0, 1, 2});
    CHECK(core.factors == std::vector<int>{0, 1, 2});
  }
  SUBCASE("pure tree vanishes") {
    Region cand{{3, 4, 5}, {4, 5}};
    Region core = strip_pendant_trees(cand, fg);
    CHECK(core.vars.empty());
  }
  SUBCASE("a chordless cycle is untouched") {
    auto sq = square_pairwise();
    Region cand{{0, 1, 2, 3}, {0, 1, 2, 3}};
    Region core = strip_pendant_trees(cand, sq);
    CHECK(core.vars == cand.vars);
    CHECK(core.factors == cand.factors);
  }
}

TEST_CASE("weakly irreducible decomposition") {
  std::vector<double> t = {1, 2, 2, 1};
  SUBCASE("two triangles sharing a vertex") {
    auto fg = build_factor_graph({2, 2, 2, 2, 2},
                                 {{{0, 1}, t},
                                  {{1, 2}, t},
                                  {{0, 2}, t},
                                  {{2, 3}, t},
                                  {{3, 4}, t},
                                  {{2, 4}, t}});
    Region cand{{0, 1, 2, 3, 4}, {0, 1, 2, 3, 4, 5}};
    auto pieces = decompose_weakly_irreducible(cand, fg);
    REQUIRE(pieces.size() == 2);
    CHECK(pieces[0].vars == std::vector<int>{0, 1, 2});
    CHECK(pieces[1].vars == std::vector<int>{2, 3, 4});
  }
  SUBCASE("chordless 4-cycle stays whole") {
    auto fg = square_pairwise();
    Region cand{{0, 1, 2, 3}, {0, 1, 2, 3}};
    auto pieces = decompose_weakly_irreducible(cand, fg);
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0].vars == cand.vars);
  }
  SUBCASE("triangle with pendant path yields only the triangle") {
    auto fg = build_factor_graph({2, 2, 2, 2, 2},
                                 {{{0, 1}, t},
                                  {{1, 2}, t},
                                  {{0, 2}, t},
                                  {{2, 3}, t},
                                  {{3, 4}, t}});
    Region cand{{0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}};
    auto pieces = decompose_weakly_irreducible(cand, fg);
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0].vars == std::vector<int>{0, 1, 2});
  }
  SUBCASE("disconnected pieces separate") {
    auto fg = build_factor_graph({2, 2, 2, 2, 2, 2},
                                 {{{0, 1}, t},
                                  {{1, 2}, t},
                                  {{0, 2}, t},
                                  {{3, 4}, t},
                                  {{4, 5}, t},
                                  {{3, 5}, t}});
    Region cand{{0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 4, 5}};
    auto pieces = decompose_weakly_irreducible(cand, fg);
    REQUIRE(pieces.size() == 2);
  }
}

TEST_CASE("region width") {
  std::vector<double> t = {1, 2, 2, 1};
  SUBCASE("chain with singleton children") {
    auto fg = build_factor_graph({2, 2, 2, 2}, {{{0, 1}, t}, {{1, 2}, t}, {{2, 3}, t}});
    Region cand{{0, 1, 2, 3}, {0, 1, 2}};
    auto w = region_width(cand, fg, {{0}, {1}, {2}, {3}});
    CHECK(w.width == 1);
    CHECK(w.exact);
  }
  SUBCASE("chordless cycles with edge children have width 2") {
    for (int n = 3; n <= 8; ++n) {
      std::vector<std::pair<std::vector<int>, std::vector<double>>> factors;
      std::vector<std::vector<int>> children;
      for (int i = 0; i < n; ++i) {
        std::vector<int> scope = {i, (i + 1) % n};
        std::sort(scope.begin(), scope.end());
        factors.push_back({scope, t});
        children.push_back(scope);
      }
      auto fg = build_factor_graph(std::vector<int>(static_cast<std::size_t>(n), 2), factors);
      Region cand;
      for (int i = 0; i < n; ++i) cand.vars.push_back(i);
      for (int i = 0; i < n; ++i) cand.factors.push_back(i);
      auto w = region_width(cand, fg, children);
      CHECK(w.width == 2);
      CHECK(w.exact);
    }
  }
  SUBCASE("clique of size k has width k-1") {
    const int k = 5;
    std::vector<std::pair<std::vector<int>, std::vector<double>>> factors;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) factors.push_back({{i, j}, t});
    auto fg = build_factor_graph(std::vector<int>(k, 2), factors);
    Region cand;
    for (int i = 0; i < k; ++i) cand.vars.push_back(i);
    for (std::size_t a = 0; a < factors.size(); ++a) cand.factors.push_back(static_cast<int>(a));
    CHECK(region_width(cand, fg, {}).width == k - 1);
  }
  SUBCASE("large regions fall back to the min-fill bound") {
    const int n = 16;
    std::vector<std::pair<std::vector<int>, std::vector<double>>> factors;
    for (int i = 0; i + 1 < n; ++i) factors.push_back({{i, i + 1}, t});
    auto fg = build_factor_graph(std::vector<int>(n, 2), factors);
    Region cand;
    for (int i = 0; i < n; ++i) cand.vars.push_back(i);
    for (int i = 0; i + 1 < n; ++i) cand.factors.push_back(i);
    auto w = region_width(cand, fg, {});
    CHECK_FALSE(w.exact);
    CHECK(w.width >= 1);
  }
}

TEST_CASE("free energy invariance at matched beliefs") {
  for (const auto& c : rgbp::testing::transform_invariance_cases()) {
    CAPTURE(c.name);
    double f_before = rg_free_energy(c.before, c.fg, c.before_beliefs);
    double f_after = rg_free_energy(c.after, c.fg, c.after_beliefs);
    CHECK(std::abs(f_before - f_after) < 1e-10);
  }
}

TEST_CASE("converged marginals survive the transforms") {
  GBPOptions opts;
  for (const auto& c : rgbp::testing::transform_invariance_cases()) {
    if (!c.gbp_comparable) continue;
    CAPTURE(c.name);
    auto [s1, b1] = run_gbp(c.before, c.fg, opts);
    auto [s2, b2] = run_gbp(c.after, c.fg, opts);
    REQUIRE(s1.converged);
    REQUIRE(s2.converged);
    auto m1 = node_marginals(c.before, c.fg, b1);
    auto m2 = node_marginals(c.after, c.fg, b2);
    for (std::size_t i = 0; i < m1.size(); ++i)
      for (std::size_t s = 0; s < m1[i].size(); ++s)
        CHECK(m1[i][s] == doctest::Approx(m2[i][s]).epsilon(1e-6));
  }
}

TEST_CASE("split of a path region lands on the two-clique graph") {
  auto fg = build_factor_graph({2, 2, 2}, {{{0, 1}, {2, 1, 1, 3}}, {{1, 2}, {1, 2, 3, 1}}});
  RegionGraph rg;
  int target = rg.add_region({{0, 1, 2}, {0, 1}});
  int vb = rg.add_region({{1}, {}});
  rg.add_edge(target, vb);
  rg.recompute_counting();
  SplitSpec spec;
  spec.target = target;
  spec.alpha1 = {{0}, {0}};
  spec.alpha2 = {{2}, {1}};
  spec.beta = {{1}, {}};
  auto out = split(rg, fg, spec);
  CHECK(out.num_regions() == 3);  // the new child merged with the old {1} region
  int a1 = out.find_region({{0, 1}, {0}});
  int a2 = out.find_region({{1, 2}, {1}});
  int b = out.find_region({{1}, {}});
  REQUIRE(a1 >= 0);
  REQUIRE(a2 >= 0);
  REQUIRE(b >= 0);
  CHECK(out.counting(b) == -1);
  CHECK(check_validity(out, fg).ok());
}
