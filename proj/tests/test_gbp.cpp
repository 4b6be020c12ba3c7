#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rgbp/exact.hpp"
#include "rgbp/gbp.hpp"

using namespace rgbp;

namespace {

FactorGraph two_var_model() {
  return build_factor_graph({2, 2}, {{{0, 1}, {4, 1, 2, 3}}});
}

GBPOptions fast_opts() {
  GBPOptions o;
  o.damping = 0.0;
  o.tolerance = 1e-12;
  o.max_iters = 500;
  return o;
}

}  // namespace

TEST_CASE("u_set") {
  SUBCASE("single-region graph has no slots") {
    RegionGraph rg;
    int top = rg.add_region({{0, 1}, {0}});
    rg.recompute_counting();
    CHECK(u_set(rg, top).empty());
  }
  SUBCASE("bethe factor region sees the other parents of its children") {
    auto fg = build_factor_graph({2, 2, 2}, {{{0, 1}, {1, 1, 1, 1}}, {{1, 2}, {1, 1, 1, 1}}});
    auto rg = bethe_region_graph(fg);
    int r01 = rg.find_region({{0, 1}, {0}});
    int r12 = rg.find_region({{1, 2}, {1}});
    int v1 = rg.find_region({{1}, {}});
    REQUIRE(r01 >= 0);
    auto slots = u_set(rg, r01);
    REQUIRE(slots.size() == 1);
    CHECK(slots[0].parent == r12);
    CHECK(slots[0].child == v1);
  }
  SUBCASE("variable region sees all its parents") {
    auto fg = two_var_model();
    auto rg = bethe_region_graph(fg);
    int v0 = rg.find_region({{0}, {}});
    auto slots = u_set(rg, v0);
    REQUIRE(slots.size() == 1);
    CHECK(slots[0].child == v0);
  }
}

TEST_CASE("compute_belief") {
  auto fg = two_var_model();
  auto rg = bethe_region_graph(fg);
  GBPOptions opts = fast_opts();
  opts.max_iters = 0;  // keep the uniform initialization
  auto [state, beliefs] = run_gbp(rg, fg, opts);

  SUBCASE("variable region belief is the message product") {
    int v0 = rg.find_region({{0}, {}});
    LogTable b = compute_belief(rg, fg, state, v0);
    // single parent, uniform message -> uniform belief
    CHECK(std::exp(b.v[0]) == doctest::Approx(0.5));
  }
  SUBCASE("outer region belief is its factor under uniform messages") {
    int top = rg.find_region({{0, 1}, {0}});
    LogTable b = compute_belief(rg, fg, state, top);
    CHECK(std::exp(b.v[0]) == doctest::Approx(0.4));  // 4 / 10
    CHECK(std::exp(b.v[3]) == doctest::Approx(0.3));
  }
}

TEST_CASE("update_message") {
  auto fg = two_var_model();
  auto rg = bethe_region_graph(fg);
  int top = rg.find_region({{0, 1}, {0}});
  int v0 = rg.find_region({{0}, {}});
  GBPOptions opts = fast_opts();
  opts.max_iters = 0;
  auto [state, beliefs] = run_gbp(rg, fg, opts);

  SUBCASE("one update reproduces the BP factor marginalization") {
    LogTable m = update_message(rg, fg, state, {top, v0}, 0.0);
    CHECK(std::exp(m.v[0]) == doctest::Approx(0.5));  // (4+1)/10
    CHECK(std::exp(m.v[1]) == doctest::Approx(0.5));
    int v1 = rg.find_region({{1}, {}});
    LogTable m2 = update_message(rg, fg, state, {top, v1}, 0.0);
    CHECK(std::exp(m2.v[0]) == doctest::Approx(0.6));  // (4+2)/10
    CHECK(std::exp(m2.v[1]) == doctest::Approx(0.4));
  }
  SUBCASE("fixed point maps to itself") {
    auto [conv, bel] = run_gbp(rg, fg, fast_opts());
    REQUIRE(conv.converged);
    for (const auto& [edge, msg] : conv.messages) {
      LogTable m = update_message(rg, fg, conv, edge, 0.0);
      for (std::size_t i = 0; i < m.v.size(); ++i)
        CHECK(m.v[i] == doctest::Approx(msg.v[i]).epsilon(1e-9));
    }
  }
  SUBCASE("damped update interpolates in the log domain") {
    LogTable plain = update_message(rg, fg, state, {top, v0}, 0.0);
    LogTable damped = update_message(rg, fg, state, {top, v0}, 0.5);
    const LogTable& old = state.messages.at({top, v0});
    for (std::size_t i = 0; i < plain.v.size(); ++i) {
      double expect = 0.5 * plain.v[i] + 0.5 * old.v[i];
      // comparison up to the renormalization shift
      double shift = damped.v[0] - (0.5 * plain.v[0] + 0.5 * old.v[0]);
      CHECK(damped.v[i] == doctest::Approx(expect + shift).epsilon(1e-12));
    }
  }
  SUBCASE("unknown edge") {
    CHECK_THROWS_AS(update_message(rg, fg, state, {v0, top}, 0.0), std::invalid_argument);
  }
}

TEST_CASE("gbp on trees is exact") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto fg = gen_tree(8, 1.5, 0.5, seed);
    auto rg = bethe_region_graph(fg);
    GBPOptions opts;  // defaults: damping 0.5, tol 1e-9
    auto [state, beliefs] = run_gbp(rg, fg, opts);
    REQUIRE(state.converged);
    auto exact = exact_brute_force(fg);
    auto marg = node_marginals(rg, fg, beliefs);
    for (int i = 0; i < fg.num_vars(); ++i)
      for (int s = 0; s < 2; ++s)
        CHECK(marg[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] ==
              doctest::Approx(exact.node_marginals[static_cast<std::size_t>(i)]
                                                  [static_cast<std::size_t>(s)])
                  .epsilon(1e-8));
    CHECK(rg_free_energy(rg, fg, beliefs) ==
          doctest::Approx(-exact.log_partition).epsilon(1e-8));
  }
}

TEST_CASE("uniform model converges immediately") {
  auto fg = gen_grid(3, 3, 0.0, 0.0, 1);
  auto rg = bethe_region_graph(fg);
  auto [state, beliefs] = run_gbp(rg, fg, fast_opts());
  CHECK(state.converged);
  CHECK(state.iterations == 1);
  for (const auto& m : node_marginals(rg, fg, beliefs)) {
    CHECK(m[0] == doctest::Approx(0.5));
    CHECK(m[1] == doctest::Approx(0.5));
  }
}

TEST_CASE("marginal consistency at convergence") {
  auto fg = gen_grid(3, 3, 1.0, 0.5, 4);
  auto rg = bethe_region_graph(fg);
  GBPOptions opts;
  auto [state, beliefs] = run_gbp(rg, fg, opts);
  REQUIRE(state.converged);
  for (int id : rg.ids())
    for (int c : rg.children(id)) {
      LogTable down = lse_marginal(beliefs.beliefs.at(id), rg.region(c).vars);
      normalize_lse(down);
      const LogTable& bc = beliefs.beliefs.at(c);
      for (std::size_t i = 0; i < bc.v.size(); ++i)
        CHECK(std::abs(std::exp(down.v[i]) - std::exp(bc.v[i])) <= 10 * opts.tolerance);
    }
}

TEST_CASE("free energies") {
  SUBCASE("uniform belief over uniform factors gives -log S") {
    auto fg = build_factor_graph({2, 2}, {{{0, 1}, {1, 1, 1, 1}}});
    RegionGraph rg;
    int top = rg.add_region({{0, 1}, {0}});
    rg.recompute_counting();
    auto [state, beliefs] = run_gbp(rg, fg, fast_opts());
    CHECK(region_free_energy(rg, fg, beliefs, top) == doctest::Approx(-std::log(4.0)));
  }
  SUBCASE("all-inclusive region reproduces the exact joint and -log Z") {
    auto fg = gen_fully_connected(3, 1.0, 0.5, 2);
    RegionGraph rg;
    Region all{{0, 1, 2}, {0, 1, 2, 3, 4, 5}};
    int top = rg.add_region(all);
    for (int i = 0; i < 3; ++i) {
      int v = rg.add_region({{i}, {}});
      rg.add_edge(top, v);
    }
    rg.recompute_counting();
    auto [state, beliefs] = run_gbp(rg, fg, fast_opts());
    REQUIRE(state.converged);
    auto exact = exact_brute_force(fg);
    CHECK(rg_free_energy(rg, fg, beliefs) ==
          doctest::Approx(-exact.log_partition).epsilon(1e-10));
    auto marg = node_marginals(rg, fg, beliefs);
    for (int i = 0; i < 3; ++i)
      CHECK(marg[static_cast<std::size_t>(i)][0] ==
            doctest::Approx(exact.node_marginals[static_cast<std::size_t>(i)][0])
                .epsilon(1e-9));
  }
  SUBCASE("rescaling a factor shifts the free energy by -log c") {
    auto fg1 = build_factor_graph({2, 2}, {{{0, 1}, {4, 1, 2, 3}}});
    auto fg2 = build_factor_graph({2, 2}, {{{0, 1}, {8, 2, 4, 6}}});
    auto rg1 = bethe_region_graph(fg1);
    auto rg2 = bethe_region_graph(fg2);
    auto [s1, b1] = run_gbp(rg1, fg1, fast_opts());
    auto [s2, b2] = run_gbp(rg2, fg2, fast_opts());
    CHECK(rg_free_energy(rg2, fg2, b2) ==
          doctest::Approx(rg_free_energy(rg1, fg1, b1) - std::log(2.0)).epsilon(1e-10));
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  auto fg = gen_fully_connected(7, 3.0, 0.5, 13);  // strong couplings
  auto rg = bethe_region_graph(fg);
  GBPOptions opts;
  opts.damping = 0.0;
  opts.max_iters = 30;
  opts.tolerance = 1e-12;
  auto [state, beliefs] = run_gbp(rg, fg, opts);
  CHECK(state.residual_curve.size() == static_cast<std::size_t>(state.iterations));
  CHECK(state.iterations <= 30);
}

TEST_CASE("random schedule and random init still land on the tree fixed point") {
  auto fg = gen_tree(6, 1.0, 0.5, 9);
  auto rg = bethe_region_graph(fg);
  GBPOptions opts;
  opts.schedule = Schedule::random_permutation;
  opts.random_init = true;
  opts.seed = 77;
  auto [state, beliefs] = run_gbp(rg, fg, opts);
  REQUIRE(state.converged);
  auto exact = exact_brute_force(fg);
  auto marg = node_marginals(rg, fg, beliefs);
  for (int i = 0; i < fg.num_vars(); ++i)
    CHECK(marg[static_cast<std::size_t>(i)][0] ==
          doctest::Approx(exact.node_marginals[static_cast<std::size_t>(i)][0]).epsilon(1e-7));
}
