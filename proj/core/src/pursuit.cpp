#include "rgbp/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rgbp {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::OPT: return "OPT";
    case Strategy::RP: return "RP";
    case Strategy::RP_PLUS: return "RP+";
    case Strategy::RP_MINUS: return "RP-";
    case Strategy::RAND: return "RAND";
  }
  return "?";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "OPT") return Strategy::OPT;
  if (name == "RP") return Strategy::RP;
  if (name == "RP+" || name == "RP_PLUS" || name == "RPplus") return Strategy::RP_PLUS;
  if (name == "RP-" || name == "RP_MINUS" || name == "RPminus") return Strategy::RP_MINUS;
  if (name == "RAND") return Strategy::RAND;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::vector<std::vector<VarId>> enumerate_chordless_cycles(const FactorGraph& fg,
                                                           int max_len) {
  return chordless_cycles(interaction_graph(fg), max_len);
}

namespace {

// Interactions among the cycle's variables. Single-variable factors stay in
// their own outer regions: their message to the variable below is constant
// (the normalized potential), so the candidate loses nothing, while pulling
// them under the new region creates deep negative-counting chains whose GBP
// dynamics are unstable at the experiment couplings.
Region cycle_to_region(const std::vector<VarId>& cycle, const FactorGraph& fg) {
  Region r;
  r.vars = cycle;
  std::sort(r.vars.begin(), r.vars.end());
  for (const Factor& f : fg.factors())
    if (f.scope.size() >= 2 &&
        std::includes(r.vars.begin(), r.vars.end(), f.scope.begin(), f.scope.end()))
      r.factors.push_back(f.id);
  return r;
}

}  // namespace

std::vector<Region> candidate_pool(const FactorGraph& fg, const RegionGraph& rg,
                                   const PursuitConfig& config) {
  auto ext = is_extendable(rg, fg);
  if (!ext.extendable) throw std::invalid_argument("region graph is not extendable");

  std::vector<Region> pool;
  for (const auto& cycle : enumerate_chordless_cycles(fg, config.max_loop_len)) {
    Region raw = cycle_to_region(cycle, fg);
    for (Region& piece : decompose_weakly_irreducible(raw, fg)) {
      if (rg.find_region(piece) >= 0) continue;
      if (std::find(pool.begin(), pool.end(), piece) != pool.end()) continue;
      std::vector<std::vector<VarId>> child_scopes;
      for (int id : direct_subregions(rg, piece)) child_scopes.push_back(rg.region(id).vars);
      if (region_width(piece, fg, child_scopes).width > config.W) continue;
      pool.push_back(std::move(piece));
    }
  }
  std::sort(pool.begin(), pool.end(), region_less);
  return pool;
}

std::optional<double> local_delta_f(const RegionGraph& rg, const FactorGraph& fg,
                                    const GBPState& state, const BeliefSet& beliefs,
                                    const Region& candidate, const GBPOptions& opts) {
  RegionGraph grown = add_outer_region(rg, fg, candidate);
  int cand_id = grown.find_region(candidate);
  std::vector<int> cone = grown.descendants(cand_id);  // all pre-existing ids

  std::set<EdgeKey> cone_edges;
  {
    std::vector<int> in_cone = cone;
    in_cone.push_back(cand_id);
    std::sort(in_cone.begin(), in_cone.end());
    for (int id : in_cone)
      for (int c : grown.children(id)) cone_edges.insert({id, c});
  }
  auto [local_state, local_beliefs] = run_gbp(grown, fg, opts, &state, &cone_edges);
  if (!local_state.converged) return std::nullopt;

  // The new region and its descendants carry fresh counting numbers; the
  // remaining regions keep theirs, and only those whose belief the local run
  // actually moved (a u_set slot inside the cone) can contribute.
  double f_before = 0.0;
  double f_after = static_cast<double>(grown.counting(cand_id)) *
                   region_free_energy(grown, fg, local_beliefs, cand_id);
  for (int id : cone) {
    f_before += static_cast<double>(rg.counting(id)) * region_free_energy(rg, fg, beliefs, id);
    f_after += static_cast<double>(grown.counting(id)) *
               region_free_energy(grown, fg, local_beliefs, id);
  }
  for (int id : grown.ids()) {
    if (id == cand_id || std::binary_search(cone.begin(), cone.end(), id)) continue;
    auto slots = u_set(grown, id);
    bool touched = std::any_of(slots.begin(), slots.end(),
                               [&](const EdgeKey& e) { return cone_edges.count(e) > 0; });
    if (!touched) continue;
    f_before += static_cast<double>(rg.counting(id)) * region_free_energy(rg, fg, beliefs, id);
    f_after += static_cast<double>(grown.counting(id)) *
               region_free_energy(grown, fg, local_beliefs, id);
  }
  return std::abs(f_after - f_before);
}

std::vector<Region> select_regions(const std::vector<ScoredCandidate>& pool,
                                   Strategy strategy, int k, SplitMix64* rng) {
  std::vector<const ScoredCandidate*> valid;
  for (const auto& c : pool)
    if (c.valid) valid.push_back(&c);
  if (valid.empty()) throw std::invalid_argument("empty pool");

  std::vector<Region> chosen;
  if (strategy == Strategy::RAND) {
    if (!rng) throw std::invalid_argument("RAND selection needs a generator");
    std::vector<std::size_t> idx(valid.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng->below(i))]);
    for (std::size_t i = 0; i < idx.size() && static_cast<int>(chosen.size()) < k; ++i)
      chosen.push_back(valid[idx[i]]->region);
    return chosen;
  }

  const bool maximize = strategy == Strategy::RP || strategy == Strategy::RP_PLUS;
  std::stable_sort(valid.begin(), valid.end(),
                   [&](const ScoredCandidate* a, const ScoredCandidate* b) {
                     if (a->score != b->score)
                       return maximize ? a->score > b->score : a->score < b->score;
                     return region_less(a->region, b->region);
                   });
  for (std::size_t i = 0; i < valid.size() && static_cast<int>(chosen.size()) < k; ++i)
    chosen.push_back(valid[i]->region);
  return chosen;
}

PursuitTrace region_pursuit(const FactorGraph& fg, const PursuitConfig& config,
                            const ExactResult* oracle) {
  if (config.k > config.K && config.K > 0)
    throw std::invalid_argument("k must not exceed K");
  if (config.W < 2) throw std::invalid_argument("W must be at least 2");
  if (config.max_loop_len < 3) throw std::invalid_argument("max_loop_len must be at least 3");
  if (config.strategy == Strategy::OPT && !oracle)
    throw std::invalid_argument("OPT requires the exact oracle");

  RegionGraph rg = bethe_region_graph(fg);
  {
    auto ext = is_extendable(rg, fg);
    if (!ext.extendable) throw std::logic_error("base region graph is not extendable");
  }

  auto [state, beliefs] = run_gbp(rg, fg, config.gbp);
  PursuitTrace trace;
  auto record = [&](int iteration, std::vector<ScoredCandidate> scores,
                    std::vector<Region> chosen, const GBPState& st, const BeliefSet& bel) {
    PursuitRecord rec;
    rec.iteration = iteration;
    rec.scores = std::move(scores);
    rec.chosen = std::move(chosen);
    rec.free_energy = rg_free_energy(rg, fg, bel);
    if (oracle) rec.l1_error = avg_l1_error(node_marginals(rg, fg, bel), *oracle);
    rec.gbp_iters = st.iterations;
    rec.converged = st.converged;
    trace.records.push_back(std::move(rec));
  };
  record(0, {}, {}, state, beliefs);

  SplitMix64 rand_rng(config.seed);
  int added = 0;
  int iteration = 0;
  while (added < config.K) {
    auto pool = candidate_pool(fg, rg, config);
    if (pool.empty()) break;

    std::vector<ScoredCandidate> scored;
    scored.reserve(pool.size());
    double f_current = rg_free_energy(rg, fg, beliefs);
    for (const Region& cand : pool) {
      ScoredCandidate sc;
      sc.region = cand;
      switch (config.strategy) {
        case Strategy::RP:
        case Strategy::RP_MINUS: {
          auto score = local_delta_f(rg, fg, state, beliefs, cand, config.gbp);
          if (score) {
            sc.score = *score;
          } else {
            sc.valid = false;  // skipped this round, retried next iteration
          }
          break;
        }
        case Strategy::RP_PLUS:
        case Strategy::OPT: {
          RegionGraph grown = add_outer_region(rg, fg, cand);
          auto [st2, bel2] = run_gbp(grown, fg, config.gbp, &state);
          if (!st2.converged) {
            sc.valid = false;
            break;
          }
          if (config.strategy == Strategy::RP_PLUS)
            sc.score = std::abs(rg_free_energy(grown, fg, bel2) - f_current);
          else
            sc.score = avg_l1_error(node_marginals(grown, fg, bel2), *oracle);
          break;
        }
        case Strategy::RAND:
          break;
      }
      scored.push_back(std::move(sc));
    }

    bool any_valid = std::any_of(scored.begin(), scored.end(),
                                 [](const ScoredCandidate& c) { return c.valid; });
    if (!any_valid) break;

    // Additions that break convergence of the full run are rolled back and
    // the next-best candidate is taken; skips last for this iteration only.
    int want = std::min(config.k, config.K - added);
    std::vector<ScoredCandidate> selectable = scored;
    bool committed = false;
    while (!committed) {
      if (std::none_of(selectable.begin(), selectable.end(),
                       [](const ScoredCandidate& c) { return c.valid; }))
        break;
      auto chosen = select_regions(selectable, config.strategy, want, &rand_rng);
      RegionGraph grown = rg;
      for (const Region& r : chosen) {
        grown = add_outer_region(grown, fg, r);
        auto rep = check_validity(grown, fg);
        if (!rep.ok()) throw std::logic_error("pursuit produced an invalid region graph");
      }
      auto [next_state, next_beliefs] = run_gbp(grown, fg, config.gbp, &state);
      if (!next_state.converged) {
        for (auto& sc : selectable)
          if (std::find(chosen.begin(), chosen.end(), sc.region) != chosen.end())
            sc.valid = false;
        continue;
      }
      rg = std::move(grown);
      state = std::move(next_state);
      beliefs = std::move(next_beliefs);
      added += static_cast<int>(chosen.size());
      ++iteration;
      record(iteration, std::move(scored), std::move(chosen), state, beliefs);
      committed = true;
    }
    if (!committed) break;
  }
  return trace;
}

}  // namespace rgbp
