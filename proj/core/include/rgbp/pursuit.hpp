#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rgbp/exact.hpp"
#include "rgbp/gbp.hpp"
#include "rgbp/prng.hpp"
#include "rgbp/region_graph.hpp"
#include "rgbp/transforms.hpp"

namespace rgbp {

enum class Strategy { OPT, RP, RP_PLUS, RP_MINUS, RAND };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct PursuitConfig {
  int W = 2;             // max region-width
  int K = 4;             // regions to add in total
  int k = 1;             // regions added per iteration
  int max_loop_len = 4;  // chordless-cycle candidate cap
  GBPOptions gbp;
  Strategy strategy = Strategy::RP;
  std::uint64_t seed = 0;
};

struct ScoredCandidate {
  Region region;
  double score = 0.0;
  bool valid = true;  // false when the local run failed to converge
};

struct PursuitRecord {
  int iteration = 0;  // 0 is the base approximation
  std::vector<ScoredCandidate> scores;
  std::vector<Region> chosen;
  double free_energy = 0.0;
  std::optional<double> l1_error;  // present when an oracle was supplied
  int gbp_iters = 0;
  bool converged = false;
};

struct PursuitTrace {
  std::vector<PursuitRecord> records;
};

/// All chordless cycles of length 3..max_len in the model's interaction
/// graph, canonicalized and deterministically ordered.
std::vector<std::vector<VarId>> enumerate_chordless_cycles(const FactorGraph& fg,
                                                           int max_len);

/// Candidate regions for the current graph: cycles turned into regions
/// (cycle variables plus every multi-variable factor among them), decomposed
/// into weakly irreducible pieces, width-filtered against their direct
/// subregions in rg, with duplicates and already-present regions removed.
std::vector<Region> candidate_pool(const FactorGraph& fg, const RegionGraph& rg,
                                   const PursuitConfig& config);

/// Local free-energy change of tentatively inserting `candidate`: messages
/// into the new region's cone are frozen, GBP runs on the cone only, and the
/// result compares the post-insertion contribution of the cone and of the
/// non-descendants the run touched against the same regions before
/// insertion. Empty when the local run does not converge.
std::optional<double> local_delta_f(const RegionGraph& rg, const FactorGraph& fg,
                                    const GBPState& state, const BeliefSet& beliefs,
                                    const Region& candidate, const GBPOptions& opts);

/// Top-k per strategy (max for RP/RP+, min for RP-/OPT, seeded-uniform for
/// RAND); ties broken by canonical region order.
std::vector<Region> select_regions(const std::vector<ScoredCandidate>& pool,
                                   Strategy strategy, int k, SplitMix64* rng);

/// The sequential bottom-up loop: GBP on the Bethe base, then repeatedly
/// score candidates, add the best k, and re-run GBP warm-started (keeping
/// c = 0 regions). The oracle enables l1_error tracking and is required for
/// the OPT strategy.
PursuitTrace region_pursuit(const FactorGraph& fg, const PursuitConfig& config,
                            const ExactResult* oracle = nullptr);

}  // namespace rgbp
