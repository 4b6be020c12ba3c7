#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "rgbp/region_graph.hpp"
#include "rgbp/table.hpp"

namespace rgbp {

struct EdgeKey {
  int parent = -1;
  int child = -1;
  auto operator<=>(const EdgeKey&) const = default;
};

enum class Schedule { topdown_roundrobin, random_permutation };

struct GBPOptions {
  double damping = 0.5;      // in [0, 1)
  double tolerance = 1e-9;   // on the log-message residual
  int max_iters = 2000;      // sweeps
  Schedule schedule = Schedule::topdown_roundrobin;
  std::uint64_t seed = 0;
  bool random_init = false;  // uniform init by default
};

struct GBPState {
  std::map<EdgeKey, LogTable> messages;  // normalized, over the child's vars
  int iterations = 0;
  bool converged = false;
  double max_residual = 0.0;
  long long clamp_events = 0;            // small-belief division guards hit
  std::vector<double> residual_curve;    // one entry per sweep
  bool has_zero_counting_regions = false;
};

struct BeliefSet {
  std::map<int, LogTable> beliefs;  // region id -> normalized log table
};

/// Message slots feeding the belief of r: all edges (source -> destination)
/// with the destination inside r + Dec(r) and the source outside.
std::vector<EdgeKey> u_set(const RegionGraph& rg, int r);

/// b_r from the region's own factors and the u_set messages (log domain,
/// normalized).
LogTable compute_belief(const RegionGraph& rg, const FactorGraph& fg,
                        const GBPState& state, int r);

/// One application of the message update on `edge` (marginalization of the
/// parent belief over the child belief, times the old message), damped and
/// normalized. Does not mutate `state`.
LogTable update_message(const RegionGraph& rg, const FactorGraph& fg,
                        const GBPState& state, EdgeKey edge, double damping,
                        long long* clamp_events = nullptr);

/// Runs parent-to-child GBP until the largest log-message change in a sweep
/// drops below tolerance or max_iters is reached. Non-convergence is
/// reported, not thrown. `init` warm-starts matching edges; `update_only`
/// (when given) freezes every edge not in the set.
std::pair<GBPState, BeliefSet> run_gbp(const RegionGraph& rg, const FactorGraph& fg,
                                       const GBPOptions& opts,
                                       const GBPState* init = nullptr,
                                       const std::set<EdgeKey>* update_only = nullptr);

/// F_r = -<log prod psi>_b + sum b log b, with 0 log 0 = 0.
double region_free_energy(const RegionGraph& rg, const FactorGraph& fg,
                          const BeliefSet& beliefs, int r);

/// F_RG = sum_r c_r F_r.
double rg_free_energy(const RegionGraph& rg, const FactorGraph& fg,
                      const BeliefSet& beliefs);

/// Per-variable marginals read from the smallest region containing each
/// variable (lowest id on ties).
std::vector<std::vector<double>> node_marginals(const RegionGraph& rg,
                                                const FactorGraph& fg,
                                                const BeliefSet& beliefs);

}  // namespace rgbp
